"""Simulation pipeline for the spin-dependent force of an NV-doped diamond
on a diamagnetically levitated oscillator: cylindrical-magnet
magnetostatics, NV optical spin polarization, ensemble Stern-Gerlach force,
Langevin oscillator dynamics and PSD-based force recovery.
"""

__version__ = "0.1.0"
