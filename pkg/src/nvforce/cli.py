"""Config-driven scenario runner and command-line interface.

One YAML file holds named presets (magnets, diamond, spot, rates,
oscillator) and scenario blocks that reference them; every run writes its
data as CSV, a matplotlib script that plots the CSV, and a manifest
recording the config hash, seed and library versions so a rerun with the
same manifest reproduces the CSVs bit-exactly.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml

from . import analysis, mechanics
from .core import CONSTANTS, MAGIC_ANGLE, NVOrientation
from .errors import ConfigError, NumericalError
from .force_model import (DiamondSpec, IlluminationSpot, ensemble_force)
from .magnetostatics import (MAGNET_PRESETS, CylindricalMagnet, field_map,
                             write_field_map_csv)
from .nv_spin import (LaserDrive, SevenLevelParams, build_hamiltonian,
                      lab_moment, seven_level_steady_state,
                      steady_state_populations)

DEFAULT_CONFIG = {
    "presets": {
        "magnets": {
            "small": {"radius": 7.46e-3, "length": 14.93e-3, "remanence": 1.631},
            "large": {"radius": 14.92e-3, "length": 14.93e-3, "remanence": 1.631},
        },
        "diamond": {"dimensions": [3e-3, 3e-3, 0.5e-3],
                    "nv_density": 4.5e-6,
                    "carbon_number_density": 1.76e29},
        "spot": {"diameter": 1e-3, "power": 50.0},
        "rates": {},   # SevenLevelParams defaults
        "oscillator": {"mass": 1.28e-4, "f0": 17.6, "Q": 55.0,
                       "temperature": 300.0},
    },
    "scenarios": {
        "fig1c": {"magnet": "small", "gap": 0.5e-3,
                  "intensities": [0.0, 10.0, 30.0, 50.0],
                  "powers": [50.0], "duties": [0.48],
                  "duration": 0.0, "seed": 1},
        "fig2": {"magnet": "small", "gap": 0.5e-3,
                 "powers": [10.0], "duties": [0.48],
                 "duration": 600.0, "seed": 2},
        "fig3": {"magnet": "small", "gap": 0.5e-3,
                 "powers": [5.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0],
                 "duties": [0.25, 0.48], "duration": 300.0, "seed": 3},
        "fig4": {"magnet": "small", "gap": 0.5e-3,
                 "gaps_mm": [0.5, 1.5, 2.5, 3.5, 4.5, 5.5, 6.5],
                 "powers": [50.0], "duties": [0.48],
                 "duration": 0.0, "seed": 4},
        "sweep": {"magnet": "small", "gap": 0.5e-3, "param": "power",
                  "values": [10.0, 30.0, 50.0], "powers": [50.0],
                  "duties": [0.48], "duration": 0.0, "seed": 5},
    },
}


@dataclass(frozen=True)
class Scenario:
    """One resolved scenario: all presets dereferenced, ready to run."""

    name: str
    magnet_name: str
    magnet: CylindricalMagnet
    gap: float
    diamond: DiamondSpec
    spot: IlluminationSpot
    rates: SevenLevelParams
    oscillator: mechanics.OscillatorParams
    powers: tuple[float, ...]
    duties: tuple[float, ...]
    duration: float
    seed: int
    out_dir: Path
    extra: dict = field(default_factory=dict)


# ---------------------------------------------------------------- config

def _require(cfg: dict, key: str, path: str):
    if key not in cfg:
        raise ConfigError(f"{path}.{key}: missing required key")
    return cfg[key]


def load_config(path=None) -> dict:
    """Load the YAML config, or the built-in defaults when path is None."""
    if path is None:
        return json.loads(json.dumps(DEFAULT_CONFIG))  # deep copy
    try:
        with open(path) as fh:
            cfg = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a mapping")
    return cfg


def build_scenario(cfg: dict, name: str, out_dir: Path,
                   seed: int | None = None) -> Scenario:
    """Resolve scenario ``name`` against the preset tables, validating as
    it goes; every error names the exact offending config key."""
    presets = _require(cfg, "presets", "config")
    scenarios = _require(cfg, "scenarios", "config")
    if name not in scenarios:
        raise ConfigError(f"scenarios.{name}: unknown scenario")
    sc = scenarios[name]
    path = f"scenarios.{name}"

    magnets = _require(presets, "magnets", "presets")
    magnet_name = _require(sc, "magnet", path)
    if magnet_name not in magnets:
        raise ConfigError(f"{path}.magnet: unknown magnet preset {magnet_name!r}")
    try:
        magnet = CylindricalMagnet(**magnets[magnet_name])
    except (TypeError, ConfigError) as exc:
        raise ConfigError(f"presets.magnets.{magnet_name}: {exc}") from None

    gap = float(_require(sc, "gap", path))
    if gap <= 0:
        raise ConfigError(f"{path}.gap: must be positive")

    try:
        diamond = DiamondSpec(gap=gap, **{
            k: tuple(v) if k == "dimensions" else v
            for k, v in presets.get("diamond", {}).items()})
    except (TypeError, ConfigError) as exc:
        raise ConfigError(f"presets.diamond: {exc}") from None
    try:
        spot = IlluminationSpot(**presets.get("spot", {}))
    except (TypeError, ConfigError) as exc:
        raise ConfigError(f"presets.spot: {exc}") from None
    try:
        rates = SevenLevelParams(**presets.get("rates", {}))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"presets.rates: {exc}") from None
    try:
        osc = mechanics.OscillatorParams(**presets.get("oscillator", {}))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"presets.oscillator: {exc}") from None

    powers = tuple(float(p) for p in _require(sc, "powers", path))
    duties = tuple(float(d) for d in _require(sc, "duties", path))
    if not powers:
        raise ConfigError(f"{path}.powers: list must be nonempty")
    if not duties:
        raise ConfigError(f"{path}.duties: list must be nonempty")
    extra = {k: v for k, v in sc.items()
             if k not in {"magnet", "gap", "powers", "duties", "duration", "seed"}}
    return Scenario(name=name, magnet_name=magnet_name, magnet=magnet,
                    gap=gap, diamond=diamond, spot=spot, rates=rates,
                    oscillator=osc, powers=powers, duties=duties,
                    duration=float(sc.get("duration", 0.0)),
                    seed=int(seed if seed is not None else sc.get("seed", 0)),
                    out_dir=out_dir, extra=extra)


def _config_sha256(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()


def write_manifest(scenario: Scenario, cfg: dict, outputs: list[str]) -> Path:
    import scipy

    meta = {
        "scenario": scenario.name,
        "config_sha256": _config_sha256(cfg),
        "seed": scenario.seed,
        "outputs": sorted(outputs),
        "versions": {"python": sys.version.split()[0],
                     "numpy": np.__version__, "scipy": scipy.__version__},
    }
    path = scenario.out_dir / f"{scenario.name}_manifest.json"
    with open(path, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
    return path


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(f"{v:.17g}" if isinstance(v, float) else str(v)
                              for v in row) + "\n")


def _write_plot_script(path: Path, csv_name: str, title: str,
                       xlabel: str, ylabel: str, ycols: list[str],
                       xcol: str = None, logy: bool = False) -> None:
    lines = [
        "#!/usr/bin/env python3",
        '"""Auto-generated plot script; run next to its CSV."""',
        "import csv",
        "import matplotlib.pyplot as plt",
        "",
        f"rows = list(csv.DictReader(open({csv_name!r})))",
        f"x = [float(r[{(xcol or 'x')!r}]) for r in rows]",
    ]
    for c in ycols:
        lines.append(f"plt.plot(x, [float(r[{c!r}]) for r in rows], label={c!r})")
    if logy:
        lines.append("plt.yscale('log')")
    lines += [f"plt.xlabel({xlabel!r})", f"plt.ylabel({ylabel!r})",
              f"plt.title({title!r})", "plt.legend()",
              f"plt.savefig({(csv_name[:-4] + '.png')!r}, dpi=150)"]
    path.write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------- scenarios

def _delta_F(scenario: Scenario, power: float, gap: float | None = None,
             magnet: CylindricalMagnet | None = None) -> float:
    diamond = scenario.diamond if gap is None else replace(scenario.diamond, gap=gap)
    res = ensemble_force(diamond, replace(scenario.spot, power=power),
                         magnet or scenario.magnet,
                         LaserDrive(intensity=replace(scenario.spot, power=power).intensity),
                         scenario.rates, scenario.oscillator.temperature)
    return res.delta_F


def run_fig1c(scenario: Scenario, cfg: dict, threads: int = 1) -> list[str]:
    """Per-spin force vs the angle between NV axis and local field.

    |B| is held at 0.63 T with a gradient of -98 T/m along the field
    direction, matching the operating point 1 mm above the small magnet.
    One column of forces per pump intensity (mW/mm^2).
    """
    B_mag, grad = 0.63, -98.0
    intensities = [float(i) for i in scenario.extra.get(
        "intensities", [0.0, 10.0, 30.0, 50.0])]
    if not intensities:
        raise ConfigError(f"scenarios.{scenario.name}.intensities: list must be nonempty")
    thetas = np.linspace(0.0, np.pi / 2.0, 91)
    orient = NVOrientation(theta=0.0, phi=0.0)  # NV axis along lab z
    rows = []
    for th in thetas:
        B = B_mag * np.array([np.sin(th), 0.0, np.cos(th)])
        H = build_hamiltonian(B, orient)
        gradB_row = grad * B / B_mag  # d|B|/dz resolved on the components
        row = [float(np.degrees(th))]
        for I in intensities:
            rho = seven_level_steady_state(H, LaserDrive(intensity=I),
                                           scenario.rates,
                                           scenario.oscillator.temperature)
            row.append(float(gradB_row @ lab_moment(rho, orient)))
        rows.append(row)
    cols = ["theta_deg"] + [f"F_I{I:g}" for I in intensities]
    csv_path = scenario.out_dir / "fig1c_force_vs_angle.csv"
    _write_csv(csv_path, cols, rows)
    _write_plot_script(scenario.out_dir / "plot_fig1c.py",
                       csv_path.name, "Per-spin force vs field angle",
                       "theta (deg)", "F_z per spin (N)", cols[1:],
                       xcol="theta_deg")
    return [csv_path.name, "plot_fig1c.py"]


def run_fig2(scenario: Scenario, cfg: dict, threads: int = 1) -> list[str]:
    """Drive-on/off discrimination: time trace, folded waveform, PSD pairs.

    Four sub-cases: driven (magnet + polarizing laser), magnet off,
    non-polarizing control laser, and the driven PSD itself; the off cases
    are Brownian-only since the spin force difference vanishes.
    """
    power, duty = scenario.powers[0], scenario.duties[0]
    osc = scenario.oscillator
    period = 1.0 / osc.f0
    duration = scenario.duration or 600.0

    drive_I = replace(scenario.spot, power=power).intensity
    dF_on = _delta_F(scenario, power)
    # Non-polarizing control: thermal steady state, no force difference.
    res_ctl = ensemble_force(scenario.diamond, replace(scenario.spot, power=power),
                             scenario.magnet,
                             LaserDrive(intensity=drive_I, wavelength_polarizing=False),
                             scenario.rates, osc.temperature)
    cases = {
        "driven": dF_on,
        "magnet_off": 0.0,
        "control_laser": res_ctl.delta_F,
    }
    outputs = []
    summary = []
    for i, (label, dF) in enumerate(cases.items()):
        drv = mechanics.DriveWaveform(F_low=0.0, F_high=dF, duty=duty,
                                      period=period)
        ts = mechanics.simulate(osc, drv, duration, seed=scenario.seed + i)
        psd = analysis.estimate_psd(ts)
        ptf = analysis.peak_to_floor(psd, osc.f0)
        summary.append([label, float(dF), float(ptf)])
        psd_path = scenario.out_dir / f"fig2_psd_{label}.csv"
        _write_csv(psd_path, ["frequency_Hz", "psd_m2_per_Hz"],
                   zip(psd.frequencies.tolist(), psd.values.tolist()))
        outputs.append(psd_path.name)
        if label == "driven":
            trace_path = scenario.out_dir / "fig2_trace_driven.csv"
            n = int(10 * period * ts.sample_rate)
            tail = mechanics.TimeSeries(ts.sample_rate, ts.samples[-n:])
            _write_csv(trace_path, ["t_s", "z_m"],
                       zip(tail.times.tolist(), tail.samples.tolist()))
            bt, wf = mechanics.segment_average(ts, period)
            wf_path = scenario.out_dir / "fig2_waveform_driven.csv"
            _write_csv(wf_path, ["t_s", "z_normalized"],
                       zip(bt.tolist(), wf.tolist()))
            outputs += [trace_path.name, wf_path.name]
    sum_path = scenario.out_dir / "fig2_summary.csv"
    _write_csv(sum_path, ["case", "delta_F_N", "peak_to_floor"], summary)
    _write_plot_script(scenario.out_dir / "plot_fig2.py",
                       "fig2_psd_driven.csv", "Displacement PSD, driven",
                       "frequency (Hz)", "S_zz (m^2/Hz)", ["psd_m2_per_Hz"],
                       xcol="frequency_Hz", logy=True)
    return outputs + [sum_path.name, "plot_fig2.py"]


def run_fig3(scenario: Scenario, cfg: dict, threads: int = 1) -> list[str]:
    """Spin force vs laser power per duty cycle, model and simulation.

    For each (power, duty) point the model force difference feeds a full
    Langevin simulation whose PSD pipeline recovers it back; the CSV holds
    both numbers plus the steady-state amplitude.
    """
    osc = scenario.oscillator
    period = 1.0 / osc.f0
    duration = scenario.duration or 300.0
    points = [(p, d) for d in scenario.duties for p in scenario.powers]

    def model_point(pd):
        return _delta_F(scenario, pd[0])

    with ThreadPoolExecutor(max_workers=max(1, threads)) as ex:
        dFs = list(ex.map(model_point, points))

    rows, outputs = [], []
    for k, ((power, duty), dF) in enumerate(zip(points, dFs)):
        if power == 0.0:
            rows.append([float(duty), float(power), 0.0, 0.0, 0.0])
            continue
        drv = mechanics.DriveWaveform(F_low=0.0, F_high=dF, duty=duty,
                                      period=period)
        ts = mechanics.simulate(osc, drv, duration, seed=scenario.seed + k)
        psd = analysis.estimate_psd(ts)
        amp = analysis.amplitude_from_peak(psd, osc.f0)
        dF_rec = analysis.force_from_amplitude(amp, osc, duty)
        rows.append([float(duty), float(power), float(dF),
                     float(dF_rec), float(amp.amplitude)])
        if duty == scenario.duties[0]:
            psd_path = scenario.out_dir / f"fig3_psd_P{power:g}mW.csv"
            _write_csv(psd_path, ["frequency_Hz", "psd_m2_per_Hz"],
                       zip(psd.frequencies.tolist(), psd.values.tolist()))
            outputs.append(psd_path.name)
    csv_path = scenario.out_dir / "fig3_force_vs_power.csv"
    _write_csv(csv_path, ["duty", "power_mW", "delta_F_model_N",
                          "delta_F_recovered_N", "amplitude_m"], rows)
    _write_plot_script(scenario.out_dir / "plot_fig3.py",
                       csv_path.name, "Spin force vs laser power",
                       "power (mW)", "delta F (N)",
                       ["delta_F_model_N", "delta_F_recovered_N"],
                       xcol="power_mW")
    return outputs + [csv_path.name, "plot_fig3.py"]


def run_fig4(scenario: Scenario, cfg: dict, threads: int = 1) -> list[str]:
    """Model spin force vs magnet-diamond gap for both magnet presets."""
    gaps_mm = [float(g) for g in scenario.extra.get(
        "gaps_mm", [0.5, 1.5, 2.5, 3.5, 4.5, 5.5, 6.5])]
    if not gaps_mm:
        raise ConfigError(f"scenarios.{scenario.name}.gaps_mm: list must be nonempty")
    power = scenario.powers[0]
    presets = {name: CylindricalMagnet(**params) for name, params
               in cfg["presets"]["magnets"].items()}

    def point(args):
        name, gap_mm = args
        return _delta_F(scenario, power, gap=gap_mm * 1e-3, magnet=presets[name])

    jobs = [(name, g) for g in gaps_mm for name in presets]
    with ThreadPoolExecutor(max_workers=max(1, threads)) as ex:
        vals = dict(zip(jobs, ex.map(point, jobs)))

    names = list(presets)
    rows = [[g] + [float(vals[(n, g)]) for n in names] for g in gaps_mm]
    csv_path = scenario.out_dir / "fig4_force_vs_gap.csv"
    cols = ["gap_mm"] + [f"delta_F_{n}_N" for n in names]
    _write_csv(csv_path, cols, rows)
    _write_plot_script(scenario.out_dir / "plot_fig4.py",
                       csv_path.name, "Spin force vs gap",
                       "gap (mm)", "delta F (N)", cols[1:], xcol="gap_mm")
    return [csv_path.name, "plot_fig4.py"]


def run_sweep(scenario: Scenario, cfg: dict, threads: int = 1) -> list[str]:
    """Generic one-parameter model sweep: power (mW), duty, or gap (mm)."""
    param = scenario.extra.get("param", "power")
    values = [float(v) for v in scenario.extra.get("values", [])]
    if param not in {"power", "duty", "gap"}:
        raise ConfigError(f"scenarios.{scenario.name}.param: "
                          f"must be power, duty or gap, got {param!r}")
    if not values:
        raise ConfigError(f"scenarios.{scenario.name}.values: list must be nonempty")
    power, duty = scenario.powers[0], scenario.duties[0]
    osc = scenario.oscillator

    def point(v):
        if param == "power":
            dF = _delta_F(scenario, v)
            return dF, mechanics.steady_state_amplitude(osc, dF, duty)
        if param == "gap":
            dF = _delta_F(scenario, power, gap=v * 1e-3)
            return dF, mechanics.steady_state_amplitude(osc, dF, duty)
        dF = _delta_F(scenario, power)
        return dF, mechanics.steady_state_amplitude(osc, dF, v)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as ex:
        results = list(ex.map(point, values))
    rows = [[v, float(dF), float(A)] for v, (dF, A) in zip(values, results)]
    csv_path = scenario.out_dir / f"sweep_{param}.csv"
    _write_csv(csv_path, [param, "delta_F_N", "amplitude_m"], rows)
    _write_plot_script(scenario.out_dir / f"plot_sweep_{param}.py",
                       csv_path.name, f"Sweep over {param}",
                       param, "delta F (N)", ["delta_F_N"], xcol=param)
    return [csv_path.name, f"plot_sweep_{param}.py"]


_SCENARIO_RUNNERS = {"fig1c": run_fig1c, "fig2": run_fig2,
                     "fig3": run_fig3, "fig4": run_fig4, "sweep": run_sweep}


# ---------------------------------------------------------------- commands

def _cmd_scenario(args) -> int:
    cfg = load_config(args.config)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    scenario = build_scenario(cfg, args.command, out_dir, seed=args.seed)
    outputs = _SCENARIO_RUNNERS[args.command](scenario, cfg, threads=args.threads)
    manifest = write_manifest(scenario, cfg, outputs)
    print(f"{scenario.name}: wrote {len(outputs)} files to {out_dir} "
          f"(manifest {manifest.name})")
    return 0


def _cmd_field(args) -> int:
    cfg = load_config(args.config)
    magnets = cfg["presets"]["magnets"]
    if args.magnet not in magnets:
        raise ConfigError(f"presets.magnets.{args.magnet}: unknown preset")
    magnet = CylindricalMagnet(**magnets[args.magnet])
    zs = np.linspace(args.z_min, args.z_max, args.n) * 1e-3
    pts = np.column_stack([np.zeros_like(zs), np.zeros_like(zs), zs])
    samples = field_map(magnet, pts)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"field_{args.magnet}.csv"
    write_field_map_csv(samples, path)
    print(f"wrote {path}")
    return 0


def _cmd_spin(args) -> int:
    cfg = load_config(args.config)
    rates = SevenLevelParams(**cfg["presets"].get("rates", {}))
    orient = NVOrientation(theta=MAGIC_ANGLE, phi=np.deg2rad(45.0))
    B = np.array([0.0, 0.0, args.field])
    H = build_hamiltonian(B, orient)
    pops = steady_state_populations(H, LaserDrive(intensity=args.intensity),
                                    rates, args.temperature)
    rho = seven_level_steady_state(H, LaserDrive(intensity=args.intensity),
                                   rates, args.temperature)
    m = lab_moment(rho, orient)
    print(f"eigenbasis populations: {pops[0]:.6g} {pops[1]:.6g} {pops[2]:.6g}")
    print(f"lab moment (J/T): {m[0]:.6g} {m[1]:.6g} {m[2]:.6g}")
    return 0


def _cmd_force(args) -> int:
    cfg = load_config(args.config)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    scenario = build_scenario(cfg, "fig3", out_dir, seed=args.seed)
    magnets = cfg["presets"]["magnets"]
    if args.magnet not in magnets:
        raise ConfigError(f"presets.magnets.{args.magnet}: unknown preset")
    magnet = CylindricalMagnet(**magnets[args.magnet])
    diamond = replace(scenario.diamond, gap=args.gap * 1e-3)
    spot = replace(scenario.spot, power=args.power)
    res = ensemble_force(diamond, spot, magnet, LaserDrive(intensity=spot.intensity),
                         scenario.rates, scenario.oscillator.temperature)
    A = mechanics.steady_state_amplitude(scenario.oscillator, res.delta_F, args.duty)
    print(f"F_th = {res.F_th:.6g} N")
    print(f"F_GL = {res.F_GL:.6g} N")
    print(f"delta_F = {res.delta_F:.6g} N (scaling factor {res.scaling_factor})")
    print(f"steady-state amplitude at duty {args.duty}: {A:.6g} m")
    return 0


def _cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    osc = mechanics.OscillatorParams(**cfg["presets"].get("oscillator", {}))
    drv = mechanics.DriveWaveform(F_low=0.0, F_high=args.delta_f * 1e-9,
                                  duty=args.duty, period=1.0 / osc.f0)
    ts = mechanics.simulate(osc, drv, args.duration,
                            thermal_noise=not args.no_noise, seed=args.seed)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "timeseries.csv"
    mechanics.write_timeseries_csv(ts, path, metadata={
        "delta_F_N": args.delta_f * 1e-9, "duty": args.duty,
        "duration_s": args.duration})
    print(f"wrote {path} ({len(ts.samples)} samples)")
    return 0


def _cmd_analyze(args) -> int:
    cfg = load_config(args.config)
    osc = mechanics.OscillatorParams(**cfg["presets"].get("oscillator", {}))
    overrides = {k: v for k, v in
                 [("mass", args.mass), ("f0", args.f0), ("Q", args.q)]
                 if v is not None}
    if overrides:
        osc = replace(osc, **overrides)
    ts = analysis.import_timeseries(args.input)
    psd = analysis.estimate_psd(ts, segment_length=args.segment_length,
                                window=args.window)
    amp = analysis.amplitude_from_peak(psd, osc.f0, delta_f=args.band_halfwidth)
    dF = analysis.force_from_amplitude(amp, osc, args.duty)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "psd.csv"
    _write_csv(path, ["frequency_Hz", "psd_m2_per_Hz"],
               zip(psd.frequencies.tolist(), psd.values.tolist()))
    print(f"amplitude = {amp.amplitude:.6g} m")
    print(f"delta_F = {dF:.6g} N")
    print(f"peak_to_floor = {analysis.peak_to_floor(psd, osc.f0):.6g}")
    print(f"wrote {path}")
    return 0


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="nvforce",
        description="Spin-force simulation pipeline for a levitated "
                    "NV-diamond oscillator")
    p.add_argument("--config", default=None, help="YAML config file "
                   "(built-in defaults when omitted)")
    p.add_argument("--out-dir", default=".", help="output directory")
    p.add_argument("--seed", type=int, default=None, help="override RNG seed")
    p.add_argument("--threads", type=int, default=1,
                   help="worker threads for sweep points")
    sub = p.add_subparsers(dest="command", required=True)

    for name in _SCENARIO_RUNNERS:
        sub.add_parser(name, help=f"run the {name} scenario")

    f = sub.add_parser("field", help="tabulate the on-axis field of a preset")
    f.add_argument("--magnet", default="small")
    f.add_argument("--z-min", type=float, default=0.5, help="mm above pole face")
    f.add_argument("--z-max", type=float, default=10.0, help="mm above pole face")
    f.add_argument("--n", type=int, default=96)

    s = sub.add_parser("spin", help="steady-state populations at one field point")
    s.add_argument("--field", type=float, default=0.63, help="B_z in T")
    s.add_argument("--intensity", type=float, default=63.7, help="mW/mm^2")
    s.add_argument("--temperature", type=float, default=300.0)

    fo = sub.add_parser("force", help="ensemble force at one operating point")
    fo.add_argument("--magnet", default="small")
    fo.add_argument("--gap", type=float, default=0.5, help="mm")
    fo.add_argument("--power", type=float, default=50.0, help="mW")
    fo.add_argument("--duty", type=float, default=0.48)

    si = sub.add_parser("simulate", help="Langevin simulation of the oscillator")
    si.add_argument("--delta-f", type=float, default=5.0, help="drive force, nN")
    si.add_argument("--duty", type=float, default=0.48)
    si.add_argument("--duration", type=float, default=300.0, help="s")
    si.add_argument("--no-noise", action="store_true")

    an = sub.add_parser("analyze", help="PSD pipeline on a timeseries CSV")
    an.add_argument("input", help="two-column t,z CSV")
    an.add_argument("--duty", type=float, default=0.48)
    an.add_argument("--segment-length", type=float, default=30.0,
                    help="PSD segment, s")
    an.add_argument("--band-halfwidth", type=float, default=None,
                    help="peak half-width, Hz (default 5 resolution bandwidths)")
    an.add_argument("--window", default="hann")
    an.add_argument("--mass", type=float, default=None, help="kg")
    an.add_argument("--f0", type=float, default=None, help="Hz")
    an.add_argument("--q", type=float, default=None)
    return p


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    handlers = {"field": _cmd_field, "spin": _cmd_spin, "force": _cmd_force,
                "simulate": _cmd_simulate, "analyze": _cmd_analyze}
    handler = handlers.get(args.command, _cmd_scenario)
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
