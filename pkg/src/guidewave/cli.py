"""Command-line front end: batch runs, CSV artifacts, reproducibility manifest.

Every run writes a JSON manifest containing the fully resolved configuration
(defaults made explicit), the tool version, the sha256 of the input config
text, wall-clock time, and the headline metrics.  Artifacts are deterministic
byte-for-byte for a given config and version; the manifest differs only in
its wall_clock_s field.  A manifest can be replayed with --from-manifest.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .channels import (
    TransferSettings,
    apply_interferometer,
    gaussian_packet,
    measured_velocity_split,
)
from .config import ConfigError, COMMANDS, RunConfig, config_text, parse_config
from .eigensolver import XGrid, solve_transverse, symmetry_decompose
from .geometry import GeometryProfile, adiabaticity_ratio
from .scenarios import DeviceRunSpec, run_interference
from .thermal import SourceSpec, build_ensemble, fringe_analysis, interference_pattern
from .units import PhysicalParams, convert, thermal_energy_natural, units_for


def _fmt(x) -> str:
    return repr(float(x))


def write_csv(path: str, meta: dict, header: list[str], columns: list[np.ndarray]):
    lines = [f"# {k} = {v}" for k, v in meta.items()]
    lines.append(",".join(header))
    for row in zip(*columns):
        lines.append(",".join(_fmt(v) for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _well_potential(x: np.ndarray, d: float, omega_in: float, omega_arm: float):
    freq = omega_arm if d > 0 else omega_in
    return 0.5 * freq**2 * (np.abs(x) - 0.5 * d) ** 2


def _units(cfg: RunConfig):
    phys = cfg.physical
    return units_for(PhysicalParams(
        mass=phys["mass"], omega_in=phys["omega"],
        temperature=phys["temperature"], source_length=phys["source_length"],
        delta_l=phys["delta_l"], device_length=phys["device_length"],
        detection_time=phys["detection_time"]))


def _cmd_eigen(cfg: RunConfig, out_dir: str):
    num, geo = cfg.numerics, cfg.geometry
    grid = XGrid(-num["eigen_x_half"], num["eigen_x_half"], num["eigen_n_x"])
    v = _well_potential(grid.x, geo["d"], 1.0, geo["omega_arm"])
    spec = solve_transverse(v, grid, num["n_levels"], z=0.0)
    write_csv(os.path.join(out_dir, "eigen_states.csv"),
              {"separation": geo["d"], "n_levels": num["n_levels"]},
              ["x"] + [f"chi_{n}" for n in range(len(spec.energies))],
              [grid.x] + [spec.states[n] for n in range(len(spec.energies))])
    metrics = {f"E_{n}": float(e) for n, e in enumerate(spec.energies)}
    metrics["pair_gap_0"] = float(spec.energies[1] - spec.energies[0])
    return metrics, ["eigen_states.csv"]


def _cmd_split(cfg: RunConfig, out_dir: str):
    num, geo = cfg.numerics, cfg.geometry
    grid = XGrid(-num["eigen_x_half"], num["eigen_x_half"], num["eigen_n_x"])
    v = _well_potential(grid.x, geo["d"], 1.0, geo["omega_arm"])
    spec = solve_transverse(v, grid, max(num["n_levels"], 2), z=0.0)
    pair = symmetry_decompose(spec, 0)
    write_csv(os.path.join(out_dir, "split_states.csv"),
              {"separation": geo["d"]},
              ["x", "left", "right"], [grid.x, pair.left, pair.right])
    return {"left_fraction": pair.left_fraction,
            "right_fraction": pair.right_fraction,
            "parity_phase": pair.parity_phase,
            "pair_gap": float(spec.energies[1] - spec.energies[0])}, \
        ["split_states.csv"]


def _device_spec(cfg: RunConfig) -> DeviceRunSpec:
    num, geo = cfg.numerics, cfg.geometry
    return DeviceRunSpec(
        z_split_start=geo["z_split_start"], ramp_length=geo["ramp_length"],
        plateau_length=geo["plateau_length"], d_max=geo["d_max"],
        omega_arm=geo["omega_arm"], k0=num["k0"], sigma_z=num["sigma_z"],
        z0=num["z0"], n_mode=num["n_mode"], n_x=num["n_x"],
        x_half=num["x_half"], n_z=num["n_z"], z_max=num["z_max"],
        dt=num["dt"], z_detect=num["z_detect"])


def _cmd_interfere(cfg: RunConfig, out_dir: str):
    from .tdse import project_modes

    spec = _device_spec(cfg)
    dump = bool(cfg.output["dump_fields"])
    result = run_interference(cfg.numerics["delta_phi"], spec, keep_psi=dump)
    artifacts = []
    if dump:
        c = project_modes(result.psi, result.output_spectrum, 2)
        write_csv(os.path.join(out_dir, "mode_densities.csv"),
                  {"delta_phi": result.delta_phi, "time": result.time_final},
                  ["z", "density_mode0", "density_mode1"],
                  [result.psi.grid.z, np.abs(c[0])**2, np.abs(c[1])**2])
        artifacts.append("mode_densities.csv")
    metrics = {f"population_{n}": float(p)
               for n, p in enumerate(result.populations)}
    metrics.update(norm=result.norm, delta_phi=result.delta_phi,
                   arm_potential=result.u0,
                   adiabaticity_ratio=result.adiabaticity,
                   energy_drift_rel=abs(result.energy_final - result.energy_initial)
                   / abs(result.energy_initial))
    return metrics, artifacts


def _cmd_channels(cfg: RunConfig, out_dir: str):
    num = cfg.numerics
    u = _units(cfg)
    delta_l = convert(cfg.physical["delta_l"], "length", "to", u)
    packet = gaussian_packet(num["k_mean"], num["k_spread"],
                             n_points=num["packet_points"],
                             span=num["packet_span"])
    settings = TransferSettings(phase_kind="path_length", delta_l=delta_l)
    out = apply_interferometer(packet, settings)
    stay, transfer = out.channels
    write_csv(os.path.join(out_dir, "channel_spectra.csv"),
              {"k_mean": num["k_mean"], "delta_l": delta_l},
              ["k_in", "stay_abs2", "transfer_abs2", "k_out_transfer"],
              [stay.k_in, np.abs(stay.amps)**2, np.abs(transfer.amps)**2,
               np.nan_to_num(transfer.k_out)])
    z = np.linspace(0.0, 60.0 * num["k_mean"], 4096)
    dv = measured_velocity_split(out, 10.0, 40.0, z)
    return {"stay_norm": stay.norm(), "transfer_norm": transfer.norm(),
            "reflected_entrance": out.reflected_entrance,
            "reflected_blocked": out.reflected_blocked,
            "velocity_split": dv,
            "delta_l_natural": delta_l}, ["channel_spectra.csv"]


def _cmd_thermal(cfg: RunConfig, out_dir: str):
    num = cfg.numerics
    u = _units(cfg)
    temp = thermal_energy_natural(cfg.physical["temperature"], u)
    box = convert(cfg.physical["source_length"], "length", "to", u)
    delta_l = convert(cfg.physical["delta_l"], "length", "to", u)
    t_det = convert(cfg.physical["detection_time"], "time", "to", u)
    source = SourceSpec(box_length=box, temperature=temp,
                        n_long_max=num["n_long_max"],
                        n_trans_max=num["n_trans_max"],
                        weight_epsilon=num["weight_epsilon"],
                        packet_points=num["packet_points"],
                        packet_span=num["packet_span"])
    ensemble = build_ensemble(source)
    settings = TransferSettings(phase_kind="path_length", delta_l=delta_l)
    z = np.linspace(0.0, num["pattern_z_max"], num["n_pattern"])
    pattern = interference_pattern(ensemble, settings, t_det, z)
    lo, hi = 1.25 * t_det, 4.25 * t_det
    report = fringe_analysis(pattern.total, pattern.z, window=(lo, hi))
    write_csv(os.path.join(out_dir, "thermal_pattern.csv"),
              {"detection_time": t_det, "delta_l": delta_l,
               "length_unit_m": u.length_unit},
              ["z", "z_si", "total", "even", "odd"],
              [pattern.z, pattern.z * u.length_unit, pattern.total,
               pattern.even, pattern.odd])
    return {"period": report.period, "period_fit": report.period_fit,
            "period_si": report.period_si(u.length_unit),
            "contrast": report.contrast, "reflected": pattern.reflected,
            "analysis_window": list(report.window)}, ["thermal_pattern.csv"]


def _cmd_check_adiabatic(cfg: RunConfig, out_dir: str):
    geo, num = cfg.geometry, cfg.numerics
    profile = GeometryProfile(
        z_split_start=geo["z_split_start"],
        z_split_end=geo["z_split_start"] + geo["ramp_length"],
        z_merge_start=geo["z_split_start"] + geo["ramp_length"]
        + geo["plateau_length"],
        z_merge_end=geo["z_split_start"] + 2 * geo["ramp_length"]
        + geo["plateau_length"],
        d_max=geo["d_max"], ramp=geo["ramp"], omega_arm=geo["omega_arm"])
    e_kin = 0.5 * num["k0"] ** 2
    ratio = adiabaticity_ratio(profile, e_kin)
    return {"adiabaticity_ratio": ratio, "e_kin": e_kin,
            "adiabatic": bool(ratio < 0.01)}, []


_HANDLERS = {
    "eigen": _cmd_eigen,
    "split": _cmd_split,
    "interfere": _cmd_interfere,
    "channels": _cmd_channels,
    "thermal": _cmd_thermal,
    "check-adiabatic": _cmd_check_adiabatic,
}


def run(cfg: RunConfig, out_dir: str, config_sha: str) -> dict:
    os.makedirs(out_dir, exist_ok=True)
    t0 = time.perf_counter()
    metrics, artifacts = _HANDLERS[cfg.command](cfg, out_dir)
    manifest = {
        "tool": "guidewave",
        "version": __version__,
        "command": cfg.command,
        "config_sha256": config_sha,
        "resolved_config": cfg.resolved(),
        "defaulted_keys": cfg.defaulted,
        "metrics": metrics,
        "artifacts": artifacts,
        "wall_clock_s": time.perf_counter() - t0,
    }
    path = os.path.join(out_dir, "manifest.json")
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def config_from_manifest(manifest: dict) -> tuple[str, str]:
    """(config text, command) reproducing the recorded run."""
    return config_text(manifest["resolved_config"], manifest["command"]), \
        manifest["command"]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="guidewave",
        description="guided-matter-wave interferometer simulations")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="path to a run configuration file")
    parser.add_argument("--from-manifest",
                        help="replay the run recorded in a manifest.json")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--threads", type=int,
                        help="FFT worker threads (overrides GUIDEWAVE_THREADS)")
    parser.add_argument("--dump-fields", action="store_true",
                        help="also write per-mode density fields")
    args = parser.parse_args(argv)

    if args.threads is not None:
        os.environ["GUIDEWAVE_THREADS"] = str(args.threads)

    try:
        if args.from_manifest:
            with open(args.from_manifest) as fh:
                text, command = config_from_manifest(json.load(fh))
            if command != args.command:
                raise ConfigError(
                    f"manifest records command {command!r}, not {args.command!r}")
        elif args.config:
            with open(args.config) as fh:
                text = fh.read()
        else:
            text = ""
        cfg = parse_config(text, args.command)
        if args.dump_fields:
            cfg.output["dump_fields"] = True
        sha = hashlib.sha256(text.encode()).hexdigest()
        manifest = run(cfg, args.out, sha)
    except (ConfigError, OSError, ValueError) as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)},
                  sys.stderr, indent=2)
        sys.stderr.write("\n")
        return 1
    summary = {k: v for k, v in manifest["metrics"].items()}
    json.dump({"command": cfg.command, "metrics": summary,
               "out": os.path.abspath(args.out)}, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
