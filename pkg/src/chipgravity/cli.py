"""Command-line front end: one configured run per invocation, CSV and JSON artifacts out."""

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .config import (EXPERIMENTS, build_array, build_circuit, build_front, build_packet, build_rabi,
                     build_simulation, load_config)
from .constants import CODATA_VERSION, HBAR, CONSTANTS
from .errors import ConfigurationError, ParameterError

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 1, 2


def _fmt(x):
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.17g" % x


def write_csv(path, header, rows, config_hash, int_columns=()):
    """Write rows with a provenance comment; floats use 17 significant digits."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# config_sha256={config_hash}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(str(int(v)) if i in int_columns else _fmt(float(v)) for i, v in enumerate(row)))
            fh.write("\n")


def _invariant(value, limit, ok):
    return {"value": float(value), "limit": float(limit), "pass": bool(ok)}


def _complex(z):
    return [float(np.real(z)), float(np.imag(z))]


# --- experiments ------------------------------------------------------------

def run_dispersion(cfg, out):
    from .circuit import dispersion_omega, lattice_group_velocity, lattice_omega
    params = build_array(cfg)
    sim = build_simulation(cfg)
    d = cfg.section("dispersion")
    bias = d["flux_bias"]
    r = params.capacitance_ratio if sim.include_junction_capacitance else 0.0
    k = np.linspace(0.0, math.pi, d["k_points"])
    w = lattice_omega(k, bias, r) / params.time_unit
    vg = lattice_group_velocity(k, bias, r) * params.cell_length / params.time_unit
    continuum = dispersion_omega(k / params.cell_length, params) if bias == 0 else np.full_like(k, np.nan)
    write_csv(os.path.join(out, "dispersion.csv"), ("k", "omega", "group_velocity", "omega_continuum"),
              np.column_stack([k / params.cell_length, w, vg, continuum]), cfg.sha256)
    monotone = bool(np.all(np.diff(w) > 0))
    return ({"band_top_rad_s": float(w[-1]), "cutoff_frequency_rad_s": params.cutoff_frequency},
            {"omega_monotone": _invariant(float(np.min(np.diff(w))), 0.0, monotone)})


def run_hawking(cfg, out):
    from .circuit import hawking_estimate, horizon_temperature, phase_speed
    params = build_array(cfg)
    results = {"hawking_temperature_K": hawking_estimate(params)}
    if cfg.has("front"):
        front = build_front(cfg)
        results["phase_speed_ratio_behind"] = float(phase_speed(front.amplitude + front.floor, params)[1])
        results["front_horizon_temperature_K"] = horizon_temperature(front, params, 0.0)
    return results, {}


def run_horizon(cfg, out):
    from .circuit import effective_metric_at
    from .lattice import LatticeState, evolve_with_front
    params = build_array(cfg)
    front = build_front(cfg)
    sim = build_simulation(cfg, params)
    h = cfg.section("horizon")
    stride = max(1, h["steps"] // max(1, h["samples"] - 1))
    traj = evolve_with_front(LatticeState.zeros(params.num_cells), params, front, sim,
                             h["steps"] * sim.dt, stride=stride)
    t, x = traj.horizon_times, traj.horizon_positions
    ok = np.isfinite(x)
    if ok.sum() < 2:
        raise ParameterError("the horizon left the lattice or never formed")
    slope = float(np.polyfit(t[ok], x[ok], 1)[0])
    gxx = max(abs(effective_metric_at(xi, front, None, t=ti).g_xx) for ti, xi in zip(t[ok], x[ok]))
    write_csv(os.path.join(out, "horizon.csv"), ("t", "x_h"),
              np.column_stack([t[ok] * params.time_unit, x[ok] * params.cell_length]), cfg.sha256)
    rel = abs(slope / front.front_speed - 1)
    return ({"horizon_speed_c0": slope, "samples": int(ok.sum())},
            {"horizon_speed": _invariant(rel, 5e-3, rel < 5e-3), "g_xx_at_horizon": _invariant(gxx, 1e-12, gxx < 1e-12)})


def _lattice_setup(cfg, params):
    from .circuit import FluxProfile
    lat = cfg.section("lattice")
    if cfg.has("front"):
        profile = build_front(cfg)
        return profile, profile.floor
    bias = lat["flux_bias"]
    return (FluxProfile(0.0, 0.0, floor=bias) if bias else None), bias


def _run_standing_mode(cfg, out, params, sim, profile, bias):
    from .lattice import (LatticeModel, shadow_energy, standing_mode, standing_mode_frequency,
                          track_standing_mode)
    lat = cfg.section("lattice")
    j = lat["standing_mode"]
    model = LatticeModel(params, profile, sim)
    state = standing_mode(j, lat["mode_amplitude"], params)
    expected = standing_mode_frequency(j, params, sim, bias)
    s0 = shadow_energy(state, model)
    track = track_standing_mode(model, state, j, lat["mode_periods"], expected=expected)
    write_csv(os.path.join(out, "mode.csv"), ("t", "q", "p"),
              np.column_stack([track.times * params.time_unit, track.displacement,
                               track.momentum * params.momentum_unit]), cfg.sha256)
    rel = abs(track.frequency / expected - 1)
    results = {"standing_mode": j, "frequency_rad_s": track.frequency / params.time_unit,
               "dispersion_frequency_rad_s": expected / params.time_unit, "frequency_error": rel,
               "periods": lat["mode_periods"], "steps": int(round(track.final.t / sim.dt))}
    inv = {"mode_frequency": _invariant(rel, 1e-3, rel < 1e-3)}
    if sim.mode == "harmonic":
        drift = abs(shadow_energy(track.final, model) - s0) / abs(s0)
        results["shadow_energy_drift"] = drift
        inv["shadow_energy_drift"] = _invariant(drift, 1e-8, drift < 1e-8)
    return results, inv


def run_lattice(cfg, out):
    from dataclasses import replace

    from .lattice import LatticeModel, init_wavepacket, node_observables, shadow_energy, total_energy_lattice
    params = build_array(cfg)
    sim = build_simulation(cfg, params)
    lat = cfg.section("lattice")
    profile, bias = _lattice_setup(cfg, params)
    if lat["standing_mode"] > 0:
        return _run_standing_mode(cfg, out, params, sim, profile, bias)
    state = init_wavepacket(build_packet(cfg), params, sim, bias=bias)
    start = state
    model = LatticeModel(params, profile, sim)
    e0, s0 = total_energy_lattice(state, model), shadow_energy(state, model)
    rows = []
    stride = max(1, cfg.snapshot_stride)
    done = 0
    n = np.arange(params.num_cells)

    def snap(st):
        obs = node_observables(st, params, profile, sim)
        ts = np.full(n.size, st.t * params.time_unit)
        rows.append(np.column_stack([ts, n, st.phi, st.p * params.momentum_unit, obs.voltage, obs.current]))

    snap(state)
    while done < lat["steps"]:
        chunk = min(stride, lat["steps"] - done)
        state = model.run(state, chunk)
        done += chunk
        snap(state)
    write_csv(os.path.join(out, "snapshots.csv"), ("t", "n", "phi", "p", "V", "I"), np.vstack(rows), cfg.sha256,
              int_columns=(1,))
    e1, s1 = total_energy_lattice(state, model), shadow_energy(state, model)
    static = profile is None or profile.front_speed == 0
    lossless = sim.boundary != "sponge"
    drift = abs(s1 - s0) / abs(s0) if s0 else 0.0
    inv = {}
    results = {"energy_initial": e0 * params.energy_unit, "energy_final": e1 * params.energy_unit,
               "physical_energy_drift": abs(e1 - e0) / abs(e0) if e0 else 0.0, "steps": lat["steps"]}
    if sim.mode == "harmonic":
        results["shadow_energy_drift"] = drift
        if static and lossless:
            inv["shadow_energy_drift"] = _invariant(drift, 1e-8, drift < 1e-8)
    if lat["compare_cosine"] and sim.mode == "harmonic":
        other = LatticeModel(params, profile, replace(sim, mode="full_cosine")).run(start, lat["steps"])
        diff = float(np.max(np.abs(other.phi - state.phi)) / np.max(np.abs(state.phi)))
        results["cosine_difference"] = diff
        inv["harmonic_matches_cosine"] = _invariant(diff, 1e-4, diff < 1e-4)
    return results, inv


def _bogoliubov_matrices(cfg, out, params, front, sim, steps):
    from .bogoliubov import bogoliubov_matrices
    res = bogoliubov_matrices(params, front, sim, steps * sim.dt)
    write_csv(os.path.join(out, "modes.csv"), ("omega", "beta_sq", "norm_violation"),
              np.column_stack([res.omega, res.beta_sq, res.norm_violation]), cfg.sha256)
    beta_max = float(np.max(np.abs(res.beta)))
    results = {"beta_max": beta_max, "beta_sq_total": float(np.sum(res.beta_sq)),
               "norm_violation_max": res.norm_violation_max, "modes": int(res.omega.size),
               "duration_s": steps * sim.dt * params.time_unit}
    inv = {"norm": _invariant(res.norm_violation_max, 1e-6, res.norm_violation_max < 1e-6)}
    if front.front_speed == 0 or front.amplitude == 0:
        inv["static_no_pairs"] = _invariant(beta_max, 1e-8, beta_max < 1e-8)
    return results, inv


def run_bogoliubov(cfg, out, jobs):
    from .bogoliubov import bogoliubov_spectrum
    params = build_array(cfg)
    front = build_front(cfg)
    sim = build_simulation(cfg)
    b = cfg.section("bogoliubov")
    if b["method"] == "matrices":
        return _bogoliubov_matrices(cfg, out, params, front, sim, b["steps"])
    grid = np.geomspace(b["grid_min"], b["grid_max"], b["modes"])
    res = bogoliubov_spectrum(params, front, sim, grid, jobs=jobs, conversion=b["conversion"])
    ratio = np.asarray(res.diagnostics["thermal_ratio"])
    write_csv(os.path.join(out, "spectrum.csv"),
              ("omega", "omega_lab", "k", "beta_sq", "norm_violation", "thermal_ratio"),
              np.column_stack([res.omega, res.omega_lab, res.wavenumber / params.cell_length, res.beta_sq,
                               res.norm_violation, ratio]), cfg.sha256)
    t_ratio = res.fitted_temperature / res.hawking_temperature
    results = res.to_json()
    results.update({"hawking_temperature_K": res.hawking_temperature, "temperature_ratio": t_ratio,
                    "include_junction_capacitance": sim.include_junction_capacitance})
    return results, {
        "norm": _invariant(res.norm_violation_max, 1e-6, res.norm_violation_max < 1e-6),
        "temperature_within_factor_2": _invariant(t_ratio, 2.0, 0.5 <= t_ratio <= 2.0),
    }


def _derived(cfg):
    derived = build_circuit(cfg)
    if derived is None:
        return None, {}
    circuit, spec, g, gm = derived
    return derived, {
        "charging_energy_J": circuit.charging_energy,
        "transmon_gap_J": spec.qubit_gap,
        "transmon_gap_GHz": spec.qubit_gap / (2 * math.pi * HBAR) / 1e9,
        "transmon_gap_cutoff_shift": spec.cutoff_shift,
        "charge_matrix_element": _complex(spec.charge_matrix_element),
        "coupling_g_rad_s": _complex(g),
        "coupling_g_over_2pi_GHz": abs(g) / (2 * math.pi) / 1e9,
        "coupling_gm_rad_s": _complex(gm),
        "total_capacitance_F": circuit.total_capacitance,
    }


def _hygiene_invariants(h, shift=None):
    inv = {
        "trace_drift": _invariant(h["trace_drift"], 1e-8, h["trace_drift"] < 1e-8),
        "hermiticity": _invariant(h["hermiticity"], 1e-10, h["hermiticity"] < 1e-10),
        "min_eigenvalue": _invariant(h["min_eigenvalue"], -1e-8, h["min_eigenvalue"] >= -1e-8),
    }
    if shift is not None:
        inv["fock_truncation_shift"] = _invariant(shift, 1e-2, shift < 1e-2)
    return inv


def run_unruh_evolve(cfg, out):
    from .unruh import lindblad_evolve
    derived, constants = _derived(cfg)
    p = build_rabi(cfg, derived)
    e = cfg.section("evolve")
    t_final = e["t_final"] * p.cavity_frequency
    trace = lindblad_evolve(p, t_final, e["stride"], segments=e["segments"])
    rows = trace.rows()
    rows[:, 0] /= p.cavity_frequency
    write_csv(os.path.join(out, "trace.csv"), trace.HEADER, rows, cfg.sha256)
    shift = None
    results = {"final_mean_photon": float(trace.mean_photon[-1]), "samples": int(trace.times.size)}
    if e["compare_fock"]:
        other = lindblad_evolve(p.with_(n_fock=e["compare_fock"]), t_final, e["stride"], segments=e["segments"])
        shift = abs(other.mean_photon[-1] - trace.mean_photon[-1]) / max(abs(trace.mean_photon[-1]), 1e-300)
        results["fock_shift"] = shift
    results.update(trace.hygiene())
    return results, _hygiene_invariants(trace.hygiene(), shift), constants, p


def run_unruh_steady(cfg, out):
    from .unruh import steady_state_observables
    derived, constants = _derived(cfg)
    p = build_rabi(cfg, derived)
    s = cfg.section("steady")
    main = steady_state_observables(p, segments=s["segments"], tol=s["tolerance"])
    rows = np.column_stack([main.period_times / p.cavity_frequency, main.period_photon, main.period_a_squared.real,
                            main.period_a_squared.imag, main.period_excitation, main.period_log_negativity])
    write_csv(os.path.join(out, "period.csv"),
              ("t", "mean_photon", "re_a2", "im_a2", "qubit_excitation", "log_negativity"), rows, cfg.sha256)
    results = main.summary()
    inv = {}
    off = {}
    for sign in (-1, 1):
        w = p.drive_frequency + sign * s["detuning"]
        o = steady_state_observables(p.with_(drive_frequency=w), segments=s["segments"], tol=s["tolerance"])
        off["minus" if sign < 0 else "plus"] = o.summary()
    results["detuned"] = off
    above = all(main.mean_photon > o["mean_photon"] for o in off.values())
    en_above = all(main.e_n_max > o["e_n_max"] for o in off.values())
    inv["photon_exceeds_detuned"] = _invariant(main.mean_photon, max(o["mean_photon"] for o in off.values()), above)
    inv["entanglement_exceeds_detuned"] = _invariant(main.e_n_max, max(o["e_n_max"] for o in off.values()), en_above)
    inv["peaks_in_phase"] = _invariant(abs(main.peak_lag), 0.05, abs(main.peak_lag) <= 0.05)
    shift = None
    if s["compare_fock"]:
        big = steady_state_observables(p.with_(n_fock=s["compare_fock"]), segments=s["segments"], tol=s["tolerance"])
        shift = abs(big.mean_photon - main.mean_photon) / main.mean_photon
        results["fock_shift"] = shift
    inv.update(_hygiene_invariants(main.hygiene, shift))
    return results, inv, constants, p


def run_unruh_sweep(cfg, out, jobs):
    from .unruh import resonance_sweep
    derived, constants = _derived(cfg)
    p = build_rabi(cfg, derived)
    s = cfg.section("sweep")
    count = int(round((s["grid_max"] - s["grid_min"]) / s["grid_step"])) + 1
    grid = np.linspace(s["grid_min"], s["grid_max"], count)
    sweep = resonance_sweep(p, grid, refine=s["refine"], jobs=jobs, segments=s["segments"])
    write_csv(os.path.join(out, "sweep.csv"), sweep.HEADER, sweep.rows(), cfg.sha256)
    results = {"argmax_omega_c": sweep.argmax, "points": int(sweep.omega_m.size),
               "coarse_points": sweep.coarse_points, "peak_mean_photon": float(sweep.mean_photon.max())}
    results.update(sweep.hygiene)
    ordered = bool(np.all(np.diff(sweep.omega_m) > 0))
    inv = {"grid_ordered": _invariant(float(ordered), 1.0, ordered)}
    inv.update(_hygiene_invariants(sweep.hygiene))
    return results, inv, constants, p


def run(cfg, out, jobs=1):
    """Dispatch one experiment; returns the summary dictionary (without provenance)."""
    exp = cfg.experiment
    constants, rabi = {}, None
    if exp == "dispersion":
        results, inv = run_dispersion(cfg, out)
    elif exp == "hawking":
        results, inv = run_hawking(cfg, out)
    elif exp == "horizon":
        results, inv = run_horizon(cfg, out)
    elif exp == "lattice":
        results, inv = run_lattice(cfg, out)
    elif exp == "bogoliubov":
        results, inv = run_bogoliubov(cfg, out, jobs)
    elif exp == "unruh-evolve":
        results, inv, constants, rabi = run_unruh_evolve(cfg, out)
    elif exp == "unruh-steady":
        results, inv, constants, rabi = run_unruh_steady(cfg, out)
    else:
        results, inv, constants, rabi = run_unruh_sweep(cfg, out, jobs)
    summary = {"results": results, "invariants": inv}
    if cfg.has("array"):
        params = build_array(cfg)
        summary["derived"] = {
            "inductance_H": params.inductance, "time_unit_s": params.time_unit,
            "energy_unit_J": params.energy_unit, "cutoff_frequency_rad_s": params.cutoff_frequency,
            "impedance_ohm": params.impedance, "capacitance_ratio": params.capacitance_ratio,
        }
    if rabi is not None:
        summary["derived"] = dict(constants, **rabi.si_summary())
    return summary


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o).__name__)


def build_parser():
    parser = argparse.ArgumentParser(prog="chipgravity", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="TOML run configuration")
        sp.add_argument("--out", help="output directory (default: output_dir from the config)")
        sp.add_argument("--jobs", type=int, default=1, help="worker processes for bogoliubov and unruh-sweep")
        sp.add_argument("--verify", action="store_true",
                        help="check the invariant suite and exit 2 if any check fails")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if cfg.experiment != args.experiment:
            raise ConfigurationError(f"config is for {cfg.experiment!r}, not {args.experiment!r}", "experiment")
    except (OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ArithmeticError, RuntimeError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    out = args.out or cfg.output_dir
    os.makedirs(out, exist_ok=True)
    start = time.perf_counter()
    try:
        summary = run(cfg, out, max(1, args.jobs))
    except (ValueError, ConfigurationError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ArithmeticError, RuntimeError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    summary = {
        "experiment": cfg.experiment,
        "config_sha256": cfg.sha256,
        "config": cfg.text,
        "inputs": cfg.sections,
        **summary,
        "wall_time_s": time.perf_counter() - start,
        "constants": dict(CONSTANTS.table(), source=CODATA_VERSION, hbar=HBAR),
        "version": __version__,
    }
    with open(os.path.join(out, "summary.json"), "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=False, default=_json_default)
        fh.write("\n")
    failed = [k for k, v in summary["invariants"].items() if not v["pass"]]
    if failed:
        print("invariant checks failed: " + ", ".join(failed), file=sys.stderr)
        if args.verify:
            return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
