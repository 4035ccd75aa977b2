"""Strict TOML run configuration.

Physical keys carry SI units and have no defaults; only numerical controls
do.  Every section and key is declared in ``SCHEMA``; anything else is
rejected with the offending key named in the message.
"""

import hashlib
import sys
from dataclasses import dataclass, field
from typing import Any, Dict

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .errors import ConfigurationError

EXPERIMENTS = ("dispersion", "horizon", "hawking", "lattice", "bogoliubov",
               "unruh-evolve", "unruh-steady", "unruh-sweep")

REQUIRED = object()


@dataclass(frozen=True)
class Key:
    kind: type
    unit: str
    default: Any = REQUIRED
    doc: str = ""


def _k(kind, unit, default=REQUIRED, doc=""):
    return Key(kind, unit, default, doc)


SCHEMA: Dict[str, Dict[str, Key]] = {
    "array": {
        "critical_current": _k(float, "A", doc="per-junction critical current I_c"),
        "ground_capacitance": _k(float, "F", doc="node-to-ground capacitance C_0"),
        "junction_capacitance": _k(float, "F", doc="per-junction capacitance C_J"),
        "cell_length": _k(float, "m", doc="lattice spacing a"),
        "num_cells": _k(int, "1", 4096, "number of nodes N (numerical control)"),
    },
    "front": {
        "amplitude": _k(float, "flux quanta", doc="bias step height, fraction of Phi0 in [0, 0.5)"),
        "front_speed": _k(float, "c0", doc="front speed as a fraction of the zero-bias wave speed"),
        "ramp_width": _k(float, "cells", doc="tanh ramp width"),
        "floor": _k(float, "flux quanta", 0.0, "bias ahead of the front"),
        "front_position": _k(float, "cells", 0.0, "front centre at t = 0"),
    },
    "simulation": {
        "mode": _k(str, "-", "full_cosine", "full_cosine or harmonic"),
        "dt": _k(float, "sqrt(L0 C0)", 0.02, "leapfrog step"),
        "boundary": _k(str, "-", "sponge", "fixed, periodic or sponge"),
        "sponge_width": _k(int, "cells", 200),
        "sponge_strength": _k(float, "1/sqrt(L0 C0)", 0.05),
        "include_junction_capacitance": _k(bool, "-", True),
    },
    "dispersion": {
        "flux_bias": _k(float, "flux quanta", doc="uniform bias"),
        "k_points": _k(int, "1", 257, "points on [0, pi/a]"),
    },
    "horizon": {
        "steps": _k(int, "1", 100000),
        "samples": _k(int, "1", 101, "horizon positions recorded"),
    },
    "lattice": {
        "steps": _k(int, "1", 10000),
        "flux_bias": _k(float, "flux quanta", REQUIRED, "uniform bias when [front] is absent"),
        "standing_mode": _k(int, "1", 0, "index j > 0 starts from a fixed-end sine mode instead of [packet]"),
        "mode_amplitude": _k(float, "rad", 1e-3, "standing-mode amplitude"),
        "mode_periods": _k(float, "periods", 100.0, "standing-mode run length, replaces steps"),
        "compare_cosine": _k(bool, "-", False, "rerun a harmonic run with the full cosine potential"),
    },
    "packet": {
        "center_k": _k(float, "1/a"),
        "width_x": _k(float, "cells"),
        "amplitude": _k(float, "rad"),
        "center_x": _k(float, "cells"),
        "direction": _k(str, "-", "right"),
    },
    "bogoliubov": {
        "modes": _k(int, "1", 64),
        "grid_min": _k(float, "kappa", 0.2, "lowest comoving frequency"),
        "grid_max": _k(float, "kappa", 1.2, "highest comoving frequency"),
        "conversion": _k(float, "1/kappa", 6.0, "extra backward time after the packet tail meets the horizon"),
        "method": _k(str, "-", "spectrum", "spectrum (stationary front packets) or matrices (complete basis)"),
        "steps": _k(int, "1", 10000, "leapfrog steps of a matrices run"),
    },
    "circuit": {
        "cavity_frequency": _k(float, "rad/s"),
        "cavity_capacitance": _k(float, "F"),
        "cavity_impedance": _k(float, "ohm"),
        "fbar_capacitance": _k(float, "F"),
        "fbar_thickness": _k(float, "m"),
        "drive_amplitude": _k(float, "m"),
        "drive_frequency": _k(float, "rad/s"),
        "junction_capacitance": _k(float, "F"),
        "josephson_energy": _k(float, "J"),
        "charge_cutoff": _k(int, "1", 30),
    },
    "rabi": {
        "cavity_frequency": _k(float, "rad/s", None, "taken from [circuit] when omitted"),
        "qubit_gap": _k(float, "J", None, "taken from the transmon levels when omitted"),
        "coupling": _k(float, "rad/s", None, "|g|; taken from [circuit] when omitted"),
        "coupling_phase": _k(float, "rad", 0.0, "phase applied to both g and g_m"),
        "modulation": _k(float, "rad/s", None, "|g_m|; taken from [circuit] when omitted"),
        "drive_frequency": _k(float, "rad/s", None, "taken from [circuit] when omitted"),
        "cavity_decay": _k(float, "1/s"),
        "qubit_decay": _k(float, "1/s"),
        "n_fock": _k(int, "1", 8),
    },
    "evolve": {
        "t_final": _k(float, "s"),
        "stride": _k(int, "segments", 64, "record every this many segments"),
        "segments": _k(int, "1", 64, "propagator segments per drive period"),
        "compare_fock": _k(int, "1", 0, "also run at this truncation and report the photon-number shift"),
    },
    "steady": {
        "segments": _k(int, "1", 64),
        "tolerance": _k(float, "1", 1e-3, "relative change between detection windows"),
        "compare_fock": _k(int, "1", 16),
        "detuning": _k(float, "omega_c", 0.01, "offset of the two comparison drives"),
    },
    "sweep": {
        "grid_min": _k(float, "omega_c", doc="lowest drive frequency, multiple of the cavity frequency"),
        "grid_max": _k(float, "omega_c"),
        "grid_step": _k(float, "omega_c", 1e-3),
        "refine": _k(bool, "-", True),
        "segments": _k(int, "1", 64),
    },
}

TOP_LEVEL = {
    "experiment": _k(str, "-"),
    "output_dir": _k(str, "-", "out"),
    "snapshot_stride": _k(int, "steps", 100),
    "seed": _k(int, "-", 0, "reserved; every run is deterministic"),
}

SECTIONS = {
    "dispersion": ({"array", "dispersion"}, {"simulation"}),
    "horizon": ({"array", "front"}, {"simulation", "horizon"}),
    "hawking": ({"array"}, {"front"}),
    "lattice": ({"array"}, {"simulation", "lattice", "front", "packet"}),
    "bogoliubov": ({"array", "front"}, {"simulation", "bogoliubov"}),
    "unruh-evolve": ({"rabi", "evolve"}, {"circuit"}),
    "unruh-steady": ({"rabi"}, {"circuit", "steady"}),
    "unruh-sweep": ({"rabi", "sweep"}, {"circuit"}),
}


@dataclass
class RunConfig:
    experiment: str
    sections: Dict[str, Dict[str, Any]]
    output_dir: str
    snapshot_stride: int
    seed: int
    text: str = field(repr=False, default="")

    @property
    def sha256(self) -> str:
        return hashlib.sha256(self.text.encode()).hexdigest()

    def section(self, name: str) -> Dict[str, Any]:
        """Values of a section with defaults filled in (empty sections if absent)."""
        given = self.sections.get(name, {})
        out = {}
        for key, spec in SCHEMA[name].items():
            if key in given:
                out[key] = given[key]
            elif spec.default is not REQUIRED:
                out[key] = spec.default
        return out

    def has(self, name: str) -> bool:
        return name in self.sections


def _coerce(where, value, spec: Key):
    if spec.kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigurationError(f"expected a number in {spec.unit}, got {value!r}", where)
        return float(value)
    if spec.kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigurationError(f"expected an integer, got {value!r}", where)
        return value
    if not isinstance(value, spec.kind):
        raise ConfigurationError(f"expected {spec.kind.__name__}, got {value!r}", where)
    return value


def parse_config(text: str) -> RunConfig:
    """Parse a TOML document, check it against the schema and pre-build the module objects."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as err:
        raise ConfigurationError(f"TOML parse error: {err}", "<document>") from None
    top = {}
    sections = {}
    for key, value in doc.items():
        if isinstance(value, dict):
            if key not in SCHEMA:
                raise ConfigurationError(f"unknown section; expected one of {sorted(SCHEMA)}", f"[{key}]")
            checked = {}
            for sub, v in value.items():
                if sub not in SCHEMA[key]:
                    raise ConfigurationError(f"unknown key; section accepts {sorted(SCHEMA[key])}", f"{key}.{sub}")
                checked[sub] = _coerce(f"{key}.{sub}", v, SCHEMA[key][sub])
            sections[key] = checked
        elif key in TOP_LEVEL:
            top[key] = _coerce(key, value, TOP_LEVEL[key])
        else:
            raise ConfigurationError("unknown top-level key", key)
    if "experiment" not in top:
        raise ConfigurationError(f"missing; choose one of {list(EXPERIMENTS)}", "experiment")
    exp = top["experiment"]
    if exp not in EXPERIMENTS:
        raise ConfigurationError(f"{exp!r} is not one of {list(EXPERIMENTS)}", "experiment")
    required, optional = SECTIONS[exp]
    for name in sorted(required - set(sections)):
        raise ConfigurationError(f"section required by experiment {exp!r}", f"[{name}]")
    for name in sorted(set(sections) - required - optional):
        raise ConfigurationError(f"section not used by experiment {exp!r}", f"[{name}]")
    for name, given in sections.items():
        for key, spec in SCHEMA[name].items():
            if spec.default is REQUIRED and key not in given:
                if name == "lattice" and key == "flux_bias" and "front" in sections:
                    continue
                raise ConfigurationError(f"required ({spec.unit})", f"{name}.{key}")
    if exp == "lattice" and "front" not in sections and "flux_bias" not in sections.get("lattice", {}):
        raise ConfigurationError("give [front] or a uniform lattice.flux_bias", "lattice.flux_bias")
    if exp == "lattice":
        mode = sections.get("lattice", {}).get("standing_mode", 0)
        if mode < 0:
            raise ConfigurationError("must be 0 (packet run) or a positive mode index", "lattice.standing_mode")
        if mode == 0 and "packet" not in sections:
            raise ConfigurationError("section required unless lattice.standing_mode is set", "[packet]")
        if mode > 0 and "front" in sections:
            raise ConfigurationError("standing modes need a uniform bias, not a front", "[front]")
    if exp.startswith("unruh") and "circuit" not in sections:
        for key in ("cavity_frequency", "qubit_gap", "coupling", "modulation", "drive_frequency"):
            if key == "drive_frequency" and exp == "unruh-sweep":
                continue
            if key not in sections["rabi"]:
                raise ConfigurationError("required when no [circuit] section is given", f"rabi.{key}")
    cfg = RunConfig(exp, sections, top.get("output_dir", TOP_LEVEL["output_dir"].default),
                    top.get("snapshot_stride", TOP_LEVEL["snapshot_stride"].default),
                    top.get("seed", 0), text)
    return validate(cfg)


def load_config(path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def schema_table() -> str:
    """Plain-text listing of every key with its unit and default."""
    lines = []
    for key, spec in TOP_LEVEL.items():
        lines.append(_row(key, spec))
    for name, keys in SCHEMA.items():
        lines.append(f"[{name}]")
        for key, spec in keys.items():
            lines.append("  " + _row(key, spec))
    return "\n".join(lines)


def _row(key, spec):
    default = "required" if spec.default is REQUIRED else f"default {spec.default!r}"
    doc = f"  {spec.doc}" if spec.doc else ""
    return f"{key} ({spec.unit}; {default}){doc}"


# --- module objects -------------------------------------------------------

def _wrap(section, build, *args, **kwargs):
    """Run a constructor, re-raising validation failures against the config section."""
    try:
        return build(*args, **kwargs)
    except ConfigurationError as err:
        raise ConfigurationError(err.message, f"{section}.{err.key}") from None
    except ValueError as err:
        raise ConfigurationError(str(err), f"[{section}]") from None


def build_array(cfg: RunConfig):
    from .circuit import SquidArrayParams
    return _wrap("array", SquidArrayParams, **cfg.section("array"))


def build_front(cfg: RunConfig):
    from .circuit import FluxProfile
    return _wrap("front", FluxProfile, **cfg.section("front"))


def build_simulation(cfg: RunConfig, params=None):
    from .lattice import SimConfig
    sim = _wrap("simulation", SimConfig, **cfg.section("simulation"))
    if params is not None:
        _wrap("simulation", sim.check_lattice, params)
    return sim


def build_packet(cfg: RunConfig):
    from .lattice import WavePacketSpec
    return _wrap("packet", WavePacketSpec, **cfg.section("packet"))


def build_circuit(cfg: RunConfig):
    """(UnruhCircuitParams, TransmonSpec, g, g_m) or None without a [circuit] section."""
    if not cfg.has("circuit"):
        return None
    from .unruh import UnruhCircuitParams, coupling_g, coupling_gm
    values = cfg.section("circuit")
    cutoff = values.pop("charge_cutoff")
    circuit = _wrap("circuit", UnruhCircuitParams, **values)
    spec = _wrap("circuit", circuit.transmon, cutoff)
    g = coupling_g(circuit, spec)
    return circuit, spec, g, coupling_gm(circuit, g)


def build_rabi(cfg: RunConfig, derived=None, drive_frequency=None):
    """RabiParams from [rabi], filling unset keys from the circuit-derived constants."""
    import cmath

    from .unruh import RabiParams
    r = cfg.section("rabi")
    if derived is not None:
        circuit, spec, g, gm = derived
        fill = {"cavity_frequency": circuit.cavity_frequency, "qubit_gap": spec.qubit_gap,
                "coupling": abs(g), "modulation": abs(gm), "drive_frequency": circuit.drive_frequency}
        for key, value in fill.items():
            if r.get(key) is None:
                r[key] = value
    if drive_frequency is not None:
        r["drive_frequency"] = drive_frequency
    if r.get("drive_frequency") is None:
        r["drive_frequency"] = r["cavity_frequency"] + r["qubit_gap"] / _hbar()
    phase = cmath.exp(1j * r["coupling_phase"])
    return _wrap("rabi", RabiParams.from_si, r["cavity_frequency"], r["qubit_gap"], r["coupling"] * phase,
                 r["modulation"] * phase, r["drive_frequency"], r["cavity_decay"], r["qubit_decay"],
                 r["n_fock"])


def _hbar():
    from .constants import HBAR
    return HBAR


def validate(cfg: RunConfig) -> RunConfig:
    """Construct every module object the experiment needs so invariant violations surface early."""
    if cfg.has("array"):
        params = build_array(cfg)
        build_simulation(cfg, params if cfg.experiment in ("lattice", "horizon") else None)
    if cfg.has("front"):
        build_front(cfg)
    if cfg.has("packet"):
        build_packet(cfg)
    if cfg.experiment == "lattice" and cfg.section("lattice")["standing_mode"] > 0:
        if build_simulation(cfg).boundary != "fixed":
            raise ConfigurationError("standing modes need fixed boundaries", "simulation.boundary")
    if cfg.experiment.startswith("unruh"):
        build_rabi(cfg, build_circuit(cfg))
    if cfg.experiment == "bogoliubov" and cfg.section("bogoliubov")["method"] not in ("spectrum", "matrices"):
        raise ConfigurationError("must be 'spectrum' or 'matrices'", "bogoliubov.method")
    if cfg.experiment == "unruh-sweep":
        s = cfg.section("sweep")
        if not 0 < s["grid_min"] < s["grid_max"]:
            raise ConfigurationError("need 0 < grid_min < grid_max", "sweep.grid_max")
        if not 0 < s["grid_step"] <= 1e-3:
            raise ConfigurationError("grid resolution must be in (0, 1e-3] omega_c", "sweep.grid_step")
    return cfg
