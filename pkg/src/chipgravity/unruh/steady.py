"""Long-time periodic state, its observables and the drive-frequency sweep."""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from ..errors import IntegrationAccuracyError, ParameterError
from .entanglement import log_negativity
from .lindblad import (DEFAULT_SEGMENTS, POSITIVITY_TOL, TRACE_FAIL, PeriodPropagator, _initial_vector,
                       expectation_row, geometric_power, unvec)
from .model import RabiParams, hamiltonian_parts, operators

WINDOW_TOL = 1e-3
WARMUP_WINDOWS = 5
MAX_WINDOWS = 60


@dataclass
class SteadyState:
    """Observables of the periodic long-time state.

    ``mean_photon`` is averaged over the last detection window (an integer
    number of drive periods); the ``period_*`` arrays sample one drive
    period of the instantaneous values at the segment starts.
    """

    mean_photon: float
    a_squared_mag: float
    qubit_excitation: float
    e_n_mean: float
    e_n_max: float
    photon_rate: float
    photon_min: float
    photon_max: float
    peak_lag: float
    settle_time: float
    windows: int
    period_times: np.ndarray = field(repr=False)
    period_photon: np.ndarray = field(repr=False)
    period_a_squared: np.ndarray = field(repr=False)
    period_excitation: np.ndarray = field(repr=False)
    period_log_negativity: np.ndarray = field(repr=False)
    hygiene: dict = field(default_factory=dict)

    def summary(self) -> dict:
        keys = ("mean_photon", "a_squared_mag", "qubit_excitation", "e_n_mean", "e_n_max", "photon_rate",
                "photon_min", "photon_max", "peak_lag", "settle_time", "windows")
        out = {k: float(getattr(self, k)) for k in keys}
        out["windows"] = int(self.windows)
        out.update(self.hygiene)
        return out


def _check(v, hygiene):
    rho = unvec(v)
    herm = 0.5 * (rho + rho.conj().T)
    drift = abs(np.trace(rho).real - 1.0)
    low = float(np.linalg.eigvalsh(herm).min())
    hygiene["trace_drift"] = max(hygiene.get("trace_drift", 0.0), drift)
    hygiene["hermiticity"] = max(hygiene.get("hermiticity", 0.0), float(np.max(np.abs(rho - rho.conj().T))))
    hygiene["min_eigenvalue"] = min(hygiene.get("min_eigenvalue", np.inf), low)
    if drift > TRACE_FAIL or low < POSITIVITY_TOL:
        raise IntegrationAccuracyError(f"state lost validity: trace drift {drift:.2e}, min eigenvalue {low:.2e}")
    return herm


def steady_state_observables(p: RabiParams, rho0=None, segments: int = DEFAULT_SEGMENTS,
                             tol: float = WINDOW_TOL, max_windows: int = MAX_WINDOWS,
                             propagator: PeriodPropagator = None) -> SteadyState:
    """Evolve for 5 relaxation times, then compare period-averaged photon numbers
    over successive windows of one relaxation time until they agree to ``tol``."""
    prop = propagator or PeriodPropagator(p, segments)
    period = p.period
    per_window = max(1, int(round(1.0 / (p.slowest_decay * period))))
    jump, window_sum = geometric_power(prop.period, per_window)
    ops = operators(p.n_fock)
    photon_row = expectation_row(ops.number) @ prop.period_average @ window_sum / per_window
    v = _initial_vector(p, rho0)
    hygiene = {}
    for _ in range(WARMUP_WINDOWS):
        v = jump @ v
    _check(v, hygiene)
    previous = None
    windows = 0
    while True:
        current = float((photon_row @ v).real)
        v = jump @ v
        windows += 1
        _check(v, hygiene)
        if previous is not None and abs(current - previous) <= tol * abs(current) + 1e-15:
            break
        if windows >= max_windows:
            raise IntegrationAccuracyError(
                f"no steady state after {WARMUP_WINDOWS + windows} relaxation times (last change "
                f"{abs(current - previous) / max(abs(current), 1e-300):.2e})")
        previous = current
    settle = (WARMUP_WINDOWS + windows) * per_window * period

    states = prop.sample_period(v)
    rows = np.array([expectation_row(ops.number), expectation_row(ops.a @ ops.a),
                     expectation_row(ops.excited)])
    vals = np.array([rows @ s for s in states])
    photon = vals[:, 0].real
    a2 = vals[:, 1]
    excited = vals[:, 2].real
    en = np.array([log_negativity(_check(s, hygiene)) for s in states])
    times = np.arange(prop.segments) * prop.step
    lag = (int(np.argmax(en)) - int(np.argmax(photon))) / prop.segments
    lag = (lag + 0.5) % 1.0 - 0.5
    return SteadyState(
        mean_photon=current,
        a_squared_mag=float(np.mean(np.abs(a2))),
        qubit_excitation=float(np.mean(excited)),
        e_n_mean=float(np.mean(en)),
        e_n_max=float(np.max(en)),
        photon_rate=float(p.cavity_decay * p.cavity_frequency * current),
        photon_min=float(photon.min()),
        photon_max=float(photon.max()),
        peak_lag=float(lag),
        settle_time=settle,
        windows=windows,
        period_times=times,
        period_photon=photon,
        period_a_squared=a2,
        period_excitation=excited,
        period_log_negativity=en,
        hygiene={k: float(v_) for k, v_ in hygiene.items()},
    )


def drive_resonances(p: RabiParams, lo: float, hi: float, rel_strength: float = 1e-3):
    """Dressed transition frequencies out of the static ground state reachable by the modulation."""
    h0, h1 = hamiltonian_parts(p)
    energies, vectors = np.linalg.eigh(h0)
    ground = vectors[:, 0]
    strength = np.abs(vectors.conj().T @ h1 @ ground) ** 2
    freq = energies - energies[0]
    inside = (freq > lo) & (freq < hi)
    if not np.any(inside):
        return np.array([])
    keep = inside & (strength >= rel_strength * strength[inside].max())
    return np.sort(freq[keep])


@dataclass
class SweepResult:
    omega_m: np.ndarray
    mean_photon: np.ndarray
    e_n_max: np.ndarray
    argmax: float
    coarse_points: int
    hygiene: dict = field(default_factory=dict)

    HEADER = ("omega_m", "mean_photon", "e_n_max")

    def rows(self) -> np.ndarray:
        return np.column_stack([self.omega_m, self.mean_photon, self.e_n_max])


def _point(args):
    p, w, segments = args
    s = steady_state_observables(p.with_(drive_frequency=float(w)), segments=segments)
    return s.mean_photon, s.e_n_max, s.hygiene


def _evaluate(p, points, segments, jobs):
    args = [(p, w, segments) for w in points]
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_point, args))
    return [_point(a) for a in args]


def resonance_sweep(p: RabiParams, grid, refine: bool = True, jobs: int = 1,
                    segments: int = DEFAULT_SEGMENTS, refine_points: int = 16) -> SweepResult:
    """Steady photon number over a drive-frequency grid (units of omega_c), refined at the peak.

    The response line is only a few relaxation rates wide, narrower than
    any practical grid, so refinement searches around every modulation-
    allowed dressed transition inside the grid as well as around the best
    grid point.
    """
    grid = np.sort(np.asarray(grid, dtype=float))
    if grid.size < 2:
        raise ParameterError("sweep grid needs at least two points")
    values = dict(zip(grid.tolist(), _evaluate(p, grid, segments, jobs)))
    if refine:
        width = 4 * (p.cavity_decay + p.qubit_decay + 2 * abs(p.modulation))
        spacing = float(np.max(np.diff(grid)))
        best = max(values, key=lambda w: values[w][0])
        centres = list(drive_resonances(p, grid[0], grid[-1])) + [best]
        for c in centres:
            span = width if c != best else spacing
            local = np.linspace(c - span, c + span, refine_points)
            local = local[(local > grid[0]) & (local < grid[-1])]
            for w, r in zip(local.tolist(), _evaluate(p, local, segments, jobs)):
                values[w] = r
            peak = max(local, key=lambda w: values[w][0]) if local.size else c
            step = 2 * span / max(refine_points - 1, 1)
            a, b = max(grid[0], peak - step), min(grid[-1], peak + step)
            if b > a:
                found = minimize_scalar(lambda w: -_point((p, w, segments))[0], bounds=(a, b),
                                        method="bounded", options={"xatol": 1e-3 * step})
                w = float(found.x)
                values[w] = _point((p, w, segments))
    omega = np.array(sorted(values))
    photon = np.array([values[w][0] for w in omega])
    en = np.array([values[w][1] for w in omega])
    hygiene = {
        "trace_drift": max(v[2]["trace_drift"] for v in values.values()),
        "hermiticity": max(v[2]["hermiticity"] for v in values.values()),
        "min_eigenvalue": min(v[2]["min_eigenvalue"] for v in values.values()),
    }
    return SweepResult(omega, photon, en, float(omega[np.argmax(photon)]), int(grid.size), hygiene)
