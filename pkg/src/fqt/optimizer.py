"""Multi-start CRAB optimization of the base modulation waveform."""
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from .analysis import DIVERGENCE_THRESHOLD
from .cumulants import cumulants
from .errors import DomainError, FQTError, OptimizationFailed
from .modulation import CrabWaveform, weights_from_waveform

OBJECTIVES = ("maximize-beta-plus", "minimize-fano-E")
# simplex value handed back for failed or divergent evaluations
_WORST = 1e300


@dataclass(frozen=True)
class CrabConfig:
    n_modes: int = 3
    restarts: int = 8
    max_evals: int = 500
    tol: float = 1e-8
    master_seed: int = 0
    objective: str = "maximize-beta-plus"
    beta_probe: float = 1e-3
    q_max: int = 3
    envelope_fraction: float = 0.05
    penalty: float = 1e3
    max_deficit: float = None  # reject waveforms whose retained weight falls short by more

    def __post_init__(self):
        if self.n_modes < 1:
            raise DomainError("n_modes must be at least 1")
        if self.restarts < 1:
            raise DomainError("restarts must be at least 1")
        if self.max_evals < 1:
            raise DomainError("max_evals must be at least 1")
        if self.objective not in OBJECTIVES:
            raise DomainError(f"objective must be one of {OBJECTIVES}")
        if not self.beta_probe > 0:
            raise DomainError("beta_probe must be positive")

    @property
    def maximize(self):
        return self.objective == "maximize-beta-plus"

    @property
    def dim(self):
        return 2 * self.n_modes + 1


@dataclass(frozen=True)
class Evaluation:
    restart: int
    index: int
    objective: float
    x: tuple  # (mu, a_1..a_N, b_1..b_N) after clamping
    diverged: bool = False
    failed: bool = False


@dataclass
class OptResult:
    waveform: CrabWaveform
    objective: float
    spectrum: object
    currents: dict
    fano_e: float
    beta_minus: float
    evaluations: list = field(default_factory=list)

    def trajectories(self):
        """Per-restart (evaluation count, objective) pairs."""
        out = {}
        for e in self.evaluations:
            out.setdefault(e.restart, []).append((e.index, e.objective))
        return out


def waveform_from_vector(x, n_modes, nu, omega0=0.0, envelope_fraction=0.05):
    x = np.asarray(x, dtype=float)
    return CrabWaveform.from_nu(omega0, float(x[0]), tuple(x[1:1 + n_modes]),
                                tuple(x[1 + n_modes:]), nu, envelope_fraction)


def _lower_upper(n_modes):
    lo = np.full(2 * n_modes + 1, -1.0)
    lo[0] = 0.0
    return lo, np.ones(2 * n_modes + 1)


def beta_probe(params, spectrum, t_b, probe):
    """(beta_+, beta_-, diverged) from a two-point T_B probe around t_b."""
    lo = cumulants(params.replace(t_b=t_b - probe), spectrum).mean
    hi = cumulants(params.replace(t_b=t_b + probe), spectrum).mean
    d = {a: hi[a] - lo[a] for a in lo}
    if abs(d["B"]) < DIVERGENCE_THRESHOLD * max(abs(d["C"]), abs(d["E"])):
        sign = 1.0 if d["C"] * (d["B"] or 1.0) >= 0 else -1.0
        return sign * math.inf, -sign * math.inf, True
    return d["C"] / d["B"], d["E"] / d["B"], False


def objective_beta_plus(w, params, t_b, probe=1e-3, q_max=3, spectrum=None):
    """beta_+ of the waveform's harmonic spectrum at base temperature t_b."""
    if spectrum is None:
        spectrum = weights_from_waveform(w, q_max=q_max)
    return beta_probe(params, spectrum, t_b, probe)


def objective_fano_e(w, params, t_b, q_max=3, spectrum=None):
    if spectrum is None:
        spectrum = weights_from_waveform(w, q_max=q_max)
    c = cumulants(params.replace(t_b=t_b), spectrum)
    f = c.fano["E"]
    return (math.inf if f is None else f), c


def _evaluate(config, params, t_b, nu, x):
    """(objective, diverged, feasible) for one clamped parameter vector."""
    w = waveform_from_vector(x, config.n_modes, nu, params.omega0, config.envelope_fraction)
    spectrum = weights_from_waveform(w, q_max=config.q_max)
    if config.max_deficit is not None and spectrum.deficit > config.max_deficit:
        return math.nan, False, False
    if config.maximize:
        beta, _, div = objective_beta_plus(w, params, t_b, config.beta_probe, spectrum=spectrum)
        return beta, div, True
    f, _ = objective_fano_e(w, params, t_b, spectrum=spectrum)
    return f, False, True


def _initial_simplex(x0, lo, hi, step=0.25):
    pts = [x0]
    for i in range(len(x0)):
        p = x0.copy()
        p[i] = p[i] + step if p[i] + step <= hi[i] else p[i] - step
        pts.append(p)
    return np.array(pts)


def _run_restart(config, params, t_b, nu, r):
    rng = np.random.default_rng([config.master_seed, r])
    lo, hi = _lower_upper(config.n_modes)
    x0 = rng.uniform(lo, hi)
    sign = -1.0 if config.maximize else 1.0
    log = []

    def fun(x):
        xc = np.clip(x, lo, hi)
        excursion = float(np.sum((x - xc) ** 2))
        try:
            value, div, feasible = _evaluate(config, params, t_b, nu, xc)
            failed = not feasible or not (math.isfinite(value) or div)
        except (FQTError, ArithmeticError, ValueError):
            value, div, failed = math.nan, False, True
        if failed:
            value = -math.inf if config.maximize else math.inf
        log.append(Evaluation(r, len(log), float(value), tuple(xc.tolist()), div, failed))
        if failed or div:
            return _WORST
        return sign * value + config.penalty * excursion * max(1.0, abs(value))

    scipy.optimize.minimize(
        fun, x0, method="Nelder-Mead",
        options={"maxfev": config.max_evals, "fatol": config.tol, "xatol": 1e-10,
                 "initial_simplex": _initial_simplex(x0, lo, hi)},
    )
    return log


def _pick_best(evals, maximize):
    usable = [e for e in evals if not e.failed and not e.diverged]
    if not usable:
        usable = [e for e in evals if not e.failed]
    if not usable:
        return None
    key = (lambda e: e.objective) if maximize else (lambda e: -e.objective)
    # ties resolve to the earliest evaluation
    return max(usable, key=lambda e: (key(e), -e.restart, -e.index))


def optimize(config, params, t_b, nu, threads=1):
    """Multi-start Nelder-Mead over (mu, a, b); deterministic for a fixed config."""
    if not nu > 0:
        raise DomainError("modulation frequency must be positive")
    if config.q_max * nu >= 2 * params.delta:
        raise DomainError("q_max * nu must stay below 2*Delta")
    if config.maximize and not t_b > config.beta_probe:
        raise DomainError("t_b must exceed the beta probe")
    args = [(config, params, t_b, nu, r) for r in range(config.restarts)]
    if threads > 1 and config.restarts > 1:
        with ProcessPoolExecutor(max_workers=min(threads, config.restarts)) as pool:
            logs = list(pool.map(_run_restart, *zip(*args)))
    else:
        logs = [_run_restart(*a) for a in args]
    evals = [e for log in logs for e in log]
    best = _pick_best(evals, config.maximize)
    if best is None:
        raise OptimizationFailed("no restart produced a finite objective", logs=evals)

    w = waveform_from_vector(best.x, config.n_modes, nu, params.omega0, config.envelope_fraction)
    spectrum = weights_from_waveform(w, q_max=config.q_max)
    c = cumulants(params.replace(t_b=t_b), spectrum)
    _, beta_minus, _ = beta_probe(params, spectrum, t_b, config.beta_probe)
    return OptResult(w, best.objective, spectrum, dict(c.mean), c.fano["E"], beta_minus, evals)
