"""Steady-state current cumulants from the tilted generator.

The primary route differentiates the characteristic polynomial
P(z) = det(L - z I) = sum_n A_n z^n implicitly at zero counting field:

    <J>   = -A_0' / A_1
    Var J = -(A_0'' + 2 A_1' <J> + 2 A_2 <J>^2) / A_1

with derivatives taken along the real tilt u = i*chi.  Two independent
oracles are provided: finite differences of the dominant eigenvalue and the
long-time slope of the finite-time cumulant generating function.
"""
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import DegenerateGeneratorError, DomainError, NumericalError
from .liouvillian import BATHS, CountingField, build

DEFAULT_FD_STEP = 2e-3


@dataclass(frozen=True)
class PolyCoeffs:
    """Coefficients A_0..A_4 of det(L - z I)."""

    a: tuple
    chi: CountingField = field(default_factory=CountingField)

    def __getitem__(self, n):
        return self.a[n]


def _series_mul(x, y):
    """Product of truncated Taylor series of matrices (or scalars)."""
    return [sum(x[i] @ y[k - i] if np.ndim(x[i]) else x[i] * y[k - i] for i in range(k + 1))
            for k in range(len(x))]


def faddeev_leverrier(series):
    """Taylor coefficients of the char. polynomial coefficients of L(s) = sum_k L_k s^k.

    Returns an array c[n, k]: coefficient of z^n in det(L - zI), k-th Taylor
    coefficient in s.
    """
    series = [np.asarray(m, dtype=float) for m in series]
    n = series[0].shape[0]
    order = len(series)
    eye = np.eye(n)
    c = np.zeros((n + 1, order))
    c[n, 0] = 1.0
    m = [np.zeros((n, n)) for _ in range(order)]
    for k in range(1, n + 1):
        am = _series_mul(series, m)
        m = [am[j] + c[n - k + 1, j] * eye for j in range(order)]
        am = _series_mul(series, m)
        c[n - k] = [-np.trace(x) / k for x in am]
    return c * (-1) ** n


def char_poly_coeffs(g):
    """Exact coefficients of det(L - zI) by the Faddeev-LeVerrier recursion."""
    mat = g.matrix
    if not np.all(np.isfinite(mat)):
        raise NumericalError("generator has non-finite entries")
    if np.iscomplexobj(mat):
        n = mat.shape[0]
        c = np.zeros(n + 1, dtype=complex)
        c[n] = 1.0
        m = np.zeros_like(mat)
        for k in range(1, n + 1):
            m = mat @ m + c[n - k + 1] * np.eye(n)
            c[n - k] = -np.trace(mat @ m) / k
        coeffs = c * (-1) ** n
    else:
        coeffs = faddeev_leverrier([mat])[:, 0]
    return PolyCoeffs(tuple(coeffs.tolist()), g.chi)


def steady_state(g):
    """Normalized null vector of the untilted generator."""
    if not g.chi.is_zero:
        raise DomainError("steady state requires zero counting field")
    mat = g.matrix
    sv = np.linalg.svd(mat, compute_uv=False)
    if sv[-2] < 1e-12 * sv[0]:
        raise DegenerateGeneratorError("generator has more than one stationary state")
    n = mat.shape[0]
    lhs = np.vstack([mat, np.ones(n)])
    rhs = np.zeros(n + 1)
    rhs[-1] = 1.0
    rho, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)
    return rho


@dataclass
class CumulantSet:
    mean: dict
    variance: dict
    populations: np.ndarray

    @property
    def fano(self):
        return {a: fano_ratio(self.mean[a], self.variance[a]) for a in BATHS}

    def conservation_error(self):
        scale = max(abs(v) for v in self.mean.values())
        return abs(sum(self.mean.values())) / scale if scale else 0.0


def fano_ratio(mean, var):
    """Var/mean, or None where the mean vanishes."""
    if mean == 0 or not math.isfinite(mean) or abs(var) > 1e15 * abs(mean):
        return None
    return var / mean


def _poly_derivatives_taylor(g, bath):
    """A_n^(k) for k = 0, 1, 2 by forward-mode differentiation."""
    c = faddeev_leverrier(g.taylor(bath, order=2))
    return c * np.array([1.0, 1.0, 2.0])


def _richardson(f, h):
    """First and second derivative of f at 0 from central differences at h and h/2."""
    f0 = f(0.0)
    fp, fm = f(h), f(-h)
    gp, gm = f(h / 2), f(-h / 2)
    d1 = (4 * (gp - gm) / h - (fp - fm) / (2 * h)) / 3
    d2 = (4 * (gp - 2 * f0 + gm) / (h / 2) ** 2 - (fp - 2 * f0 + fm) / h**2) / 3
    return f0, d1, d2


def _poly_derivatives_fd(g, bath, step):
    f = lambda u: np.array(char_poly_coeffs(g.tilted(bath, u)).a)
    f0, d1, d2 = _richardson(f, step)
    return np.stack([f0, d1, d2], axis=1)


def poly_derivatives(g, bath, method="taylor", step=None):
    """Array d[n, k] = A_n^(k) at zero counting field."""
    if method == "taylor":
        return _poly_derivatives_taylor(g, bath)
    if method == "fd":
        step = step if step is not None else DEFAULT_FD_STEP / g.params.delta
        return _poly_derivatives_fd(g, bath, step)
    raise DomainError(f"unknown derivative method {method!r}")


def _mean_var(d, scale):
    a1 = d[1, 0]
    if abs(a1) < 1e-12 * scale:
        raise DegenerateGeneratorError("A_1 vanishes: two near-zero eigenvalues")
    mean = -d[0, 1] / a1
    var = -(d[0, 2] + 2 * d[1, 1] * mean + 2 * d[2, 0] * mean**2) / a1
    return mean, var


def generator_cumulants(g, method="taylor", step=None):
    norm = np.max(np.abs(g.matrix))
    scale = norm**3
    mean, var = {}, {}
    for bath in BATHS:
        mean[bath], var[bath] = _mean_var(poly_derivatives(g, bath, method, step), scale)
        if var[bath] < -1e-10 * norm**2:
            raise NumericalError(f"negative variance for bath {bath}: {var[bath]}")
    return CumulantSet(mean, var, steady_state(g))


def cumulants(params, spectrum, kind="full", method="taylor", step=None, **build_kwargs):
    """Mean currents, variances and populations at one parameter point."""
    g = build(params, spectrum, kind=kind, **build_kwargs)
    return generator_cumulants(g, method, step)


def mean_current(params, spectrum, alpha, **kwargs):
    return cumulants(params, spectrum, **kwargs).mean[alpha]


def variance(params, spectrum, alpha, **kwargs):
    return cumulants(params, spectrum, **kwargs).variance[alpha]


def dominant_eigenvalue(g):
    ev = np.linalg.eigvals(g.matrix)
    return ev[np.argmax(ev.real)]


def eigenvalue_cumulants(g, bath, step=1e-2):
    """Oracle: (mean, variance) from Richardson differences of the dominant eigenvalue.

    Smaller steps lose digits: the eigenvalue can be ~1e-6 of the matrix norm.
    """
    f = lambda u: dominant_eigenvalue(g.tilted(bath, u)).real
    _, d1, d2 = _richardson(f, step / g.params.delta)
    return d1, d2


def finite_time_cgf(g, rho0, t):
    """ln sum_i [exp(L t) rho0]_i."""
    if t < 0:
        raise DomainError("time must be non-negative")
    rho0 = np.asarray(rho0)
    if t == 0:
        return float(np.log(rho0.sum()))
    with np.errstate(over="raise", invalid="raise"):
        try:
            rho = scipy.linalg.expm(g.matrix * t) @ rho0
        except FloatingPointError as exc:
            raise NumericalError(f"matrix exponential overflowed at t={t}") from exc
    total = rho.sum()
    if not np.isfinite(total) or total == 0:
        raise NumericalError(f"matrix exponential overflowed at t={t}")
    if np.iscomplexobj(total):
        return complex(np.log(total))
    return float(np.log(total))


def relaxation_gap(g):
    """Smallest nonzero relaxation rate of the untilted generator."""
    ev = np.sort(np.abs(np.linalg.eigvals(g.rates).real))
    return ev[1]


def cgf_slope(g, rho0, t1, t2):
    return (finite_time_cgf(g, rho0, t2) - finite_time_cgf(g, rho0, t1)) / (t2 - t1)


def cgf_cumulants(g, bath, step=1e-2, t1=None, rho0=None):
    """Oracle: (mean, variance) from the long-time slope of the finite-time CGF."""
    rho0 = np.full(4, 0.25) if rho0 is None else rho0
    if t1 is None:
        t1 = 40.0 / relaxation_gap(g)
    f = lambda u: cgf_slope(g.tilted(bath, u), rho0, t1, 2 * t1)
    _, d1, d2 = _richardson(f, step / g.params.delta)
    return d1, d2
