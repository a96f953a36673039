"""Closed-form currents, amplification factors, Fano factors and their bound."""
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SingularRegimeError
from .liouvillian import BATHS, AuxRates, aux_rates
from .modulation import HarmonicSpectrum

# quanta exchanged per transition with each bath
OMEGA_FACTOR = {"E": 1.0, "B": 2.0, "C": 1.0}
DIVERGENCE_THRESHOLD = 1e-6


@dataclass(frozen=True)
class ClosedFormInputs:
    m: float  # exp(-Delta/T_E)
    g_c: float  # exp(-Delta/T_C)
    h: float  # exp(-Delta/T_B)
    aux: AuxRates
    delta: float = 1.0


def closed_form_inputs(params, spectrum):
    d = params.delta
    m = math.exp(-d / params.t_e)
    g = math.exp(-d / params.t_c)
    h = 0.0 if params.tb_zero else math.exp(-d / params.t_b)
    if not (g < 0.1 * m and m < 0.1):
        warnings.warn("closed forms assume exp(-D/T_C) << exp(-D/T_E) << 1", stacklevel=2)
    return ClosedFormInputs(m, g, h, aux_rates(params, spectrum), d)


def _unpack(inp):
    a = inp.aux
    return inp.delta, inp.m, inp.h, a.b_rate, a.f_rate, a.r_of_nu, a.r_of_0, a.q_diag


def _rh2(inp):
    """R(nu) h^2, which stays finite when R(nu) alone overflows."""
    if inp.h == 0.0:
        return 0.0
    return inp.aux.r_of_nu * inp.h**2


def currents_exact_lowT(inp):
    """Currents of the low-temperature generator at g -> 0, normalized by X."""
    d, m, h, b, f, rn, r0, _ = _unpack(inp)
    rh2 = _rh2(inp)
    x = (-b**2 * (m + 2 * r0 + 2)
         + 2 * rh2 * (b * (f - b) + b * d * (m + 3) + 3 * d * f + d**2 * (2 * m + 3))
         + b * (2 * d + (m + 2) * (f + d * m) + 2 * r0 * (d + f + 2 * d * m))
         + d * (m + 1) * (2 * (r0 * (d + f + d * m) + f) + d * (m + 2)))
    if x == 0:
        raise SingularRegimeError("X vanishes")
    j_e = d**3 / x * (b * m * (4 * m * r0 + m + 2 * r0 + 2)
                      - 2 * rh2 * (-b * (m - 3) + f + d * (m + 2)))
    j_b = 4 * d**3 / x * (rh2 * (3 * b + f + d * (m + 2)) - b * m**2 * r0)
    # overall sign fixed so that the three currents sum to zero
    j_c = -d**3 / x * (2 * rh2 * (b * (m + 3) + f + d * (m + 2)) + b * m * (m + 2 * r0 + 2))
    return j_e, j_b, j_c


def currents_approx(inp):
    """Leading-order currents normalized by Y1 = 2(R(0)+1)[-B^2 + (B+D)(F+D)]."""
    d, m, h, b, f, rn, r0, _ = _unpack(inp)
    rh2 = _rh2(inp)
    y1 = 2 * (r0 + 1) * (-b**2 + (b + d) * (f + d))
    if y1 == 0:
        raise SingularRegimeError("Y1 vanishes")
    psi = 3 * rh2 - r0 * m**2
    j_e = d**3 / y1 * b * m * (m * (4 * r0 + 1) + 2 * (r0 + 1))
    j_b = 4 * d**3 / y1 * (b * psi + rh2 * (f + 2 * d))
    j_c = -d**3 / y1 * b * m * (m + 2 * r0 + 2)
    return j_e, j_b, j_c


def currents_unmodulated(t_e, t_b, t_c, delta=1.0):
    """Unmodulated currents with Y2 = 1 + T_B/D - (T_B/D)^2."""
    if min(t_e, t_b, t_c) <= 0:
        raise DomainError("temperatures must be positive")
    x = t_b / delta
    y2 = 1 + x - x**2
    j_e = delta**2 / y2 * x * math.exp(-delta / t_e)
    j_b = delta**2 / y2 * x * (3 * math.exp(-2 * delta / t_b) - math.exp(-2 * delta / t_e))
    return j_e, j_b, -j_e


def currents_zero_tb(t_e, spectrum, delta=1.0):
    """T_B -> 0 currents with Y3 = 2(R(0)+1)(2 nu P_1 + D); the base keeps only its M^2 term."""
    p1 = 0.5 * (spectrum[1] + spectrum[-1])
    r0 = spectrum[0] + 2 * p1
    nu = spectrum.nu
    m = math.exp(-delta / t_e)
    y3 = 2 * (r0 + 1) * (2 * nu * p1 + delta)
    pref = delta**2 / y3 * nu * p1
    j_e = pref * (m**2 * (4 * r0 + 1) + 2 * m * (r0 + 1))
    j_b = -4 * pref * m**2 * r0
    j_c = -pref * m * (m + 2 * (1 + r0))
    return j_e, j_b, j_c


@dataclass(frozen=True)
class AmplificationPoint:
    t_b: float
    beta_plus: float
    beta_minus: float
    diverged: bool


def amplification_numeric(sweep, threshold=DIVERGENCE_THRESHOLD):
    """beta_+- = dJ_{C,E}/dJ_B by central differences along a T_B sweep.

    ``sweep`` is a sequence of (T_B, J_B, J_C, J_E) sorted by T_B.  A point is
    divergent when dJ_B/dT_B is negligible next to the other slopes, or when it
    is the point nearest to a sign change of dJ_B/dT_B.
    """
    arr = np.asarray(sweep, dtype=float)
    if arr.ndim != 2 or arr.shape[0] < 3 or arr.shape[1] != 4:
        raise DomainError("sweep needs at least 3 rows of (T_B, J_B, J_C, J_E)")
    t = arr[:, 0]
    if np.any(np.diff(t) <= 0):
        raise DomainError("sweep must be strictly increasing in T_B")
    d_b, d_c, d_e = (np.gradient(arr[:, k], t) for k in (1, 2, 3))
    diverged = np.abs(d_b) < threshold * np.maximum(np.abs(d_c), np.abs(d_e))
    for i in np.nonzero(np.sign(d_b[:-1]) * np.sign(d_b[1:]) < 0)[0]:
        diverged[i if abs(d_b[i]) <= abs(d_b[i + 1]) else i + 1] = True
    out = []
    for i in range(len(t)):
        if diverged[i]:
            sign = 1.0 if d_c[i] * (d_b[i] or 1.0) >= 0 else -1.0
            out.append(AmplificationPoint(t[i], sign * math.inf, -sign * math.inf, True))
        else:
            out.append(AmplificationPoint(t[i], d_c[i] / d_b[i], d_e[i] / d_b[i], False))
    return out


def amplification_analytic(m, r0):
    """beta_+ = (M + 2R(0) + 2)/(4 M R(0)) and beta_- = -(beta_+ + 1)."""
    if m <= 0 or r0 <= 0:
        raise DomainError("M and R(0) must be positive")
    beta_plus = (m + 2 * r0 + 2) / (4 * m * r0)
    beta_minus = -(4 * m * r0 + m + 2 * r0 + 2) / (4 * m * r0)
    return beta_plus, beta_minus


def fano(cumulants, alpha):
    """Var/mean for one bath; None where the mean vanishes."""
    return cumulants.fano[alpha]


def _f_factor(inp):
    d, m, h, b, f, rn, r0, q = _unpack(inp)
    num = (q * (b + f + 2 * d * (m + 1)) + b**2 - b * (d + f + 2 * d * m)
           - d * (d + (m + 1) * (f + d * m)))
    den = (q * (-b**2 + b * (d + f + 2 * d * m) + d * (m + 1) * (d + f + d * m))
           + d * m * (b**2 - b * (f + d * (m - 2)) + d**2 * (m + 1)))
    if den == 0:
        raise SingularRegimeError("denominator of the Fano correction vanishes")
    return num / den**2


def fano_closed_form(inp, currents=None):
    """Closed-form (F_E, F_B, F_C); currents default to ``currents_exact_lowT``."""
    d, m, h, b, f, rn, r0, q = _unpack(inp)
    j_e, _, j_c = currents if currents is not None else currents_exact_lowT(inp)
    ff = _f_factor(inp)
    s = q - d * m * (1 + 4 * r0)
    f_e = d - ((4 * d**2 * m * r0 + 4 * j_e) - 2 * b * m * d**3 * s**2 * ff) / s
    f_b = -2 * d + 8 * b * m**2 * d**4 * r0 * ff
    f_c = -d + 2 * b * m * d**3 * (-q + m * d) * ff + 4 * j_c / (-q + m * d)
    return f_e, f_b, f_c


def entropy_production(currents, temps, convention="direct"):
    """sum_a J_a/T_a ("direct") or its negative ("conventional").

    A bath at T = 0 exchanging heat contributes +-inf.
    """
    s = 0.0
    for a in BATHS:
        j, t = float(currents[a]), float(temps[a])
        if t > 0:
            s += j / t
        elif j != 0:
            s += math.copysign(math.inf, j)
    if convention == "direct":
        return s
    if convention == "conventional":
        return -s
    raise DomainError(f"unknown entropy convention {convention!r}")


def fano_bound(currents, temps, delta, alpha, convention="direct"):
    """Omega_a coth(Omega_a |sigma| / (2 |J_a|)) with Omega_B = 2D, Omega_{E,C} = D."""
    j = currents[alpha]
    if j == 0:
        return None
    omega = OMEGA_FACTOR[alpha] * delta
    sigma = entropy_production(currents, temps, convention)
    x = abs(omega * sigma / (2 * j))
    if x == 0:
        return math.inf
    return omega / math.tanh(x)


@dataclass
class TransistorReport:
    beta_plus: float
    beta_minus: float
    fano_e: float
    fano_b: float
    fano_c: float
    bound_e: float
    bound_b: float
    bound_c: float
    sigma: float


def transistor_report(cumulants, params, beta_plus=math.nan, beta_minus=math.nan,
                      convention="direct"):
    temps = {a: params.temperature(a) for a in BATHS}
    fano_ = cumulants.fano
    bounds = {a: fano_bound(cumulants.mean, temps, params.delta, a, convention) for a in BATHS}
    return TransistorReport(
        beta_plus, beta_minus,
        fano_["E"], fano_["B"], fano_["C"],
        bounds["E"], bounds["B"], bounds["C"],
        entropy_production(cumulants.mean, temps, convention),
    )
