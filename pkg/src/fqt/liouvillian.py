"""Counting-field tilted generator of the reduced population dynamics.

Populations are ordered (I, II, III, IV) = ({1,8}, {2,7}, {3,6}, {4,5}).
Column j of the generator holds the rates out of level j, so each column
sums to zero at vanishing counting field.

A generator is stored as a list of jumps.  Each jump carries the energy it
takes from its bath, and its off-diagonal entry is multiplied by
exp(i * energy * chi_bath).  With ``real_tilt`` the counting variables are
the real tilts u = i*chi and the factor becomes exp(energy * u).
"""
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError, UnsupportedProtocolError
from .model import spectral_function, thermal_occupancy

LEVELS = ("I", "II", "III", "IV")
BATHS = ("E", "B", "C")
I, II, III, IV = range(4)


@dataclass(frozen=True)
class CountingField:
    chi_e: float = 0.0
    chi_b: float = 0.0
    chi_c: float = 0.0
    real_tilt: bool = False

    def __post_init__(self):
        if not all(math.isfinite(x) for x in (self.chi_e, self.chi_b, self.chi_c)):
            raise DomainError("counting fields must be finite")

    @classmethod
    def tilt(cls, bath, u):
        """Real tilt u along a single bath."""
        return cls(**{f"chi_{bath.lower()}": u}, real_tilt=True)

    def __getitem__(self, bath):
        return {"E": self.chi_e, "B": self.chi_b, "C": self.chi_c}[bath]

    @property
    def is_zero(self):
        return self.chi_e == self.chi_b == self.chi_c == 0.0

    def factor(self, bath, energy):
        x = self[bath] if bath is not None else 0.0
        if x == 0.0 or energy == 0.0:
            return 1.0
        return math.exp(energy * x) if self.real_tilt else complex(math.cos(energy * x), math.sin(energy * x))


@dataclass(frozen=True)
class Jump:
    """A population transfer source -> target driven by one bath."""

    source: int
    target: int
    rate: float
    bath: str
    energy: float  # energy absorbed from the bath


@dataclass(frozen=True)
class TiltedGenerator:
    jumps: tuple
    diagonal: tuple
    params: object = None
    spectrum: object = None
    chi: CountingField = field(default_factory=CountingField)

    @property
    def matrix(self):
        dtype = float if (self.chi.real_tilt or self.chi.is_zero) else complex
        m = np.diag(np.array(self.diagonal, dtype=dtype))
        for j in self.jumps:
            m[j.target, j.source] += j.rate * self.chi.factor(j.bath, j.energy)
        return m

    @property
    def rates(self):
        """Untilted generator."""
        return self.at(CountingField()).matrix

    def at(self, chi):
        return replace(self, chi=chi)

    def tilted(self, bath, u):
        return self.at(CountingField.tilt(bath, u))

    def taylor(self, bath, order=2):
        """Normalized Taylor coefficients L_k of L(u_bath) around the current field.

        L(u0 + s) = sum_k L_k s^k; the field must be a real tilt (or zero).
        """
        if not (self.chi.real_tilt or self.chi.is_zero):
            raise DomainError("Taylor expansion needs a real tilt")
        out = [self.matrix.astype(float)]
        for k in range(1, order + 1):
            m = np.zeros((4, 4))
            for j in self.jumps:
                if j.bath == bath and j.energy != 0.0:
                    w = j.rate * self.chi.factor(j.bath, j.energy)
                    m[j.target, j.source] += w * j.energy**k / math.factorial(k)
            out.append(m)
        return out

    def to_json(self):
        m = self.matrix
        return {
            "basis": list(LEVELS),
            "chi": {"E": self.chi.chi_e, "B": self.chi.chi_b, "C": self.chi.chi_c,
                    "real_tilt": self.chi.real_tilt},
            "real": np.real(m).tolist(),
            "imag": np.imag(m).tolist(),
        }


def _assemble(jumps, params, spectrum, chi, diagonal=None):
    jumps = tuple(j for j in jumps if j.rate != 0.0)
    if diagonal is None:
        d = [0.0] * 4
        for j in jumps:
            d[j.source] -= j.rate
        diagonal = d
    return TiltedGenerator(jumps, tuple(float(x) for x in diagonal), params, spectrum, chi)


def _one_quantum_jumps(params, rate_up, rate_down):
    """Emitter and collector jumps; rate_* map bath -> (absorption, emission)."""
    d = params.delta
    out = []
    for bath, pairs in (("E", ((IV, I), (III, II))), ("C", ((II, I), (III, IV)))):
        for low, high in pairs:
            out.append(Jump(low, high, rate_up[bath], bath, d))
            out.append(Jump(high, low, rate_down[bath], bath, -d))
    return out


@dataclass(frozen=True)
class AuxRates:
    f_rate: float
    b_rate: float
    r_of_nu: float
    r_of_0: float
    q_diag: float


def _symmetric_weights(spectrum):
    """P_q averaged with P_-q: each merged level pairs mirror-image base flips."""
    qs = set(spectrum.weights) | {-q for q in spectrum.weights}
    return {q: 0.5 * (spectrum[q] + spectrum[-q]) for q in sorted(qs)}


def _low_t_weights(spectrum):
    if spectrum.q_max > 1:
        raise UnsupportedProtocolError(
            "the low-temperature generator only supports harmonics |q| <= 1; use build_full"
        )
    p = _symmetric_weights(spectrum)
    return p.get(0, 0.0), p.get(1, 0.0)


def _coth(x):
    return 1.0 / math.tanh(x)


def aux_rates(params, spectrum):
    """Auxiliary rates F, B, R(nu), R(0) and Q of the low-temperature generator."""
    p0, p1 = _low_t_weights(spectrum)
    nu, d = spectrum.nu, params.delta
    if params.tb_zero:
        f = nu * p1
        b = f
        r_nu = math.inf if p1 > 0 and nu > 0 else p0 + 2 * p1
    else:
        tb = params.t_b
        f = nu * p1 * _coth(nu / (2 * tb)) if nu > 0 else 2 * tb * p1
        b = p0 * tb + f
        try:
            r_nu = (p0 + p1 * (nu / (2 * d) + 1) * math.exp(-nu / tb)
                    + p1 * (1 - nu / (2 * d)) * math.exp(nu / tb))
        except OverflowError:
            r_nu = math.inf
    r0 = p0 + 2 * p1
    return AuxRates(f, b, r_nu, r0, -2 * d * (1 + r0))


def _excitation_13(params, p0, p1, nu):
    """2*Delta*R(nu)*exp(-2 Delta/T_B) evaluated without overflow."""
    d = params.delta
    if params.tb_zero:
        return 0.0
    tb = params.t_b
    return 2 * d * (p0 * math.exp(-2 * d / tb)
                    + p1 * (nu / (2 * d) + 1) * math.exp(-(2 * d + nu) / tb)
                    + p1 * (1 - nu / (2 * d)) * math.exp(-(2 * d - nu) / tb))


def build_low_t(params, spectrum, chi=None, nonconserving_iv_diagonal=False):
    """Low-temperature generator built from Boltzmann factors and the auxiliary rates.

    ``nonconserving_iv_diagonal`` uses the (IV, IV) entry -Delta - F - Delta*M,
    which drops the P_0*T_B outflow and does not conserve probability unless P_0 = 0.
    It exists only to cross-check the closed forms derived from that matrix.
    """
    chi = chi or CountingField()
    if max(params.t_e, params.t_c, 0 if params.tb_zero else params.t_b) > 0.3 * params.delta:
        warnings.warn("temperatures are not small compared with delta", stacklevel=2)
    aux = aux_rates(params, spectrum)
    p0, p1 = _low_t_weights(spectrum)
    d, k = params.delta, params.kappa
    m, g = math.exp(-d / params.t_e), math.exp(-d / params.t_c)
    up = {"E": k * d * m, "C": k * d * g}
    down = {"E": k * d, "C": k * d}
    jumps = _one_quantum_jumps(params, up, down)
    jumps += [
        Jump(III, I, k * _excitation_13(params, p0, p1, spectrum.nu), "B", 2 * d),
        Jump(I, III, k * 2 * d * aux.r_of_0, "B", -2 * d),
        Jump(II, IV, k * aux.b_rate, "B", 0.0),
        Jump(IV, II, k * aux.b_rate, "B", 0.0),
    ]
    gen = _assemble(jumps, params, spectrum, chi)
    if nonconserving_iv_diagonal:
        diag = list(gen.diagonal)
        diag[IV] = -k * (d + aux.f_rate + d * m)
        gen = replace(gen, diagonal=tuple(diag))
    return gen


def build_full(params, spectrum, chi=None, exact_phases=False):
    """Generator with exact Bose factors and every harmonic in the spectrum.

    The base two-quantum transition is counted with energy 2*Delta unless
    ``exact_phases`` is set, in which case each sideband carries 2*Delta + q*nu.
    The zero-quantum base channel II <-> IV is not counted unless
    ``exact_phases`` is set.
    """
    chi = chi or CountingField()
    d, k, nu = params.delta, params.kappa, spectrum.nu
    weights = {q: p for q, p in _symmetric_weights(spectrum).items() if p > 0}
    for q in weights:
        if 2 * d + q * nu <= 0:
            raise DomainError(f"sideband 2*Delta + {q}*nu is not positive")

    up = {b: k * d * thermal_occupancy(d, params.temperature(b)) for b in ("E", "C")}
    down = {b: k * d + up[b] for b in ("E", "C")}
    jumps = _one_quantum_jumps(params, up, down)

    tb, zero = params.t_b, params.tb_zero
    for q, p in weights.items():
        w = 2 * d + q * nu
        energy = w if exact_phases else 2 * d
        jumps.append(Jump(I, III, p * spectral_function(w, tb, k, zero), "B", -energy))
        jumps.append(Jump(III, I, p * spectral_function(-w, tb, k, zero), "B", energy))

    for q, p in weights.items():
        w = q * nu
        if w == 0.0:
            rate = 0.0 if zero else p * k * tb
            jumps += [Jump(II, IV, rate, "B", 0.0), Jump(IV, II, rate, "B", 0.0)]
            continue
        rate = p * spectral_function(w, tb, k, zero)
        energy = -w if exact_phases else 0.0
        # II -> IV at sideband w and its mirror IV -> II
        jumps += [Jump(II, IV, rate, "B", energy), Jump(IV, II, rate, "B", energy)]
    return _assemble(jumps, params, spectrum, chi)


def build(params, spectrum, chi=None, kind="full", **kwargs):
    if kind == "full":
        return build_full(params, spectrum, chi, **kwargs)
    if kind == "low_t":
        return build_low_t(params, spectrum, chi, **kwargs)
    raise DomainError(f"unknown generator kind {kind!r}")
