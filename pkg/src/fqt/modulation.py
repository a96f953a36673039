"""Floquet harmonic weights P_q for the base-qubit frequency modulation.

Closed forms cover the unmodulated, weak sinusoidal and pi-flip protocols.
Arbitrary periodic waveforms (CRAB) go through ``weights_from_waveform``,
which integrates the accumulated phase exactly and the Fourier overlap by
composite Gauss-Legendre quadrature.
"""
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial

from .errors import DomainError, NumericalError

PI_FLIP_WEIGHT = 4.0 / math.pi**2

_GL_ORDER = 16
_GL_X, _GL_W = np.polynomial.legendre.leggauss(_GL_ORDER)


@dataclass(frozen=True)
class HarmonicSpectrum:
    """Finite map q -> P_q together with the modulation frequency.

    ``deficit`` is 1 - sum(P_q); it is zero for exact spectra and positive for
    truncated ones.
    """

    weights: dict
    nu: float = 0.0
    deficit: float = 0.0
    label: str = ""

    def __post_init__(self):
        clean = {int(q): float(p) for q, p in self.weights.items()}
        if any(p < 0 for p in clean.values()):
            raise DomainError("harmonic weights must be non-negative")
        if self.nu < 0:
            raise DomainError("modulation frequency must be non-negative")
        object.__setattr__(self, "weights", dict(sorted(clean.items())))

    def __getitem__(self, q):
        return self.weights.get(q, 0.0)

    @property
    def q_max(self):
        return max((abs(q) for q, p in self.weights.items() if p > 0), default=0)

    @property
    def total(self):
        return sum(self.weights.values())

    def is_symmetric(self, tol=1e-10):
        return all(abs(p - self[-q]) < tol for q, p in self.weights.items())

    def to_json(self):
        return {
            "label": self.label,
            "nu": self.nu,
            "deficit": self.deficit,
            "weights": {str(q): p for q, p in self.weights.items()},
        }


def weights_unmodulated():
    return HarmonicSpectrum({0: 1.0}, nu=0.0, deficit=0.0, label="unmodulated")


def weights_sinusoidal(lam, nu):
    """Weak-modulation weights P_0 = 1 - lam^2/2, P_{+-1} = lam^2/4."""
    if not 0.0 <= lam <= 1.0:
        raise DomainError(f"lambda must lie in [0, 1], got {lam}")
    if lam > 0.5:
        warnings.warn(
            f"lambda={lam} is outside the weak-modulation regime; "
            "two-harmonic weights are approximate",
            stacklevel=2,
        )
    p1 = lam**2 / 4.0
    weights = {0: 1.0 - lam**2 / 2.0}
    if p1 > 0:
        weights.update({-1: p1, 1: p1})
    return HarmonicSpectrum(weights, nu=nu, deficit=0.0, label=f"sinusoidal({lam:g})")


def weights_pi_flip(nu):
    """Truncated pi-flip weights: P_0 = 0, P_{+-1} = (2/pi)^2, not renormalized."""
    return HarmonicSpectrum(
        {-1: PI_FLIP_WEIGHT, 1: PI_FLIP_WEIGHT},
        nu=nu,
        deficit=1.0 - 2.0 * PI_FLIP_WEIGHT,
        label="pi-flip",
    )


def _smoothstep():
    return Polynomial([0.0, 0.0, 3.0, -2.0])


@dataclass(frozen=True)
class CrabWaveform:
    """Truncated Fourier modulation with boundary-pinning ramp envelope.

    omega(t) = omega0 + mu/(2N) * E(t) * sum_n [a_n cos(2 pi n t/tau) + b_n sin(2 pi n t/tau)]
    """

    omega0: float
    mu: float
    a: tuple
    b: tuple
    tau: float
    envelope_fraction: float = 0.05

    def __post_init__(self):
        a = tuple(float(x) for x in self.a)
        b = tuple(float(x) for x in self.b)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        if len(a) != len(b) or not a:
            raise DomainError("a and b must be non-empty and of equal length")
        if any(abs(x) > 1.0 for x in a + b):
            raise DomainError("Fourier coefficients must lie in [-1, 1]")
        if not 0.0 <= self.mu <= 1.0:
            raise DomainError(f"mu must lie in [0, 1], got {self.mu}")
        if not self.tau > 0:
            raise DomainError("tau must be positive")
        if not 0.0 < self.envelope_fraction < 0.5:
            raise DomainError("envelope_fraction must lie in (0, 0.5)")

    @classmethod
    def from_nu(cls, omega0, mu, a, b, nu, envelope_fraction=0.05):
        return cls(omega0, mu, a, b, 2.0 * math.pi / nu, envelope_fraction)

    @property
    def n_modes(self):
        return len(self.a)

    @property
    def nu(self):
        return 2.0 * math.pi / self.tau

    @property
    def breakpoints(self):
        e = self.envelope_fraction * self.tau
        return (0.0, e, self.tau - e, self.tau)

    def _segments(self):
        """(start, stop, envelope polynomial in t) for each smooth piece."""
        e = self.envelope_fraction * self.tau
        s = _smoothstep()
        rise = s(Polynomial([0.0, 1.0 / e]))
        fall = s(Polynomial([self.tau / e, -1.0 / e]))
        t0, t1, t2, t3 = self.breakpoints
        return [(t0, t1, rise), (t1, t2, Polynomial([1.0])), (t2, t3, fall)]

    def envelope(self, t):
        t = np.asarray(t, dtype=float)
        out = np.ones_like(t)
        for start, stop, poly in self._segments():
            mask = (t >= start) & (t <= stop)
            out[mask] = poly(t[mask])
        return out

    def deviation(self, t):
        t = np.asarray(t, dtype=float)
        k = 2.0 * math.pi * np.arange(1, self.n_modes + 1) / self.tau
        arg = np.multiply.outer(t, k)
        series = np.cos(arg) @ np.array(self.a) + np.sin(arg) @ np.array(self.b)
        return self.mu / (2.0 * self.n_modes) * self.envelope(t) * series

    def _raw_phase(self, t):
        """Integral of the deviation from 0 to t, exact piece by piece."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        scale = self.mu / (2.0 * self.n_modes)
        z = np.array(self.a) - 1j * np.array(self.b)
        k = 2.0 * math.pi * np.arange(1, self.n_modes + 1) / self.tau
        out = np.zeros_like(t)
        offset = 0.0
        for start, stop, poly in self._segments():
            derivs, d = [], poly
            while d.coef.any():
                derivs.append(d)
                d = d.deriv()

            def antiderivative(x):
                x = np.asarray(x, dtype=float)
                acc = np.zeros(x.shape + k.shape, dtype=complex)
                for j, d in enumerate(derivs):
                    acc += ((-1) ** j) * np.multiply.outer(d(x), 1.0 / (1j * k) ** (j + 1))
                return np.real((np.exp(1j * np.multiply.outer(x, k)) * acc) @ z)

            base = antiderivative(np.array(start))
            mask = (t >= start) & (t <= stop)
            out[mask] = offset + scale * (antiderivative(t[mask]) - base)
            offset += scale * (antiderivative(np.array(stop)) - base)
        return out

    def mean_offset(self):
        """Cycle average of omega(t) - omega0; nonzero because of the envelope."""
        return float(self._raw_phase(self.tau)[0] / self.tau)

    def phase(self, t):
        """Accumulated phase relative to the true cycle-averaged frequency."""
        t = np.asarray(t, dtype=float)
        return self._raw_phase(t).reshape(t.shape) - self.mean_offset() * t


@dataclass(frozen=True)
class SinusoidalWaveform:
    """omega(t) = omega0 + lam * nu * sin(nu t)."""

    omega0: float
    lam: float
    nu: float

    @property
    def tau(self):
        return 2.0 * math.pi / self.nu

    @property
    def breakpoints(self):
        return (0.0, self.tau)

    def deviation(self, t):
        return self.lam * self.nu * np.sin(self.nu * np.asarray(t, dtype=float))

    def phase(self, t):
        return self.lam * (1.0 - np.cos(self.nu * np.asarray(t, dtype=float)))


def crab_frequency(w, t):
    """Instantaneous base frequency of a CRAB waveform, 0 <= t <= tau."""
    if not 0.0 <= t <= w.tau:
        raise DomainError(f"t={t} outside [0, tau]")
    return float(w.omega0 + w.deviation(np.array([t]))[0])


def _overlaps(w, qs, panels):
    """eta(q) = (1/tau) int_0^tau exp(-i phi(t)) exp(i q nu t) dt, composite GL."""
    nodes, wts = [], []
    bps = w.breakpoints
    length = bps[-1] - bps[0]
    for start, stop in zip(bps[:-1], bps[1:]):
        m = max(1, int(round(panels * (stop - start) / length)))
        edges = np.linspace(start, stop, m + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[:-1] + edges[1:])
        nodes.append((mid[:, None] + half[:, None] * _GL_X).ravel())
        wts.append((half[:, None] * _GL_W).ravel())
    t = np.concatenate(nodes)
    wt = np.concatenate(wts)
    base = np.exp(-1j * w.phase(t)) * wt
    nu = 2.0 * math.pi / w.tau
    return np.exp(1j * nu * np.multiply.outer(qs, t)) @ base / w.tau


def weights_from_waveform(w, q_max=3, tol=1e-10, max_panels=1 << 16):
    """Harmonic weights P_q = |eta(q)|^2 for |q| <= q_max.

    The panel count starts at 256 nodes and doubles until every retained
    weight changes by less than ``tol``.
    """
    if q_max < 1:
        raise DomainError("q_max must be at least 1")
    qs = np.arange(-q_max, q_max + 1)
    panels = 256 // _GL_ORDER
    prev = np.abs(_overlaps(w, qs, panels)) ** 2
    while True:
        panels *= 2
        cur = np.abs(_overlaps(w, qs, panels)) ** 2
        if np.max(np.abs(cur - prev)) < tol:
            break
        if panels >= max_panels:
            raise NumericalError(
                "harmonic quadrature did not converge",
                estimate=float(1.0 - cur.sum()),
            )
        prev = cur
    weights = {int(q): float(p) for q, p in zip(qs, cur)}
    return HarmonicSpectrum(
        weights,
        nu=2.0 * math.pi / w.tau,
        deficit=float(1.0 - cur.sum()),
        label=type(w).__name__,
    )
