"""Invariant suite behind ``fqt validate``."""
import math
from dataclasses import dataclass

import numpy as np
import scipy.special

from .analysis import (
    amplification_numeric,
    closed_form_inputs,
    currents_exact_lowT,
    fano_bound,
)
from .cumulants import (
    cgf_cumulants,
    eigenvalue_cumulants,
    generator_cumulants,
)
from .liouvillian import BATHS, build_full, build_low_t
from .modulation import (
    SinusoidalWaveform,
    weights_from_waveform,
    weights_sinusoidal,
    weights_unmodulated,
)


@dataclass
class Check:
    name: str
    passed: bool
    detail: str
    gating: bool = True

    def line(self):
        tag = "PASS" if self.passed else ("FAIL" if self.gating else "WARN")
        return f"{tag} {self.name}: {self.detail}"


def _spectra(nu=0.2):
    return {"unmodulated": weights_unmodulated(), "sinusoidal": weights_sinusoidal(0.8, nu)}


def check_trace_preservation(params):
    worst = 0.0
    for spec in _spectra().values():
        for build in (build_full, build_low_t):
            m = build(params, spec).rates
            worst = max(worst, np.max(np.abs(m.sum(axis=0))) / np.max(np.abs(m)))
    return Check("trace preservation", worst < 1e-12, f"max |column sum|/norm = {worst:.2e}")


def check_conservation(params):
    worst = 0.0
    for spec in _spectra().values():
        c = generator_cumulants(build_full(params, spec))
        worst = max(worst, c.conservation_error())
    return Check("current conservation", worst <= 1e-8, f"max |sum J|/max|J| = {worst:.2e}")


def check_oracle_triangle(params, points=10, seed=0):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(points):
        p = params.replace(t_b=rng.uniform(0.05, 0.12))
        spec = weights_sinusoidal(rng.uniform(0.0, 0.8), rng.uniform(0.01, 0.5))
        g = build_full(p, spec)
        c = generator_cumulants(g)
        for a in BATHS:
            trio = [(c.mean[a], c.variance[a]), eigenvalue_cumulants(g, a), cgf_cumulants(g, a)]
            for i in range(3):
                for j in range(i + 1, 3):
                    for k in range(2):
                        x, y = trio[i][k], trio[j][k]
                        worst = max(worst, abs(x - y) / max(abs(x), abs(y)))
    return Check("oracle triangle", worst < 1e-4, f"max pairwise relative difference = {worst:.2e}")


def check_closed_form(params):
    worst = 0.0
    specs = [weights_unmodulated()] + [weights_sinusoidal(0.8, nu) for nu in (0.05, 0.2, 0.5)]
    for spec in specs:
        for t_b in np.linspace(0.05, 0.12, 8):
            p = params.replace(t_b=float(t_b))
            c = generator_cumulants(build_full(p, spec))
            ref = currents_exact_lowT(closed_form_inputs(p, spec))
            for a, r in zip(BATHS, ref):
                worst = max(worst, abs(c.mean[a] - r) / abs(r))
    return Check("closed-form agreement", worst < 1e-2, f"max relative difference = {worst:.2e}")


def check_bounds(params):
    out = []
    bad_ec, bad_b, bad_b_diag = [], [], []
    for t_b in np.linspace(0.06, 0.12, 7):
        p = params.replace(t_b=float(t_b))
        for nu, spec in [(0.0, weights_unmodulated())] + [
                (nu, weights_sinusoidal(0.8, nu)) for nu in (0.05, 0.1, 0.5)]:
            c = generator_cumulants(build_full(p, spec))
            temps = {a: p.temperature(a) for a in BATHS}
            for a in BATHS:
                f = abs(c.fano[a])
                bound = fano_bound(c.mean, temps, p.delta, a)
                if f >= bound:
                    continue
                tag = f"{a}@T_B={t_b:.3f},nu={nu:g} ({f:.6f} < {bound:.6f})"
                if a in "EC" and nu == 0.0:
                    bad_ec.append(tag)
                elif a == "B" and t_b <= 0.08 + 1e-12 and nu <= 0.1:
                    bad_b.append(tag)
                elif a == "B":
                    bad_b_diag.append(tag)
    out.append(Check("Fano bound E,C (unmodulated)", not bad_ec,
                     f"{len(bad_ec)} violations" + (f", first {bad_ec[0]}" if bad_ec else "")))
    out.append(Check("Fano bound B (T_B<=0.08, nu<=0.1)", not bad_b,
                     f"{len(bad_b)} violations" + (f", first {bad_b[0]}" if bad_b else "")))
    out.append(Check("Fano bound B elsewhere", not bad_b_diag,
                     f"{len(bad_b_diag)} violations", gating=False))
    return out


def check_bessel(lam=0.8, nu=0.3, q_max=8):
    spec = weights_from_waveform(SinusoidalWaveform(0.0, lam, nu), q_max=q_max)
    err = max(abs(spec[q] - scipy.special.jv(q, lam) ** 2) for q in range(-q_max, q_max + 1))
    return Check("Bessel quadrature", err < 1e-8, f"max |P_q - J_q^2| = {err:.2e}")


def check_amplification(params):
    t = np.round(np.arange(0.02, 0.18 + 1e-9, 0.0025), 6)
    sweep = []
    for t_b in t:
        c = generator_cumulants(build_full(params.replace(t_b=float(t_b)), weights_unmodulated()))
        sweep.append((t_b, c.mean["B"], c.mean["C"], c.mean["E"]))
    amp = amplification_numeric(sweep)
    worst = max(abs(a.beta_plus + a.beta_minus + 1) for a in amp if not a.diverged)
    flagged = [a.t_b for a in amp if a.diverged]
    located = any(0.115 <= x <= 0.135 for x in flagged)
    return [
        Check("beta_+ + beta_- = -1", worst < 1e-6, f"max deviation = {worst:.2e}"),
        Check("beta divergence location", located,
              "divergent at T_B = " + (", ".join(f"{x:.4f}" for x in flagged) or "none")),
    ]


def run_checks(params, seed=0):
    checks = [
        check_trace_preservation(params),
        check_conservation(params),
        check_oracle_triangle(params, seed=seed),
        check_closed_form(params),
        *check_bounds(params),
        check_bessel(),
        *check_amplification(params),
    ]
    return checks


def all_gating_passed(checks):
    return all(c.passed for c in checks if c.gating)
