"""Acceptance criteria, one test each, at the stated tolerances.

Every test records a "CRITERION n: PASS/FAIL ..." line that is echoed in the
pytest terminal summary, then asserts.
"""
import json
import math

import numpy as np
import pytest
import scipy.special

from conftest import ACCEPTANCE
from fqt.analysis import closed_form_inputs, currents_exact_lowT, fano_bound
from fqt.config import PRESETS, build_config, read_toml
from fqt.cumulants import cgf_cumulants, eigenvalue_cumulants, generator_cumulants
from fqt.liouvillian import BATHS, build_full
from fqt.model import SystemParams
from fqt.modulation import (
    SinusoidalWaveform,
    weights_from_waveform,
    weights_pi_flip,
    weights_sinusoidal,
    weights_unmodulated,
)
from fqt.runner import run_optimize, run_sweep, sweep_rows

P = SystemParams(delta=1.0, t_e=0.2, t_c=0.02, kappa=1.0)
SEED = 20240601
SWEEP_PRESETS = [n for n in PRESETS if read_toml(n)["mode"].startswith("sweep")]


def record(n, passed, detail):
    ACCEPTANCE[f"{n:02d}"] = f"CRITERION {n}: {'PASS' if passed else 'FAIL'} {detail}"
    print(ACCEPTANCE[f"{n:02d}"])
    return passed


def preset_rows(name):
    config = build_config(read_toml(name))
    return {p.name: sweep_rows(config, p) for p in config.protocols}


def test_criterion_01_conservation():
    worst, where, failed = 0.0, "", 0
    for name in SWEEP_PRESETS:
        for proto, rows in preset_rows(name).items():
            for r in rows:
                if not r.ok:
                    failed += 1
                    continue
                j = [r.values[f"J_{a}"] for a in BATHS]
                err = abs(sum(j)) / max(abs(x) for x in j)
                if err > worst:
                    worst, where = err, f"{name}/{proto}@{r.var:.4g}"
    ok = worst <= 1e-8 and failed == 0
    assert record(1, ok, f"max |sum J|/max|J| = {worst:.2e} at {where} over "
                         f"{len(SWEEP_PRESETS)} presets, {failed} failed rows (tol 1e-8)")


def test_criterion_02_closed_form_oracle():
    worst, where = 0.0, ""
    specs = [("unmodulated", weights_unmodulated())]
    specs += [(f"sin nu={nu:g}", weights_sinusoidal(0.8, nu)) for nu in (0.05, 0.1, 0.2, 0.5)]
    for label, spec in specs:
        for t_b in np.linspace(0.05, 0.12, 15):
            p = P.replace(t_b=float(t_b))
            c = generator_cumulants(build_full(p, spec))
            ref = currents_exact_lowT(closed_form_inputs(p, spec))
            for a, r in zip(BATHS, ref):
                err = abs(c.mean[a] - r) / abs(r)
                if err > worst:
                    worst, where = err, f"J_{a}, {label}, T_B={t_b:.4f}"
    assert record(2, worst <= 1e-2, f"max relative difference {worst:.3e} at {where} (tol 1e-2)")


def test_criterion_03_unmodulated_point():
    c = generator_cumulants(build_full(P.replace(t_b=0.1), weights_unmodulated()))
    j_e, j_c = c.mean["E"], c.mean["C"]
    err_e = abs(j_e - 6.18e-4) / 6.18e-4
    err_c = abs(j_c + j_e) / abs(j_e)
    ok = err_e <= 5e-2 and err_c <= 1e-3
    assert record(3, ok, f"J_E = {j_e:.5e} (rel err {err_e:.3e}, tol 5e-2); "
                         f"|J_C + J_E|/|J_E| = {err_c:.3e} (tol 1e-3), J_B = {c.mean['B']:.3e}")


def test_criterion_04_fano_values():
    # bands apply to |F|: Var/<J> is negative for the outgoing B and C currents
    lo = {"E": math.inf, "B": math.inf, "C": math.inf}
    hi = {"E": -math.inf, "B": -math.inf, "C": -math.inf}
    for t_b in np.linspace(0.06, 0.12, 25):
        c = generator_cumulants(build_full(P.replace(t_b=float(t_b)), weights_unmodulated()))
        for a in BATHS:
            f = abs(c.fano[a])
            lo[a], hi[a] = min(lo[a], f), max(hi[a], f)
    band = {"E": (0.95, 1.05), "B": (1.9, 2.2), "C": (0.95, 1.05)}
    ok = all(band[a][0] <= lo[a] and hi[a] <= band[a][1] for a in BATHS)
    detail = "; ".join(f"|F_{a}| in [{lo[a]:.4f}, {hi[a]:.4f}] (band {band[a]})" for a in BATHS)
    detail += "; F_B, F_C signed negative"
    assert record(4, ok, detail)


def test_criterion_05_fano_bound():
    gating, logged = [], []
    margin = {a: math.inf for a in BATHS}
    for t_b in np.linspace(0.06, 0.12, 25):
        p = P.replace(t_b=float(t_b))
        temps = {a: p.temperature(a) for a in BATHS}
        cases = [(0.0, weights_unmodulated())]
        cases += [(nu, weights_sinusoidal(0.8, nu)) for nu in (0.05, 0.1, 0.3, 0.5)]
        for nu, spec in cases:
            c = generator_cumulants(build_full(p, spec))
            for a in BATHS:
                bound = fano_bound(c.mean, temps, p.delta, a)
                f = abs(c.fano[a])
                held = f >= bound
                if a in "EC" and nu == 0.0:
                    margin[a] = min(margin[a], f - bound)
                    if not held:
                        gating.append(f"{a}@{t_b:.3f}")
                elif a == "B" and t_b <= 0.08 + 1e-12 and nu <= 0.1:
                    margin[a] = min(margin[a], f - bound)
                    if not held:
                        gating.append(f"B@{t_b:.3f},nu={nu:g}")
                elif not held:
                    logged.append(f"B@{t_b:.3f},nu={nu:g}")
    detail = (f"{len(gating)} gating violations {gating[:3]}; min(F - bound) "
              + ", ".join(f"{a}: {margin[a]:.2e}" for a in BATHS)
              + f"; {len(logged)} non-gating B violations logged")
    assert record(5, not gating, detail)


def test_criterion_06_oracle_triangle():
    rng = np.random.default_rng(SEED)
    worst, where = 0.0, ""
    for _ in range(100):
        t_b, nu, kind = rng.uniform(0.02, 0.18), rng.uniform(0.01, 1.0), int(rng.integers(3))
        spec = [weights_unmodulated(), weights_sinusoidal(0.8, nu), weights_pi_flip(nu)][kind]
        g = build_full(P.replace(t_b=t_b), spec)
        c = generator_cumulants(g)
        for a in BATHS:
            trio = [(c.mean[a], c.variance[a]), eigenvalue_cumulants(g, a), cgf_cumulants(g, a)]
            for i in range(3):
                for j in range(i + 1, 3):
                    for k in range(2):
                        x, y = trio[i][k], trio[j][k]
                        err = abs(x - y) / max(abs(x), abs(y))
                        if err > worst:
                            worst = err
                            where = f"{('mean', 'var')[k]}_{a}, T_B={t_b:.4f}, nu={nu:.3f}"
    assert record(6, worst <= 1e-4, f"100 points, max pairwise relative difference "
                                    f"{worst:.2e} at {where} (tol 1e-4)")


def test_criterion_07_analytic_amplification():
    rows = preset_rows("fig8")
    targets = {"unmodulated": 148.66, "sinusoidal": 148.66, "pi-flip": 166.07}
    worst_plateau, worst_identity = 0.0, 0.0
    parts = []
    for proto, target in targets.items():
        plateau = [r.values["beta_plus"] for r in rows[proto] if r.var <= 0.08 + 1e-12]
        err = max(abs(b - target) / target for b in plateau)
        worst_plateau = max(worst_plateau, err)
        parts.append(f"{proto} {min(plateau):.2f}..{max(plateau):.2f} vs {target}")
        for r in rows[proto]:
            bp, bm = r.values["beta_plus"], r.values["beta_minus"]
            if math.isfinite(bp) and math.isfinite(bm):
                worst_identity = max(worst_identity, abs(bp + bm + 1))
    ok = worst_plateau <= 0.1 and worst_identity <= 1e-6
    assert record(7, ok, f"plateau T_B<=0.08: {'; '.join(parts)}, max rel err "
                         f"{worst_plateau:.2e} (tol 0.1); max |beta+ + beta- + 1| = "
                         f"{worst_identity:.2e} (tol 1e-6)")


def test_criterion_08_divergence_location():
    rows = preset_rows("fig8")["unmodulated"]
    flagged = [r.var for r in rows if r.values["diverged"]]
    ok = bool(flagged) and all(0.115 <= x <= 0.135 for x in flagged)
    assert record(8, ok, f"divergence flagged at T_B = {[round(x, 4) for x in flagged]} "
                         f"(window [0.115, 0.135])")


def test_criterion_09_bessel_quadrature():
    worst = 0.0
    for lam in (0.1, 0.5, 0.8, 1.5):
        for nu in (0.01, 0.3, 1.0):
            spec = weights_from_waveform(SinusoidalWaveform(0.0, lam, nu), q_max=8)
            for q in range(-8, 9):
                worst = max(worst, abs(spec[q] - scipy.special.jv(q, lam) ** 2))
    assert record(9, worst < 1e-8, f"max |P_q - J_q(lam)^2| = {worst:.2e} (tol 1e-8)")


def _single_point(name, **changes):
    data = read_toml(name)
    data.pop("grid")
    for section, values in changes.items():
        data.setdefault(section, {}).update(values)
    return data


# criterion 10 at the fig4 preset point T_B = 0.08 and the first fig6 grid point nu = 0.05
OPT_POINTS = {
    "fig4": _single_point("fig4", params={"t_b": 0.08}),
    "fig6": _single_point("fig6", optimizer={"nu": 0.05}),
}


@pytest.fixture(scope="module")
def optimize_runs(tmp_path_factory):
    """Each single-point optimization run twice into separate directories."""
    out = {}
    for name, data in OPT_POINTS.items():
        dirs = []
        for rep in ("a", "b"):
            d = tmp_path_factory.mktemp(f"{name}{rep}")
            config = build_config(data, out=str(d))
            assert run_optimize(config) == 0
            dirs.append(d)
        out[name] = dirs
    return out


@pytest.mark.slow
def test_criterion_10_crab_improvement(optimize_runs):
    beta = json.loads((optimize_runs["fig4"][0] / "fig4.json").read_text())["points"][0]
    sin_beta = beta["baselines"]["sinusoidal"]["beta_plus"]
    factor = beta["objective"] / sin_beta
    fano = json.loads((optimize_runs["fig6"][0] / "fig6.json").read_text())["points"][0]
    base = fano["baselines"]["sinusoidal"]
    f_opt, f_base = fano["fano_E"], base["fano_E"]
    jb_opt, jb_base = abs(fano["currents"]["B"]), abs(base["J_B"])
    ok = factor >= 1.5 and f_opt < f_base and jb_opt > jb_base
    assert record(10, ok, f"beta+ {beta['objective']:.4g} vs sinusoidal {sin_beta:.4g} "
                          f"(factor {factor:.3g}, need >= 1.5); F_E {f_opt:.6f} vs {f_base:.6f}, "
                          f"|J_B| {jb_opt:.4e} vs {jb_base:.4e}")


def _strip(path):
    if path.suffix != ".json":
        return path.read_bytes()
    d = json.loads(path.read_text())
    d.pop("timestamp")
    d["config"].pop("out")
    return d


@pytest.mark.slow
def test_criterion_11_determinism(tmp_path, optimize_runs):
    mismatched, compared = [], 0
    for name in SWEEP_PRESETS:
        for rep in ("a", "b"):
            assert run_sweep(build_config(read_toml(name), out=str(tmp_path / rep))) == 0
    pairs = [(tmp_path / "a", tmp_path / "b")] + [tuple(d) for d in optimize_runs.values()]
    for a, b in pairs:
        files = sorted(p.name for p in a.iterdir())
        assert files == sorted(p.name for p in b.iterdir())
        for f in files:
            compared += 1
            if _strip(a / f) != _strip(b / f):
                mismatched.append(f)
    assert record(11, not mismatched, f"{compared} artifacts from {len(SWEEP_PRESETS)} sweep "
                                      f"presets and 2 optimize points compared, "
                                      f"{len(mismatched)} differ {mismatched[:3]}")
