"""Parameter sweeps and optimization runs writing CSV, SVG and JSON artifacts."""
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .analysis import amplification_analytic, amplification_numeric, fano_bound
from .cumulants import cumulants
from .errors import FQTError, OptimizationFailed
from .liouvillian import BATHS, aux_rates
from .modulation import weights_pi_flip, weights_sinusoidal, weights_unmodulated
from .optimizer import beta_probe, optimize
from .svg import line_chart

HEADER = ("var,J_E,J_B,J_C,var_E,var_B,var_C,fano_E,fano_B,fano_C,"
          "bound_E,bound_B,bound_C,beta_plus,beta_minus,diverged").split(",")


def fmt(x):
    """12 significant digits in scientific notation; non-finite values spelled out."""
    if x is None:
        return "nan"
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.11e}"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return fmt(obj)
    return obj


def write_json(path, record):
    path.write_text(json.dumps(_jsonable(record), indent=2, sort_keys=True) + "\n")


def _stamp(config):
    return {
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "config": config.echo(),
    }


@dataclass
class Row:
    var: float
    values: dict = None  # None marks a failed grid point
    error: str = ""

    @property
    def ok(self):
        return self.values is not None


def point(params, spectrum, generator="full", method="taylor", convention="direct"):
    """Currents, variances, Fano factors and bounds at one parameter point."""
    c = cumulants(params, spectrum, kind=generator, method=method)
    temps = {a: params.temperature(a) for a in BATHS}
    out = {}
    for a in BATHS:
        out[f"J_{a}"] = c.mean[a]
        out[f"var_{a}"] = c.variance[a]
        out[f"fano_{a}"] = c.fano[a]
        out[f"bound_{a}"] = fano_bound(c.mean, temps, params.delta, a, convention)
    return out


def _point_task(args):
    var, params, spectrum, config, probe_beta = args
    try:
        values = point(params, spectrum, config.generator, config.method,
                       config.entropy_convention)
        if probe_beta:
            bp, bm, div = beta_probe(params, spectrum, params.t_b, config.beta_probe)
            values.update(beta_plus=bp, beta_minus=bm, diverged=div)
        return Row(var, values)
    except (FQTError, ArithmeticError, ValueError) as exc:
        return Row(var, None, f"{type(exc).__name__}: {exc}")


def _map(fn, tasks, threads):
    if threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, tasks))
    return [fn(t) for t in tasks]


def _tasks(config, protocol):
    """(var, params, spectrum, config, probe_beta) for every grid point of one protocol."""
    out = []
    p = config.params
    for v in config.grid.values():
        try:
            if config.mode == "sweep-tb":
                spec = protocol.spectrum()
                params = p.replace(t_b=v)
            else:
                spec = protocol.spectrum(v)
                params = p
        except (FQTError, ValueError) as exc:
            out.append((v, exc))
            continue
        probe = config.mode == "sweep-nu" and not p.tb_zero and p.t_b > config.beta_probe
        out.append((v, params, spec, config, probe))
    return out


def _attach_sweep_beta(rows):
    """beta_+- along a T_B sweep from the successful rows."""
    good = [r for r in rows if r.ok]
    for r in rows:
        if r.ok:
            r.values.update(beta_plus=math.nan, beta_minus=math.nan, diverged=False)
    if len(good) < 3:
        return
    sweep = [(r.var, r.values["J_B"], r.values["J_C"], r.values["J_E"]) for r in good]
    for r, amp in zip(good, amplification_numeric(sweep)):
        r.values.update(beta_plus=amp.beta_plus, beta_minus=amp.beta_minus,
                        diverged=amp.diverged)


def sweep_rows(config, protocol):
    tasks = _tasks(config, protocol)
    ready = [t for t in tasks if len(t) == 5]
    computed = iter(_map(_point_task, ready, config.threads))
    rows = []
    for t in tasks:
        if len(t) == 5:
            rows.append(next(computed))
        else:
            rows.append(Row(t[0], None, f"{type(t[1]).__name__}: {t[1]}"))
    if config.mode == "sweep-tb":
        _attach_sweep_beta(rows)
    else:
        for r in rows:
            if r.ok:
                r.values.setdefault("beta_plus", math.nan)
                r.values.setdefault("beta_minus", math.nan)
                r.values.setdefault("diverged", False)
    return rows


def csv_text(rows):
    lines = [",".join(HEADER)]
    for r in rows:
        if r.ok:
            v = r.values
            cells = [fmt(r.var)] + [fmt(v[k]) for k in HEADER[1:-1]]
            cells.append("1" if v["diverged"] else "0")
        else:
            cells = [fmt(r.var)] + ["nan"] * (len(HEADER) - 2) + ["0"]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def run_sweep(config, log=sys.stderr):
    """Write one CSV (and SVG) per protocol plus a JSON record; returns the exit code."""
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    xlabel = "T_B/Delta" if config.mode == "sweep-tb" else "nu/Delta"
    record = _stamp(config)
    record["outputs"] = []
    total = failed = 0
    for protocol in config.protocols:
        rows = sweep_rows(config, protocol)
        stem = f"{config.name}_{protocol.name}"
        (out / f"{stem}.csv").write_text(csv_text(rows))
        if config.svg:
            series = {c: [r.values[c] if r.ok else None for r in rows] for c in config.svg_columns}
            (out / f"{stem}.svg").write_text(
                line_chart([r.var for r in rows], series, xlabel, "", f"{config.name} {protocol.name}"))
        n_bad = sum(not r.ok for r in rows)
        total += len(rows)
        failed += n_bad
        deficits = _deficits(config, protocol)
        record["outputs"].append({
            "csv": f"{stem}.csv",
            "protocol": protocol.name,
            "rows": len(rows),
            "failed": n_bad,
            "errors": {fmt(r.var): r.error for r in rows if not r.ok},
            "deficit": deficits,
        })
        print(f"{stem}.csv: {len(rows)} rows, {n_bad} failed", file=log)
    write_json(out / f"{config.name}.json", record)
    return 2 if failed == total else 0


def _deficits(config, protocol):
    if config.mode == "sweep-tb" or protocol.kind != "crab":
        try:
            return protocol.spectrum().deficit if config.mode == "sweep-tb" else \
                protocol.spectrum(config.grid.start).deficit
        except (FQTError, ValueError):
            return math.nan
    out = []
    for v in config.grid.values():
        try:
            out.append(protocol.spectrum(v).deficit)
        except (FQTError, ValueError):
            out.append(math.nan)
    return out


def _baselines(config, t_b, nu):
    p = config.params.replace(t_b=t_b)
    probe = config.optimizer.beta_probe
    out = {}
    specs = {
        "unmodulated": weights_unmodulated(),
        "sinusoidal": weights_sinusoidal(config.baseline_lam, nu),
        "pi-flip": weights_pi_flip(nu),
    }
    for name, spec in specs.items():
        entry = {"deficit": spec.deficit}
        try:
            c = cumulants(p, spec)
            entry.update(fano_E=c.fano["E"], J_E=c.mean["E"], J_B=c.mean["B"], J_C=c.mean["C"])
            if config.mode == "optimize-beta":
                bp, bm, div = beta_probe(config.params, spec, t_b, probe)
                entry.update(beta_plus=bp, beta_minus=bm, diverged=div)
                m = math.exp(-p.delta / p.t_e)
                entry["beta_plus_analytic"] = amplification_analytic(m, aux_rates(p, spec).r_of_0)[0]
        except (FQTError, ArithmeticError, ValueError) as exc:
            entry["error"] = str(exc)
        out[name] = entry
    return out


def trace_text(evaluations, n_modes):
    head = ["restart", "eval", "objective", "mu"]
    head += [f"a{i}" for i in range(1, n_modes + 1)] + [f"b{i}" for i in range(1, n_modes + 1)]
    lines = [",".join(head)]
    for e in evaluations:
        lines.append(",".join([str(e.restart), str(e.index), fmt(e.objective)]
                              + [fmt(v) for v in e.x]))
    return "\n".join(lines) + "\n"


def run_optimize(config, log=sys.stderr):
    """Optimize at every grid point (or the single configured point); returns the exit code."""
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    sweep_tb = config.mode == "optimize-beta"
    if config.grid is not None:
        values = config.grid.values()
    else:
        values = [config.params.t_b if sweep_tb else config.nu]
    record = _stamp(config)
    record["variable"] = "t_b" if sweep_tb else "nu"
    record["points"] = []
    code = 0
    for i, v in enumerate(values):
        t_b, nu = (v, config.nu) if sweep_tb else (config.params.t_b, v)
        trace = f"{config.name}_trace_{i:03d}.csv"
        entry = {"var": v, "t_b": t_b, "nu": nu, "trace": trace}
        try:
            res = optimize(config.optimizer, config.params, t_b, nu, threads=config.threads)
        except OptimizationFailed as exc:
            (out / trace).write_text(trace_text(exc.logs or [], config.optimizer.n_modes))
            entry["error"] = str(exc)
            record["points"].append(entry)
            print(f"point {i}: optimization failed: {exc}", file=log)
            code = 3
            continue
        (out / trace).write_text(trace_text(res.evaluations, config.optimizer.n_modes))
        w = res.waveform
        entry.update({
            "objective": res.objective,
            "mu": w.mu, "a": list(w.a), "b": list(w.b), "tau": w.tau,
            "envelope_fraction": w.envelope_fraction,
            "spectrum": res.spectrum.to_json(),
            "currents": res.currents,
            "fano_E": res.fano_e,
            "beta_minus": res.beta_minus,
            "evaluations": len(res.evaluations),
            "diverged_evaluations": sum(e.diverged for e in res.evaluations),
            "failed_evaluations": sum(e.failed for e in res.evaluations),
            "baselines": _baselines(config, t_b, nu),
        })
        record["points"].append(entry)
        print(f"point {i} ({record['variable']}={v:.6g}): objective {res.objective:.6g}", file=log)
    write_json(out / f"{config.name}.json", record)
    if config.svg and len(values) > 1:
        ok = [p for p in record["points"] if "objective" in p]
        series = {"optimized": [p["objective"] for p in ok]}
        key = "beta_plus" if sweep_tb else "fano_E"
        for name in ("sinusoidal", "pi-flip", "unmodulated"):
            series[name] = [p["baselines"][name].get(key) for p in ok]
        (out / f"{config.name}.svg").write_text(
            line_chart([p["var"] for p in ok], series,
                       "T_B/Delta" if sweep_tb else "nu/Delta", key, config.name))
    return code
