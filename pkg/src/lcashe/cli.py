"""``shecli``: run experiments from config files and write CSV/JSON artifacts.

Exit codes: 0 success, 1 a verification check failed, 2 config error,
3 numeric failure.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import platform
import sys
import time
from pathlib import Path

import numpy as np
import scipy

from .catalog import catalog
from .config import ExperimentConfig, default_config, load_config, parse_config, schema_text
from .errors import ConfigError, NumericFailure, SheError
from .excitation import dichotomy_report, fit_index, predicted_index, sweep
from .groups import Product, points
from .initial import InitialCondition
from .moments import lower_bound_series, solve_volterra, upper_bound_picard
from .montecarlo import invariance_check, local_time_identity, simulate_energy, simulate_grid
from .sigma import Linear
from .spectral import dalang_check, heat_kernel, tauberian_check, upsilon
from . import verify

__all__ = ["main", "run_experiment"]

VERSION = "0.1.0"


def _f(x) -> str:
    """Shortest round-trip float text; stable across runs."""
    x = float(x)
    if np.isnan(x):
        return "nan"
    if np.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if np.isfinite(x) else _f(x)
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


class Writer:
    """Collects output files and writes them inside one directory only."""

    def __init__(self, directory, formats):
        self.root = Path(directory).resolve()
        self.formats = set(formats)
        self.files: dict[str, bytes] = {}

    def _put(self, name: str, text: str):
        if "/" in name or "\\" in name or name.startswith("."):
            raise ValueError(f"refusing to write {name!r} outside the output directory")
        self.files[name] = text.encode("utf-8")

    def csv(self, name, header, rows):
        if "csv" not in self.formats:
            return
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_f(v) if isinstance(v, (float, np.floating)) else v for v in r])
        self._put(name, buf.getvalue())

    def json(self, name, obj):
        if "json" not in self.formats:
            return
        self._put(name, json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")

    def text(self, name, text):
        self._put(name, text)

    def flush(self):
        self.root.mkdir(parents=True, exist_ok=True)
        for name, data in self.files.items():
            path = (self.root / name).resolve()
            if path.parent != self.root:
                raise ValueError(f"refusing to write {path} outside {self.root}")
            path.write_bytes(data)


# ---------------------------------------------------------------------------
# experiments


def _kernel(cfg: ExperimentConfig, out: Writer, summary: list):
    m = cfg.model
    p = heat_kernel(m, cfg.t)
    pts = points(m.group)
    if isinstance(m.group, Product):
        grids = np.meshgrid(*[np.asarray(x).reshape(len(x), -1)[:, 0] if np.ndim(x) > 1 else x
                              for x in pts], indexing="ij")
        coords = np.stack([gr.ravel() for gr in grids], axis=1)
    else:
        coords = np.asarray(pts, dtype=float).reshape(p.size, -1)
    d = coords.shape[1]
    header = ["index"] + ([f"x{i + 1}" for i in range(d)] if d > 1 else ["x"]) + ["p"]
    out.csv("kernel.csv", header, [[i, *map(float, coords[i]), float(p[i])] for i in range(p.size)])
    out.json("kernel.json", {"t": cfg.t, "x": coords, "p": p})
    summary.append(f"heat kernel at t={cfg.t}: {p.size} points, max {p.max():.6g}")


def _upsilon(cfg: ExperimentConfig, out: Writer, summary: list):
    m = cfg.model
    u = np.atleast_1d(upsilon(m, cfg.betas))
    out.csv("upsilon.csv", ["beta", "upsilon"], zip(map(float, cfg.betas), map(float, u)))
    tb = tauberian_check(m, cfg.t)
    out.json("upsilon.json", {"beta": cfg.betas, "upsilon": u, "dalang": dalang_check(m).name,
                              "tauberian": {"t": cfg.t, "lower": tb.lhs, "middle": tb.mid,
                                            "upper": tb.rhs, "ok": tb.ok}})
    summary.append(f"Upsilon on {u.size} betas; Tauberian sandwich at t={cfg.t}: "
                   f"{'holds' if tb.ok else 'fails'}")


def _volterra(cfg: ExperimentConfig, out: Writer, summary: list):
    lam = float(cfg.lambdas[0])
    grid = np.linspace(0.0, cfg.t, cfg.numerics.t_points)
    curve = solve_volterra(cfg.model, cfg.u0, cfg.sigma, lam, grid)
    out.csv("energy.csv", ["t", "log_energy_sq"], zip(map(float, curve.t_grid), map(float, curve.log_energy_sq)))
    lo = lower_bound_series(cfg.model, cfg.u0, cfg.sigma, lam, cfg.t)
    hi = upper_bound_picard(cfg.model, cfg.sigma, cfg.u0, lam, cfg.t, cfg.numerics.eps)
    out.json("energy.json", {"lambda": lam, "method": curve.method, "t": curve.t_grid,
                             "log_energy_sq": curve.log_energy_sq, "lower_bound": lo,
                             "upper_bound": hi, "steps": curve.steps, "diagnostics": curve.meta})
    summary.append(f"log E||u_t||^2 at t={cfg.t}, lambda={lam:g}: {curve.log_energy_sq[-1]:.10g} "
                   f"(bounds [{lo:.6g}, {hi:.6g}])")


def _mc(cfg: ExperimentConfig, out: Writer, summary: list):
    lam = float(cfg.lambdas[0])
    sim = cfg.sim_config()
    if cfg.model.group.is_finite:
        est = simulate_energy(cfg.model, cfg.u0, cfg.sigma, lam, sim,
                              keep_samples=cfg.numerics.keep_paths)
    else:
        est = simulate_grid(cfg.model, cfg.u0, cfg.sigma, lam, sim)
    res = est.as_dict()
    res.update({"lambda": lam, "t": cfg.t, "dt": sim.dt})
    if isinstance(cfg.sigma, Linear) and cfg.model.group.is_finite:
        try:
            ex = float(np.exp(solve_volterra(cfg.model, cfg.u0, cfg.sigma, lam, [0.0, cfg.t])
                              .log_energy_sq[-1]))
            res["volterra"] = ex
            res["z_score"] = (est.mean - ex) / est.se if est.se > 0 else None
        except NumericFailure:
            pass
    out.json("mc.json", res)
    if est.samples is not None:
        out.csv("paths.csv", ["path_id", "energy_sq"], ((i, float(v)) for i, v in enumerate(est.samples)))
    summary.append(f"MC E||u_t||^2 = {est.mean:.6g} +/- {est.se:.3g} ({est.n_paths} paths, seed {est.seed})")


def _sweep(cfg: ExperimentConfig, out: Writer, summary: list):
    n = cfg.numerics
    sw = sweep(cfg.model, cfg.sigma, cfg.u0, cfg.t, cfg.lambdas, n.source, eps=n.eps,
               threads=n.threads, sim_cfg=cfg.sim_config() if n.source == "mc" else None)
    out.csv("sweep.csv", ["lambda", "log_energy_sq", "log_log_energy"],
            zip(map(float, sw.lambdas), map(float, sw.log_energy_sq), map(float, sw.log_log_energy)))
    pred, tag = predicted_index(cfg.model, cfg.sigma)
    info = {"source": n.source, "t": cfg.t, "lambda": sw.lambdas, "log_energy_sq": sw.log_energy_sq,
            "log_log_energy": sw.log_log_energy, "failures": sw.failures,
            "predicted": pred, "predicted_tag": tag}
    try:
        est = fit_index(sw, n.tail_fraction, pred)
        info["fit"] = {"slope": est.slope, "ci": est.ci_halfwidth, "n_points": est.n_points,
                       "verdict": est.verdict}
        summary.append(f"sweep ({n.source}): fitted index {est.slope:.4f} +/- {est.ci_halfwidth:.4f}, "
                       f"predicted {pred if pred is not None else 'n/a'} ({tag}), verdict {est.verdict}")
    except SheError as exc:
        info["fit"] = None
        summary.append(f"sweep ({n.source}): no index fit ({exc})")
    out.json("sweep.json", info)


def _localtime(cfg: ExperimentConfig, out: Writer, summary: list):
    r = local_time_identity(cfg.model, cfg.numerics.n_paths, cfg.numerics.seed)
    out.json("localtime.json", {"lhs": r.lhs, "se": r.se, "rhs": r.rhs,
                                "literal_2_upsilon_1": r.literal_rhs, "ok": r.ok,
                                "literal_ok": r.literal_ok, "n_paths": cfg.numerics.n_paths,
                                "seed": cfg.numerics.seed})
    summary.append(f"local time: E sum l^2 = {r.lhs:.6g} +/- {r.se:.2g}, "
                   f"sum m/(1+Re Psi) = {r.rhs:.6g} ({'ok' if r.ok else 'MISMATCH'}); "
                   f"2 Upsilon(1) = {r.literal_rhs:.6g} ({'agrees' if r.literal_ok else 'discrepant'})")
    return r.ok


def _invariance(cfg: ExperimentConfig, out: Writer, summary: list):
    r = invariance_check(cfg.model, cfg.isomorphism, cfg.u0, cfg.sigma, float(cfg.lambdas[0]),
                         cfg.sim_config())
    out.json("invariance.json", {"max_abs_diff": r.max_abs_diff, "ok": r.ok})
    summary.append(f"invariance: max |v(hx) - u(x)| = {r.max_abs_diff:.3e} ({'ok' if r.ok else 'FAIL'})")
    return r.ok


def _dichotomy(cfg: ExperimentConfig, out: Writer, summary: list):
    if cfg.models:
        entries = [(e.model_id, e.model, e.sigma, e.u0) for e in cfg.models]
    else:
        entries = [(k, m, Linear(1.0), InitialCondition()) for k, m in catalog().items()]
    lams = cfg.lambdas if "lambda" in cfg.raw else None
    rows = dichotomy_report(entries, cfg.t, lams)
    header = ["model_id", "kind", "source", "slope", "ci", "predicted", "verdict"]
    out.csv("dichotomy.csv", header,
            [[r.model_id, r.kind, r.source, r.slope, r.ci_halfwidth,
              "" if r.predicted is None else r.predicted, r.verdict] for r in rows])
    out.json("dichotomy.json", [{"model_id": r.model_id, "kind": r.kind, "source": r.source,
                                 "slope": r.slope, "ci": r.ci_halfwidth, "predicted": r.predicted,
                                 "verdict": r.verdict, "pass": r.passed, "note": r.note}
                                for r in rows])
    for r in rows:
        summary.append(f"{r.model_id}: {r.kind}, index {r.slope:.4f} +/- {r.ci_halfwidth:.4f} "
                       f"({r.source}), verdict {r.verdict}, {'PASS' if r.passed else 'FAIL'}")
    return all(r.passed for r in rows)


def _verify(cfg: ExperimentConfig, out: Writer, summary: list):
    res = verify.run_all(n_paths=cfg.numerics.n_paths, seed=cfg.numerics.seed)
    out.csv("verify.csv", ["check", "ok", "detail"], [[r.name, r.ok, r.detail] for r in res])
    out.json("verify.json", [{"check": r.name, "ok": r.ok, "detail": r.detail} for r in res])
    summary.extend(r.line() for r in res)
    n_ok = sum(r.ok for r in res)
    summary.append(f"{n_ok}/{len(res)} checks passed")
    return n_ok == len(res)


_RUNNERS = {"kernel": _kernel, "upsilon": _upsilon, "volterra": _volterra, "mc": _mc,
            "sweep": _sweep, "localtime": _localtime, "invariance": _invariance,
            "dichotomy": _dichotomy, "verify-all": _verify}


def run_experiment(cfg: ExperimentConfig, directory: str | None = None) -> tuple:
    """Run one experiment and write its files. Returns ``(ok, output_dir)``."""
    directory = os.environ.get("SHE_OUTPUT_DIR") or directory or cfg.output_dir
    out = Writer(directory, cfg.formats)
    summary = [f"experiment: {cfg.experiment}"]
    t0 = time.perf_counter()
    ok = _RUNNERS[cfg.experiment](cfg, out, summary)
    ok = True if ok is None else bool(ok)
    summary.append("result: " + ("ok" if ok else "verification failure"))
    out.text("summary.txt", "\n".join(summary) + "\n")
    wall = time.perf_counter() - t0
    canon = json.dumps(_jsonable(cfg.raw), sort_keys=True, separators=(",", ":"))
    manifest = {
        "schema": "shecli/1",
        "config": _jsonable(cfg.raw),
        "config_sha256": hashlib.sha256(canon.encode()).hexdigest(),
        "files": {k: hashlib.sha256(v).hexdigest() for k, v in sorted(out.files.items())},
        "versions": {"artifact": VERSION, "python": platform.python_version(),
                     "numpy": np.__version__, "scipy": scipy.__version__},
        "wall_time_s": wall,
    }
    out.text("manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    out.flush()
    return ok, str(out.root)


# ---------------------------------------------------------------------------
# entry point


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="shecli", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="cmd", required=True)
    r = sub.add_parser("run", help="run the experiment described by a config (TOML or manifest JSON)")
    r.add_argument("config")
    v = sub.add_parser("verify-all", help="run every verification suite")
    v.add_argument("--config", help="config overriding numerics/output (default: bundled)")
    sub.add_parser("print-schema", help="print an annotated config template")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.cmd == "print-schema":
        sys.stdout.write(schema_text())
        return 0
    try:
        if args.cmd == "run":
            cfg = load_config(args.config)
        elif args.config:
            cfg = load_config(args.config)
            if cfg.experiment != "verify-all":
                raw = dict(cfg.raw, experiment="verify-all")
                for k in ("group", "levy", "isomorphism", "models", "lambda", "beta"):
                    raw.pop(k, None)
                cfg = parse_config(raw)
        else:
            cfg = default_config()
        ok, where = run_experiment(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericFailure as exc:
        print(f"numeric failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return 3
    except SheError as exc:
        print(f"error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return 2
    print((Path(where) / "summary.txt").read_text(encoding="utf-8"), end="")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
