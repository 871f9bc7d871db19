"""Command-line front end: JSON configs in, JSON reports out.

Exit codes: 0 success, 1 other domain error, 2 budget exhausted,
3 verification failed, 4 config error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import platform
import sys
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from . import __version__
from .cantor import AffineIFS, CantorSet, measure_lower_bound, set_from_json
from .certify import FORMAT as COVER_FORMAT, SearchBudget, certify_cover, verify_certificate
from .construct import TREE_FORMAT, TreeCertificate, build_chain, build_tree, construct_partner
from .errors import (AdmissibilityFailure, BudgetExhausted, CantorCertError, ConfigError,
                     DomainError, InvalidSet, MalformedSpec)
from .interval import Box2, Interval, format_rational, parse_rational
from .metrics import DimensionReport, dimension_report, moran_dimension, product_dimension_bounds, thickness
from .oracle import epsilon_cover, max_gap, sample_points, sampled_pinned_set
from .phi import parse_phi
from .trees import format_label, kb_order, parse_tree_spec

REPORT_FORMAT = "cantorcert/report"

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_BUDGET = 2
EXIT_VERIFY = 3
EXIT_CONFIG = 4


def canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1)


def config_hash(config: dict) -> str:
    return hashlib.sha256(json.dumps(config, sort_keys=True).encode()).hexdigest()


@dataclass
class Report:
    command: str
    status: str
    result: dict
    config_hash: str = ""
    mode: str = "exact"
    tool_version: str = __version__
    meta: dict = field(default_factory=dict)
    exit_code: int = EXIT_OK

    def body(self) -> dict:
        return {
            "format": REPORT_FORMAT,
            "command": self.command,
            "status": self.status,
            "exit_code": self.exit_code,
            "config_hash": self.config_hash,
            "mode": self.mode,
            "tool_version": self.tool_version,
            "result": self.result,
        }

    def to_json(self) -> dict:
        return dict(self.body(), meta=self.meta)

    def dumps(self) -> str:
        return canonical(self.to_json())

    @classmethod
    def from_json(cls, obj: dict) -> "Report":
        if obj.get("format") != REPORT_FORMAT:
            raise MalformedSpec(f"not a report: {obj.get('format')!r}")
        return cls(obj["command"], obj["status"], obj["result"], obj["config_hash"], obj["mode"],
                   obj["tool_version"], obj.get("meta", {}), obj["exit_code"])


# ---------------------------------------------------------------- config parsing

_NAMED = {
    "middle-thirds": AffineIFS.middle_thirds,
    "middle_thirds": AffineIFS.middle_thirds,
}


def _need(cfg: dict, key: str, where: str):
    if key not in cfg:
        raise ConfigError(f"{where}: missing field {key!r}")
    return cfg[key]


def parse_set(spec, named: Optional[dict] = None) -> CantorSet:
    """A set literal: a known name, a reference into ``named``, or a JSON object."""
    named = named or {}
    try:
        if isinstance(spec, str):
            if spec in named:
                return named[spec]
            if spec in _NAMED:
                return _NAMED[spec]()
            raise ConfigError(f"unknown set {spec!r}")
        if not isinstance(spec, dict):
            raise ConfigError(f"bad set declaration {spec!r}")
        kind = spec.get("kind")
        if kind == "uniform":
            hull = Interval.parse(spec["hull"]) if "hull" in spec else None
            return AffineIFS.uniform(parse_rational(spec["ratio"]), hull)
        if kind == "cell":
            base = parse_set(spec["of"], named)
            return base.cell_set(tuple(spec["address"]))
        return set_from_json(spec)
    except ConfigError:
        raise
    except (CantorCertError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad set declaration {spec!r}: {exc}") from exc


def _interval(obj, where: str) -> Interval:
    try:
        return Interval.parse(obj)
    except (CantorCertError, TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: bad interval {obj!r}") from exc


def _point(obj, where: str) -> tuple:
    try:
        x, y = obj
        return parse_rational(x), parse_rational(y)
    except (CantorCertError, TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: bad point {obj!r}") from exc


def _box(obj, where: str) -> Box2:
    if isinstance(obj, dict) and "center" in obj:
        c = _point(obj["center"], where)
        return Box2.square(c, parse_rational(_need(obj, "radius", where)))
    try:
        return Box2.parse(obj)
    except (CantorCertError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: bad box {obj!r}") from exc


@dataclass
class RunConfig:
    raw: dict
    sets: dict
    phi: Any
    budget: SearchBudget
    mode: str
    threads: int = 1
    seed: Optional[int] = None

    def section(self, name: str) -> dict:
        sec = self.raw.get(name)
        if not isinstance(sec, dict):
            raise ConfigError(f"config has no {name!r} section")
        return sec

    def set(self, name) -> CantorSet:
        return parse_set(name, self.sets)


def load_config(raw: dict, overrides: Optional[dict] = None) -> RunConfig:
    """Validate a config object and apply command-line overrides."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    ov = {k: v for k, v in (overrides or {}).items() if v is not None}
    sets: dict = {}
    for name, decl in (raw.get("sets") or {}).items():
        sets[name] = parse_set(decl, sets)
    try:
        phi = parse_phi(raw.get("phi", "euclidean"))
    except CantorCertError as exc:
        raise ConfigError(str(exc)) from exc
    b = dict(raw.get("budget") or {})
    if "max_depth" in ov:
        b["max_depth"] = ov["max_depth"]
    if "max_tasks" in ov:
        b["max_tasks"] = ov["max_tasks"]
    for key in ("max_depth", "max_tasks", "max_seconds"):
        if key in b and b[key] is not None and not (isinstance(b[key], (int, float)) and b[key] > 0):
            raise ConfigError(f"budget {key} must be positive")
    unknown = set(b) - {"max_depth", "max_tasks", "max_seconds"}
    if unknown:
        raise ConfigError(f"unknown budget fields {sorted(unknown)}")
    budget = SearchBudget(**b)
    mode = ov.get("mode", raw.get("mode", "exact"))
    if mode not in ("exact", "fast"):
        raise ConfigError(f"mode must be exact or fast, got {mode!r}")
    threads = int(ov.get("threads", raw.get("threads", 1)))
    if threads < 1:
        raise ConfigError("threads must be positive")
    return RunConfig(raw, sets, phi, budget, mode, threads, ov.get("seed", raw.get("seed")))


# ---------------------------------------------------------------- commands

def _fl(q) -> float:
    return float(q)


def cmd_certify(rc: RunConfig) -> Report:
    sec = rc.section("certify")
    K1 = rc.set(_need(sec, "K1", "certify"))
    K2 = rc.set(_need(sec, "K2", "certify"))
    U = _box(_need(sec, "pin_box", "certify"), "certify.pin_box")
    J = _interval(_need(sec, "J", "certify"), "certify.J")
    cert = certify_cover(rc.phi, U, K1, K2, J, rc.budget, mode=rc.mode,
                         allow_heuristic=bool(sec.get("allow_heuristic", False)), seed=rc.seed)
    res = verify_certificate(cert, rc.threads)
    result = {"verified": bool(res), "nodes": len(cert.nodes), "leaves": cert.leaf_count,
              "depth": cert.depth, "rigorous": cert.rigorous, "certificate": cert.to_json()}
    return _finish("certify", rc, result, res)


def cmd_partner(rc: RunConfig) -> Report:
    sec = rc.section("partner")
    K = rc.set(_need(sec, "K", "partner"))
    I = _interval(_need(sec, "I", "partner"), "partner.I")
    v = _point(_need(sec, "v", "partner"), "partner.v")
    is_open = bool(sec.get("open", True))
    P = construct_partner(K, I, v, rc.budget, phi=rc.phi, open=is_open, mode=rc.mode)
    res = P.verify(K, I, v, open=is_open)
    result = {
        "verified": bool(res),
        "measure_lower_bound": format_rational(measure_lower_bound(P.K_tilde)),
        "J_width": format_rational(P.J.width),
        "J_float": [_fl(P.J.lo), _fl(P.J.hi)],
        "partner": P.to_json(),
    }
    return _finish("partner", rc, result, res)


def _tree_result(tc: TreeCertificate, res) -> dict:
    return {
        "verified": bool(res),
        "coordinates": [format_label(c) for _, c in kb_order(tc.tree)],
        "box": [j.to_json() for j in tc.box],
        "box_float": [[_fl(j.lo), _fl(j.hi)] for j in tc.box],
        "certificate": tc.to_json(),
    }


def cmd_chain(rc: RunConfig) -> Report:
    sec = rc.section("chain")
    K = rc.set(_need(sec, "K", "chain"))
    n = _need(sec, "n", "chain")
    if not isinstance(n, int) or n < 1:
        raise ConfigError("chain.n must be a positive integer")
    tc = build_chain(K, n, rc.budget, phi=rc.phi, depth=sec.get("depth"), mode=rc.mode)
    res = tc.verify(rc.threads)
    return _finish("chain", rc, _tree_result(tc, res), res)


def cmd_tree(rc: RunConfig) -> Report:
    sec = rc.section("tree")
    K = rc.set(_need(sec, "K", "tree"))
    try:
        T = parse_tree_spec(_need(sec, "tree", "tree"))
    except MalformedSpec as exc:
        raise ConfigError(f"tree: {exc}") from exc
    tc = build_tree(K, T, rc.budget, phi=rc.phi, depth=sec.get("depth"), mode=rc.mode)
    res = tc.verify(rc.threads)
    return _finish("tree", rc, _tree_result(tc, res), res)


def _dim(obj) -> DimensionReport:
    return DimensionReport(float(obj["hausdorff_lower"]), float(obj["hausdorff_upper"]),
                           float(obj["box_upper"]), obj.get("method", "given"))


def cmd_metrics(rc: RunConfig) -> Report:
    sec = rc.section("metrics")
    depth = int(sec.get("depth", 10))
    tol = float(sec.get("tol", 1e-12))
    dims = {}
    out = {}
    for name in _need(sec, "sets", "metrics"):
        s = rc.set(name)
        dims[name] = dimension_report(s, tol)
        entry = {"dimension": dims[name].to_json(), "thickness": thickness(s, depth).to_json()}
        if isinstance(s, AffineIFS):
            entry["moran"] = moran_dimension(s, tol)
        out[name] = entry
    for name, obj in (sec.get("dimensions") or {}).items():
        try:
            dims[name] = _dim(obj)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"metrics.dimensions.{name}: {exc}") from exc
    products = []
    for a, b in sec.get("products", []):
        if a not in dims or b not in dims:
            raise ConfigError(f"metrics.products: unknown set in {[a, b]}")
        products.append({"sets": [a, b], "bounds": product_dimension_bounds(dims[a], dims[b]).to_json()})
    return _finish("metrics", rc, {"sets": out, "products": products})


def cmd_sample(rc: RunConfig) -> Report:
    sec = rc.section("sample")
    K1 = rc.set(_need(sec, "K1", "sample"))
    K2 = rc.set(_need(sec, "K2", "sample"))
    depth = int(sec.get("depth", 8))
    result: dict = {"depth": depth}
    J = _interval(sec["J"], "sample.J") if "J" in sec else None
    pins = [_point(p, "sample.pins") for p in sec.get("pins", [])]
    if "pin" in sec:
        pins.insert(0, _point(sec["pin"], "sample.pin"))
    if not pins:
        raise ConfigError("sample: give 'pin' or 'pins'")
    eps = float(sec.get("eps", 1e-3))
    rows = []
    A, B = sample_points(K1, min(depth, 10)), sample_points(K2, min(depth, 10))
    for z in pins:
        row: dict = {"pin": [format_rational(z[0]), format_rational(z[1])]}
        if J is not None:
            rep = epsilon_cover(rc.phi, z, K1, K2, J, eps=eps, depth=depth)
            row.update(max_gap=rep.max_gap, cover_depth=rep.depth, covered=rep.ok)
        vals = sampled_pinned_set(rc.phi, z, A, B, exact=False).values
        row.update(count=len(vals), min=float(vals.min()), max=float(vals.max()))
        if J is not None:
            row["coarse_max_gap"] = max_gap(vals, J)
        rows.append(row)
    result["pins"] = rows
    if "values_out" in sec:
        vals = sampled_pinned_set(rc.phi, pins[0], A, B, exact=False).values
        with open(sec["values_out"], "w") as fh:
            fh.write("\n".join(repr(float(v)) for v in vals) + "\n")
        result["values_out"] = sec["values_out"]
    if J is not None:
        result["covered"] = all(r["covered"] for r in rows)
    return _finish("sample", rc, result)


def cmd_verify(path_or_obj, threads: int = 1) -> Report:
    """Re-verify a certificate (or a report embedding one); always exact."""
    t0 = time.perf_counter()
    if isinstance(path_or_obj, dict):
        obj = path_or_obj
    else:
        try:
            with open(path_or_obj) as fh:
                obj = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read certificate: {exc}") from exc
    if obj.get("format") == REPORT_FORMAT:
        obj = (obj.get("result") or {}).get("certificate") or \
            ((obj.get("result") or {}).get("partner") or {}).get("certificate")
        if obj is None:
            raise ConfigError("report carries no certificate")
    fmt = obj.get("format")
    if fmt == COVER_FORMAT:
        res = verify_certificate(obj, threads)
        kind = "coverage"
    elif fmt == TREE_FORMAT:
        try:
            tc = TreeCertificate.from_json(obj)
        except MalformedSpec as exc:
            res = _Bad(str(exc))
        else:
            res = tc.verify(threads)
        kind = "tree"
    else:
        raise ConfigError(f"unknown certificate format {fmt!r}")
    result = {"kind": kind, "verified": bool(res), "failing_node": getattr(res, "node", None),
              "reason": getattr(res, "reason", "")}
    rep = _finish("verify", None, result, res)
    rep.config_hash = config_hash(obj)
    rep.meta["seconds"] = time.perf_counter() - t0
    return rep


@dataclass
class _Bad:
    reason: str
    node: Any = None

    def __bool__(self):
        return False


def _finish(command: str, rc: Optional[RunConfig], result: dict, res=True) -> Report:
    ok = bool(res)
    if not ok:
        result.setdefault("failing_node", getattr(res, "node", None))
        result.setdefault("reason", getattr(res, "reason", ""))
    return Report(command, "ok" if ok else "verification-failed", result,
                  config_hash(rc.raw) if rc else "", rc.mode if rc else "exact",
                  exit_code=EXIT_OK if ok else EXIT_VERIFY)


COMMANDS: dict[str, Callable[[RunConfig], Report]] = {
    "certify": cmd_certify,
    "partner": cmd_partner,
    "chain": cmd_chain,
    "tree": cmd_tree,
    "metrics": cmd_metrics,
    "sample": cmd_sample,
}


def _error_report(command: str, status: str, code: int, exc: BaseException, raw=None) -> Report:
    return Report(command, status, {"error": {"type": type(exc).__name__, "message": str(exc)}},
                  config_hash(raw) if isinstance(raw, dict) else "", exit_code=code)


def run(command: str, raw, overrides: Optional[dict] = None) -> Report:
    """Run one subcommand on a parsed config and map failures to exit codes."""
    t0 = time.perf_counter()
    try:
        if command == "verify":
            rep = cmd_verify(raw, int((overrides or {}).get("threads") or 1))
        else:
            rc = load_config(raw, overrides)
            rep = COMMANDS[command](rc)
    except BudgetExhausted as exc:
        rep = _error_report(command, "budget-exhausted", EXIT_BUDGET, exc, raw)
    except (ConfigError, MalformedSpec, InvalidSet) as exc:
        rep = _error_report(command, "config-error", EXIT_CONFIG, exc, raw)
    except (AdmissibilityFailure, DomainError, CantorCertError) as exc:
        rep = _error_report(command, "error", EXIT_ERROR, exc, raw)
    rep.meta.setdefault("seconds", time.perf_counter() - t0)
    rep.meta["python"] = platform.python_version()
    return rep


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cantorcert",
                                description="Certified interval pieces of pinned distance sets of Cantor products.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in list(COMMANDS) + ["verify"]:
        sp = sub.add_parser(name)
        if name == "verify":
            sp.add_argument("certificate", nargs="?", help="certificate or report JSON")
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--mode", choices=["exact", "fast"])
        sp.add_argument("--max-depth", type=int)
        sp.add_argument("--max-tasks", type=int)
        sp.add_argument("--threads", type=int)
        sp.add_argument("--out", help="write the report here instead of stdout")
        sp.add_argument("--seed", type=int, help="exploration order in fast mode only")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {"mode": args.mode, "max_depth": args.max_depth, "max_tasks": args.max_tasks,
                 "threads": args.threads, "seed": args.seed}
    if args.command == "verify":
        raw = args.certificate or args.config
        if raw is None:
            print("verify: give a certificate path", file=sys.stderr)
            return EXIT_CONFIG
    else:
        if not args.config:
            print(f"{args.command}: --config is required", file=sys.stderr)
            return EXIT_CONFIG
        try:
            with open(args.config) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            rep = _error_report(args.command, "config-error", EXIT_CONFIG, exc)
            _emit(rep, args.out)
            return EXIT_CONFIG
    rep = run(args.command, raw, overrides)
    _emit(rep, args.out)
    return rep.exit_code


def _emit(rep: Report, out: Optional[str]):
    text = rep.dumps() + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
        print(f"{rep.command}: {rep.status} -> {out}", file=sys.stderr)
    else:
        sys.stdout.write(text)


def golden_path(name: str = "golden_coverage.json") -> str:
    """Path of a certificate shipped with the package."""
    from importlib.resources import files
    return str(files("cantorcert") / "data" / name)
