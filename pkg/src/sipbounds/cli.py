"""Command-line front end.

Two subcommands::

    sipbounds report DATASET [--norm lp:2] [--anchor mean|index:k|coords:a,b,...]
                             [--weights 1,2,...] [--tol 1e-9] [--rho 0.5]
                             [--bounds all|name,...] [--witness KIND ...]
                             [--format json|text] [-o OUT]
    sipbounds witness --kind KIND --eps 0.5,0.1,0.01 [--norm lp:2]
                      [--anchor coords:1,0] [--n-count 3] [--format json|text] [-o OUT]

Exit codes: 0 success, 1 input error, 2 a certificate landed on the wrong side
of the ratio it certifies (an internal soundness failure).

Dataset JSON (``sipbounds.dataset/1``)::

    {"norm": "lp:2" | {"kind": "lp"|"wlp", "p": 2 | "inf", "weights": [...]},
     "vectors": [[...], ...],
     "weights": [...],            # optional, normalized on load
     "anchor": "mean" | "index:k" | [...],   # optional
     "tol": 1e-9,                 # optional
     "rho": 0.5}                  # optional, enables the fixed_ratio bound

A CSV file holds one vector per row; norm and weights then come from flags.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .bounds import (
    BOUND_NAMES,
    PreconditionError,
    WeightVector,
    best_lower_bound,
    weighted_inequality_check,
)
from .sip import sip
from .space import InvalidNormError, NormSpec, as_vector
from .witness import KINDS, SlackRow, row_violates, slack_curve

log = logging.getLogger("sipbounds")

REPORT_SCHEMA = "sipbounds.report/1"
WITNESS_SCHEMA = "sipbounds.witness/1"
DATASET_SCHEMA = "sipbounds.dataset/1"
DEFAULT_TOL = 1e-9
DEFAULT_EPS = (0.5, 0.1, 0.01, 0.001)

EXIT_OK, EXIT_INPUT, EXIT_UNSOUND = 0, 1, 2


class InputError(ValueError):
    """Bad dataset or flag; maps to exit code 1."""


AnchorSpec = Union[str, np.ndarray]


@dataclass(frozen=True, eq=False)
class Dataset:
    norm: NormSpec
    vectors: tuple[np.ndarray, ...]
    weights: WeightVector
    anchor: AnchorSpec = "mean"
    tol: float = DEFAULT_TOL
    rho: Optional[float] = None


def parse_norm(desc) -> NormSpec:
    """``lp:P``, ``lp:inf`` or ``wlp:P:w1,w2,...``; JSON objects are accepted too."""
    try:
        if isinstance(desc, dict):
            kind = desc.get("kind", "lp")
            if kind == "lp":
                return NormSpec.lp(desc["p"])
            if kind == "wlp":
                return NormSpec.weighted_lp(desc["p"], desc["weights"])
            raise InputError(f"unknown norm kind {kind!r}")
        parts = str(desc).strip().split(":")
        if parts[0] == "lp" and len(parts) == 2:
            return NormSpec.lp(parts[1])
        if parts[0] == "wlp" and len(parts) == 3:
            return NormSpec.weighted_lp(parts[1], _floats(parts[2]))
    except (InvalidNormError, KeyError, ValueError) as exc:
        raise InputError(f"bad norm {desc!r}: {exc}") from None
    raise InputError(f"bad norm descriptor {desc!r}")


def _floats(text: str) -> list[float]:
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise InputError(f"expected comma-separated numbers, got {text!r}") from None


def parse_anchor(spec) -> AnchorSpec:
    if spec is None or spec == "mean":
        return "mean"
    if isinstance(spec, (list, tuple)):
        return as_vector(spec, "anchor")
    text = str(spec)
    if text.startswith("index:"):
        try:
            return f"index:{int(text[6:])}"
        except ValueError:
            raise InputError(f"bad anchor {text!r}") from None
    if text.startswith("coords:"):
        return as_vector(_floats(text[7:]), "anchor")
    raise InputError(f"bad anchor {text!r}")


def _read_csv(text: str) -> list[list[float]]:
    rows = []
    for row in csv.reader(io.StringIO(text)):
        if not row or row[0].lstrip().startswith("#"):
            continue
        try:
            rows.append([float(c) for c in row])
        except ValueError:
            raise InputError(f"non-numeric CSV row {row!r}") from None
    return rows


def load_dataset(path: Union[str, Path], args: Optional[argparse.Namespace] = None) -> Dataset:
    """Read a JSON or CSV dataset; command-line flags override file fields."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    flag = (lambda name: getattr(args, name, None)) if args is not None else (lambda name: None)
    if text.lstrip().startswith("{"):
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"invalid JSON in {path}: {exc}") from None
        if not isinstance(raw, dict) or "vectors" not in raw:
            raise InputError("dataset must be an object with a 'vectors' field")
        schema = raw.get("schema", DATASET_SCHEMA)
        if schema != DATASET_SCHEMA:
            raise InputError(f"unsupported dataset schema {schema!r}")
    else:
        raw = {"vectors": _read_csv(text)}

    norm = parse_norm(flag("norm") or raw.get("norm", "lp:2"))
    try:
        vectors = tuple(as_vector(v, f"vectors[{j}]") for j, v in enumerate(raw["vectors"]))
    except (TypeError, ValueError) as exc:
        raise InputError(str(exc)) from None
    if not vectors:
        raise InputError("dataset has no vectors")
    if len({v.size for v in vectors}) != 1:
        raise InputError("vectors have mixed dimensions")
    if norm.dim is not None and norm.dim != vectors[0].size:
        raise InputError(f"norm weights have length {norm.dim}, vectors have dimension {vectors[0].size}")

    raw_w = _floats(flag("weights")) if flag("weights") else raw.get("weights")
    try:
        weights = WeightVector(raw_w) if raw_w is not None else WeightVector.uniform(len(vectors))
    except ValueError as exc:
        raise InputError(f"bad weights: {exc}") from None
    if len(weights) != len(vectors):
        raise InputError(f"{len(weights)} weights for {len(vectors)} vectors")
    if abs(weights.raw_sum - 1.0) > 1e-9:
        log.warning("weights sum to %r; normalizing to 1", weights.raw_sum)

    try:
        anchor = parse_anchor(flag("anchor") or raw.get("anchor"))
    except ValueError as exc:
        raise InputError(str(exc)) from None
    if isinstance(anchor, np.ndarray) and anchor.size != vectors[0].size:
        raise InputError("anchor dimension does not match the vectors")
    if isinstance(anchor, str) and anchor.startswith("index:"):
        k = int(anchor[6:])
        if not 0 <= k < len(vectors):
            raise InputError(f"anchor index {k} out of range")

    tol = flag("tol") if flag("tol") is not None else raw.get("tol", DEFAULT_TOL)
    rho = flag("rho") if flag("rho") is not None else raw.get("rho")
    if not (isinstance(tol, (int, float)) and tol > 0 and math.isfinite(tol)):
        raise InputError(f"tol must be a positive number, got {tol!r}")
    return Dataset(norm, vectors, weights, anchor, float(tol), None if rho is None else float(rho))


def _clean(v):
    """Floats as-is (json uses the shortest round-trip repr); non-finite become null."""
    if isinstance(v, float):
        return v if math.isfinite(v) else None
    if isinstance(v, (np.floating,)):
        return _clean(float(v))
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, dict):
        return {k: _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_clean(x) for x in v]
    return v


def _resolve_anchor(ds: Dataset) -> np.ndarray:
    if isinstance(ds.anchor, np.ndarray):
        return ds.anchor
    if ds.anchor.startswith("index:"):
        return ds.vectors[int(ds.anchor[6:])]
    return np.einsum("j,jk->k", ds.weights.p, np.stack(ds.vectors))


def _inequalities(ds: Dataset, anchor: np.ndarray) -> list[dict]:
    out = []
    for form, name in (("quadratic", "mean_quadratic"), ("coarse", "mean_coarse")):
        entry = {"name": name, "lhs": None, "rhs": None, "holds": None,
                 "applicable": True, "diagnostics": []}
        try:
            check = weighted_inequality_check(ds.vectors, ds.weights, anchor, ds.norm, form)
        except PreconditionError as exc:
            entry["applicable"] = False
            entry["diagnostics"] = [d.to_dict() for d in exc.diagnostics]
        else:
            entry.update(lhs=check.lhs, rhs=check.rhs, holds=check.holds)
        out.append(entry)
    return out


def _witness_rows(kind, anchor, eps, norm, n_count) -> list[dict]:
    return [r._asdict() for r in slack_curve(kind, anchor, eps, norm, n_count)]


def build_report(
    ds: Dataset,
    include: Optional[Sequence[str]] = None,
    witness: Sequence[str] = (),
    eps: Sequence[float] = DEFAULT_EPS,
) -> tuple[dict, list[str]]:
    """Assemble the report document and the list of soundness failures."""
    anchor = _resolve_anchor(ds)
    try:
        rep = best_lower_bound(ds.vectors, ds.weights, ds.norm, [anchor], rho=ds.rho,
                               include=include, tol=ds.tol)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    failures = [f"{r.name} = {r.value!r} is on the wrong side of ratio {rep.ratio!r}"
                for r in rep.violations()]

    inequalities = _inequalities(ds, anchor) if np.any(anchor) else []
    failures += [f"{e['name']} fails: lhs {e['lhs']!r} < rhs {e['rhs']!r}"
                 for e in inequalities if e["holds"] is False]

    enclosures = []
    for j, x in enumerate(ds.vectors):
        enclosures.append({
            "index": j,
            "inferior": sip(x, anchor, ds.norm, "inferior", tol=ds.tol).to_dict(),
            "superior": sip(x, anchor, ds.norm, "superior", tol=ds.tol).to_dict(),
        })

    def brief(r):
        return None if r is None else {"name": r.name, "value": r.value}

    doc = {
        "schema": REPORT_SCHEMA,
        "input": {
            "norm": ds.norm.describe(),
            "count": len(ds.vectors),
            "dim": int(ds.vectors[0].size),
            "weights": ds.weights.p.tolist(),
            "tol": ds.tol,
            "rho": ds.rho,
        },
        "ratio": rep.ratio,
        "anchor_used": anchor.tolist(),
        "bounds": [r.to_dict() for r in rep.results],
        "best_lower": brief(rep.best_lower),
        "upper_refinement": brief(rep.upper_refinement),
        "inequalities": inequalities,
        "sip_enclosures": enclosures,
    }
    if witness:
        tables = []
        for kind in witness:
            if not np.any(anchor):
                tables.append({"kind": kind, "rows": [], "note": "anchor is zero"})
                continue
            rows = _witness_rows(kind, anchor, eps, ds.norm, 3)
            failures += [f"witness {kind} at eps={r['eps']!r} beats its admissible constant"
                         for r in rows if row_violates(SlackRow(**r))]
            tables.append({"kind": kind, "rows": rows})
        doc["witness"] = tables
    return _clean(doc), failures


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def _fmt(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render_report_text(doc: dict) -> str:
    inp = doc["input"]
    lines = [
        f"norm {inp['norm']}  vectors {inp['count']} x {inp['dim']}  tol {inp['tol']!r}",
        f"ratio        {_fmt(doc['ratio'])}",
        f"anchor       {doc['anchor_used']}",
        "",
        f"{'bound':<18} {'side':<6} {'ok':<4} value",
    ]
    for b in doc["bounds"]:
        lines.append(f"{b['name']:<18} {b['side']:<6} {'yes' if b['applicable'] else 'no':<4} "
                     f"{_fmt(b['value'])}")
        for d in b["diagnostics"]:
            where = "" if d["index"] is None else f"j={d['index']}: "
            lines.append(f"{'':<18}   - {where}{d['condition']}")
    for key, label in (("best_lower", "best lower"), ("upper_refinement", "upper")):
        entry = doc[key]
        lines.append(f"{label:<12} " + ("none" if entry is None
                                        else f"{entry['name']} = {_fmt(entry['value'])}"))
    for e in doc["inequalities"]:
        if e["applicable"]:
            lines.append(f"{e['name']:<18} lhs {_fmt(e['lhs'])} rhs {_fmt(e['rhs'])} "
                         f"holds {e['holds']}")
        else:
            lines.append(f"{e['name']:<18} not applicable")
    lines.append("")
    lines.append(f"{'j':>3} {'inferior':>24} {'superior':>24}")
    for s in doc["sip_enclosures"]:
        lines.append(f"{s['index']:>3} {_fmt(s['inferior']['lo']):>24} {_fmt(s['superior']['hi']):>24}")
    for table in doc.get("witness", []):
        lines.append("")
        lines.append(render_witness_text({"kind": table["kind"], "rows": table["rows"]}).rstrip())
    return "\n".join(lines) + "\n"


def render_witness_text(doc: dict) -> str:
    cols = ("eps", "admissible_constant", "measured_constant", "bound_value", "target",
            "measured_slack")
    lines = [f"witness {doc['kind']}", "  ".join(f"{c:>22}" for c in cols)]
    for row in doc["rows"]:
        lines.append("  ".join(f"{_fmt(row[c]):>22}" for c in cols))
    return "\n".join(lines) + "\n"


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def run_report(args: argparse.Namespace) -> int:
    try:
        ds = load_dataset(args.dataset, args)
        include = None
        if args.bounds and args.bounds != "all":
            include = [s.strip() for s in args.bounds.split(",") if s.strip()]
            unknown = set(include) - set(BOUND_NAMES)
            if unknown:
                raise InputError(f"unknown bounds {sorted(unknown)}; known: {', '.join(BOUND_NAMES)}")
        for kind in args.witness or ():
            if kind not in KINDS:
                raise InputError(f"unknown witness kind {kind!r}")
        eps = _floats(args.eps) if args.eps else DEFAULT_EPS
        doc, failures = build_report(ds, include, args.witness or (), eps)
    except (InputError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    if failures:
        for f in failures:
            log.error("certificate violation: %s", f)
        return EXIT_UNSOUND
    _emit(dumps(doc) if args.format == "json" else render_report_text(doc), args.output)
    return EXIT_OK


def run_witness(args: argparse.Namespace) -> int:
    try:
        if args.kind not in KINDS:
            raise InputError(f"unknown witness kind {args.kind!r}; known: {', '.join(KINDS)}")
        norm = parse_norm(args.norm or "lp:2")
        anchor = parse_anchor(args.anchor or "coords:1,0")
        if isinstance(anchor, str):
            raise InputError("witness anchor must be given as coords:...")
        eps = _floats(args.eps)
        rows = slack_curve(args.kind, anchor, eps, norm, args.n_count)
    except (InputError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    doc = _clean({
        "schema": WITNESS_SCHEMA,
        "kind": args.kind,
        "norm": norm.describe(),
        "anchor": anchor.tolist(),
        "n_count": args.n_count,
        "rows": [r._asdict() for r in rows],
    })
    bad = [r for r in rows if row_violates(r)]
    if bad:
        for r in bad:
            log.error("witness %s at eps=%r: measured constant %r exceeds admissible %r "
                      "(slack %r)", args.kind, r.eps, r.measured_constant,
                      r.admissible_constant, r.measured_slack)
        return EXIT_UNSOUND
    _emit(dumps(doc) if args.format == "json" else render_witness_text(doc), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sipbounds", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    rep = sub.add_parser("report", help="evaluate all bounds on a dataset")
    rep.add_argument("dataset")
    rep.add_argument("--norm", help="lp:P | lp:inf | wlp:P:w1,w2,...")
    rep.add_argument("--anchor", help="mean | index:k | coords:a1,a2,...")
    rep.add_argument("--weights", help="comma-separated weights (normalized)")
    rep.add_argument("--tol", type=float)
    rep.add_argument("--rho", type=float, help="enable the fixed_ratio bound with this rho")
    rep.add_argument("--bounds", default="all", help="all | comma-separated bound names")
    rep.add_argument("--witness", action="append", metavar="KIND",
                     help="append a witness table (repeatable)")
    rep.add_argument("--eps", help="eps list for --witness tables")
    rep.add_argument("--format", choices=("json", "text"), default="json")
    rep.add_argument("-o", "--output")
    rep.set_defaults(func=run_report)

    wit = sub.add_parser("witness", help="tabulate a sharpness family")
    wit.add_argument("--kind", required=True, help=" | ".join(KINDS))
    wit.add_argument("--eps", required=True, help="strictly decreasing list in (0, 1)")
    wit.add_argument("--norm")
    wit.add_argument("--anchor", help="coords:a1,a2,... (default coords:1,0)")
    wit.add_argument("--n-count", type=int, default=3)
    wit.add_argument("--format", choices=("json", "text"), default="json")
    wit.add_argument("-o", "--output")
    wit.set_defaults(func=run_witness)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="sipbounds: %(levelname)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
