"""Command line: gdfractal <validate|construct|classify|gaps|render|extract> SPEC."""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

from . import __version__
from .classify import ClassifyError, ClassifyOptions, classify_vertex, extract_standard_ifs
from .construct import ConstructionError, build_matrix, check_contractive, verify_separation
from .exactnum import ExactNumError, fraction_str
from .gaps import DEFAULT_BUDGET, GapsError, count_paths, gap_lengths_truncated
from .render import render_svg
from .spec_io import ParseError, ProblemSpec, ValidationError, parse_spec, spec_to_dict

COMMANDS = ("validate", "construct", "classify", "gaps", "render", "extract")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gdfractal", description=__doc__)
    p.add_argument("--version", action="version", version=f"gdfractal {__version__}")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("spec", help="path to a JSON spec, or - for stdin")
    p.add_argument("--vertex", help="vertex id (default: the spec's query list)")
    p.add_argument("--depth", type=int, help="gap/render depth; for classify, depth of the ratio oracle cross-check")
    p.add_argument("--precision", type=int, help="bits for numeric enclosures (default from spec, 128)")
    p.add_argument("--out", help="write the result here instead of stdout")
    p.add_argument("--format", choices=("json", "text", "svg"), default=None)
    p.add_argument("--max-intervals", type=int, default=DEFAULT_BUDGET, help="interval budget for enumerations")
    p.add_argument("--timing", action="store_true", help="add wall-clock timing (breaks byte-stability)")
    return p


def _s(x) -> str:
    return str(x)


def _vertices(spec: ProblemSpec, args) -> list[str]:
    vs = [args.vertex] if args.vertex else spec.query_vertices()
    for v in vs:
        if v not in spec.vertices:
            raise UsageError(f"unknown vertex {v!r}")
    return vs


def cmd_validate(spec: ProblemSpec, args) -> dict:
    return {"valid": True, "violations": [], "vertices": len(spec.vertices), "edges": len(spec.edges),
            "mode": "exact" if spec.exact() else "numeric"}


def _separation_dict(rep) -> dict:
    return {
        "status": rep.status,
        "gaps": {v: [{"index": gp.index, "left": _s(gp.left), "right": _s(gp.right), "length": _s(gp.length)}
                     for gp in gs] for v, gs in rep.gaps.items()},
        "Lambda": {v: [_s(m) for m in rep.lambda_set(v)] for v in rep.gaps},
        "overlaps": [{k: (_s(v) if not isinstance(v, tuple) else [_s(t) for t in v]) for k, v in o.items()} for o in rep.overlaps],
        "order_violations": rep.order_violations,
    }


def cmd_construct(spec: ProblemSpec, args) -> dict:
    f = spec.build()
    g = f.graph
    out = {
        "mode": "exact" if f.exact else "numeric",
        "maps": [{"edge": e.label, "from": e.src, "to": e.dst, "ratio": _s(f.ratios[e.id]),
                  "translation": _s(f.translations[e.id]) if f.exact else _enc(f.translations[e.id])} for e in g.edges],
        "lengths": {v: _s(x) if f.exact else _enc(x) for v, x in f.lengths.items()},
        "anchors": {v: [_s(b) if f.exact else _enc(b) for b in bs] for v, bs in f.anchors.items()},
        "separation": _separation_dict(verify_separation(f)),
    }
    if f.exact:
        mat = build_matrix(f.point)
        c = check_contractive(mat)
        out["matrix"] = [[_s(x) for x in row] for row in mat.entries]
        out["contractive"] = {"proof": c.proof, "values": [fraction_str(v) for v in c.values]}
    return out


def _enc(e) -> dict:
    return {"lo": float(e.lo), "hi": float(e.hi)}


def _exact(spec: ProblemSpec):
    f = spec.build()
    if not f.exact:
        raise ClassifyError("this command needs rational ratio magnitudes (exact mode)")
    return f


def cmd_classify(spec: ProblemSpec, args) -> dict:
    f = _exact(spec)
    opts = ClassifyOptions(breach_depth=args.depth)
    return {
        "separation": verify_separation(f).status,
        "verdicts": {v: classify_vertex(f, v, opts).to_dict() for v in _vertices(spec, args)},
    }


def cmd_gaps(spec: ProblemSpec, args) -> dict:
    f = _exact(spec)
    depth = spec.numeric["depth"] if args.depth is None else args.depth
    out = {}
    for v in _vertices(spec, args):
        cat = gap_lengths_truncated(f, v, depth, args.max_intervals)
        out[v] = {
            "depth": depth,
            "values": [_s(m) for m in cat.values()],
            "count": len(cat),
            "entries": [{"length": _s(e.length), "depth": e.depth, "path": f.graph.labels(e.path),
                         "vertex": e.vertex, "gap_index": e.gap_index} for e in cat.entries],
        }
    return {"catalogs": out}


def cmd_extract(spec: ProblemSpec, args) -> dict:
    f = _exact(spec)
    return {"extracted": {v: extract_standard_ifs(f, v).to_dict() for v in _vertices(spec, args)}}


def cmd_render(spec: ProblemSpec, args) -> str:
    f = spec.build()
    (v,) = _vertices(spec, args)[:1]
    depth = min(spec.numeric["depth"], 6) if args.depth is None else args.depth
    if sum(count_paths(f, v, k) for k in range(depth + 1)) > args.max_intervals:
        raise GapsError(f"depth {depth} exceeds the interval budget {args.max_intervals}")
    return render_svg(f, v, depth, args.precision or spec.numeric["precision"])


HANDLERS = {"validate": cmd_validate, "construct": cmd_construct, "classify": cmd_classify,
            "gaps": cmd_gaps, "extract": cmd_extract, "render": cmd_render}


def _text(result: dict, indent: int = 0) -> list[str]:
    lines = []
    pad = "  " * indent
    for k in sorted(result):
        v = result[k]
        if isinstance(v, dict):
            lines.append(f"{pad}{k}:")
            lines += _text(v, indent + 1)
        elif isinstance(v, list) and v and isinstance(v[0], dict):
            lines.append(f"{pad}{k}:")
            for item in v:
                lines.append(f"{pad}  - " + ", ".join(f"{a}={item[a]}" for a in sorted(item)))
        else:
            lines.append(f"{pad}{k}: {v}")
    return lines


def run(argv: list[str] | None = None) -> tuple[int, str, str]:
    """Execute one command; returns (exit code, stdout text, stderr text)."""
    try:
        args = build_parser().parse_args(argv)
        raw = sys.stdin.buffer.read() if args.spec == "-" else Path(args.spec).read_bytes()
        spec = parse_spec(raw)
        if args.precision is not None:
            if args.precision < 32:
                raise UsageError("--precision must be >= 32")
            spec.numeric["precision"] = args.precision
        t0 = time.perf_counter()
        result = HANDLERS[args.command](spec, args)
        elapsed = time.perf_counter() - t0
        if args.command == "render":
            text = result
        else:
            report = {
                "tool": "gdfractal",
                "version": __version__,
                "command": args.command,
                "spec_sha256": hashlib.sha256(raw).hexdigest(),
                "spec": spec_to_dict(spec),
                "result": result,
            }
            if args.timing:
                report["timing_s"] = round(elapsed, 6)
            if args.format == "text":
                text = "\n".join(_text(report)) + "\n"
            else:
                text = json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
        if args.out:
            Path(args.out).write_text(text, encoding="utf-8")
            return 0, "", ""
        return 0, text, ""
    except (ParseError, ValidationError) as exc:
        return 1, "", json.dumps(exc.to_dict(), sort_keys=True) + "\n"
    except (UsageError, OSError, ConstructionError, ClassifyError, GapsError, ExactNumError) as exc:
        err = {"error": type(exc).__name__, "message": str(exc)}
        return 1, "", json.dumps(err, sort_keys=True) + "\n"
    except Exception as exc:  # contract: anything unexpected is exit 2
        err = {"error": "InternalError", "type": type(exc).__name__, "message": str(exc)}
        return 2, "", json.dumps(err, sort_keys=True) + "\n"


def main(argv: list[str] | None = None) -> int:
    code, out, err = run(argv)
    if out:
        sys.stdout.write(out)
    if err:
        sys.stderr.write(err)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
