"""Command line entry point: ``webrank <subcommand> ...``."""
from __future__ import annotations

import argparse
import json
import sys

from .connection import ExpansionError, LiftObstructedError, connection_at, curvature
from .engine import Config, RankEngine, SamplingError, analyze_rank
from .expr import ExpressionError
from .jets import PoleError, multi_indices
from .linalg import LinAlgError
from .rational import parse_point, to_str
from .report import ReportDocument, WebFileError, exit_code, format_text, load_web_file
from .web import WebError, beta, build_blocks, build_M_script, build_Q, c, combinatorics, CTable

INPUT_ERROR = 1


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _add_web(p, required=True):
    p.add_argument("--web", required=required, metavar="FILE", help="web definition file")


def _add_sampling(p):
    p.add_argument("--samples", type=int, default=3, help="random points per level (default 3)")
    p.add_argument("--seed", type=int, default=0, help="seed of the point sampler (default 0)")
    p.add_argument("--point", help='fixed point "1,2/3,-5" instead of random samples')
    p.add_argument("--jobs", type=int, default=1, help="worker processes for sample points (default 1)")


def _add_format(p):
    p.add_argument("--format", choices=("text", "json"), default="text")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="webrank", description="Rank of codimension-one webs by exact prolongation.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", help="run the level loop and report the rank")
    _add_web(p)
    p.add_argument("--max-level", type=int, metavar="H", help="last level examined (default h0 + 8)")
    _add_sampling(p)
    _add_format(p)

    p = sub.add_parser("combinatorics", help="c(n,h), beta_k, h0 and the rank bounds")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    _add_format(p)

    p = sub.add_parser("ctable", help="coefficients C^h_{i,L} at a point")
    _add_web(p)
    p.add_argument("--point", required=True)
    p.add_argument("--deg", type=int, default=3, help="largest |L| (default 3)")
    _add_format(p)

    p = sub.add_parser("matrices", help="M_k, P_k and Q_k at a point")
    _add_web(p)
    p.add_argument("--point", required=True)
    p.add_argument("--level", type=int, help="k (default h0)")
    _add_format(p)

    p = sub.add_parser("curvature", help="connection form and curvature at one level")
    _add_web(p)
    p.add_argument("--level", type=int, required=True, help="h")
    _add_sampling(p)
    _add_format(p)
    return parser


def _emit(args, payload: dict, text: str) -> None:
    if args.format == "json":
        sys.stdout.write(json.dumps(payload, indent=2, ensure_ascii=False) + "\n")
    else:
        sys.stdout.write(text)


def _matrix_text(name: str, m: list) -> str:
    rows = [[to_str(x) for x in row] for row in m]
    width = max((len(x) for row in rows for x in row), default=1)
    lines = [f"{name} ({len(m)}x{len(m[0]) if m else 0})"]
    lines += ["  " + " ".join(x.rjust(width) for x in row) for row in rows]
    return "\n".join(lines) + "\n"


def _strs(m: list) -> list:
    return [[to_str(x) for x in row] for row in m]


def cmd_analyze(args) -> int:
    web = load_web_file(args.web)
    point = parse_point(args.point) if args.point else None
    config = Config(h_max=args.max_level, samples=args.samples, seed=args.seed, point=point, jobs=args.jobs)
    doc = ReportDocument.from_analysis(analyze_rank(web, config))
    if args.format == "json":
        sys.stdout.write(doc.to_json())
    else:
        sys.stdout.write(format_text(doc))
    for w in doc.warnings:
        print(f"webrank: {w}", file=sys.stderr)
    return exit_code(doc.status)


def cmd_combinatorics(args) -> int:
    comb = combinatorics(args.n, args.d)
    cs = {h: c(args.n, h) for h in range(comb.h0 + 1)}
    betas = {k: beta(args.n, k) for k in range(1, comb.h0 + 2)}
    payload = {
        "n": comb.n, "d": comb.d, "h0": comb.h0, "calibrated": comb.calibrated,
        "pi_prime": comb.pi_prime, "pi_castelnuovo": comb.pi_castelnuovo,
        "c": [cs[h] for h in sorted(cs)], "beta": [betas[k] for k in sorted(betas)],
    }
    text = (
        f"n={comb.n} d={comb.d} h0={comb.h0}{' (calibrated)' if comb.calibrated else ''}\n"
        + "c(n,h), h=0..h0: " + " ".join(map(str, payload["c"])) + "\n"
        + "beta_k, k=1..h0+1: " + " ".join(map(str, payload["beta"])) + "\n"
        + f"π′(n,d)={comb.pi_prime}\nπ(n,d)={comb.pi_castelnuovo}\n"
    )
    _emit(args, payload, text)
    return 0


def cmd_ctable(args) -> int:
    web = load_web_file(args.web)
    point = parse_point(args.point)
    if len(point) != web.n:
        raise ValueError(f"point has {len(point)} coordinates, expected {web.n}")
    tables = [CTable(u, args.deg) for u in web.jets(point, args.deg)]
    entries, lines = [], []
    for i, table in enumerate(tables, 1):
        for j in range(1, args.deg + 1):
            for mi in multi_indices(web.n, j):
                for h in range(j):
                    v = to_str(table.value(mi, h))
                    entries.append({"i": i, "L": list(mi), "h": h, "value": v})
                    lines.append(f"C^{h}_{{{i},{''.join(map(str, mi))}}} = {v}")
    _emit(args, {"point": [to_str(x) for x in point], "entries": entries}, "\n".join(lines) + "\n")
    return 0


def cmd_matrices(args) -> int:
    web = load_web_file(args.web)
    point = parse_point(args.point)
    if len(point) != web.n:
        raise ValueError(f"point has {len(point)} coordinates, expected {web.n}")
    k = args.level if args.level is not None else web.combinatorics().h0
    if k < 1:
        raise ValueError("--level must be at least 1")
    blocks = build_blocks(web, point, k)
    m, p = build_M_script(blocks, k), blocks.P(k)
    payload = {"k": k, "M": _strs(m), "P": _strs(p)}
    text = _matrix_text(f"M_{k}", m) + _matrix_text(f"P_{k}", p)
    if k >= 2:
        q = build_Q(blocks, k)
        payload["Q"] = _strs(q)
        text += _matrix_text(f"Q_{k}", q)
    _emit(args, payload, text)
    return 0


def cmd_curvature(args) -> int:
    web = load_web_file(args.web)
    if args.point:
        points = [parse_point(args.point)]
        if len(points[0]) != web.n:
            raise ValueError(f"point has {len(points[0])} coordinates, expected {web.n}")
    else:
        points = RankEngine(web, Config(samples=args.samples, seed=args.seed)).points
    h = args.level
    results, lines = [], []
    for point in points:
        conn = connection_at(web, h, point)
        report = curvature(conn)
        omega = conn.values()
        comps = {f"{lam},{mu}": _strs(report.component(lam, mu))
                 for lam in range(web.n) for mu in range(lam + 1, web.n)}
        results.append({
            "point": [to_str(x) for x in point], "rank": conn.rank,
            "omega": [_strs(om) for om in omega], "K": comps, "vanishes": report.vanishes,
        })
        lines.append(f"point ({','.join(to_str(x) for x in point)}), rho_{h} = {conn.rank}")
        for lam, om in enumerate(omega):
            lines.append(_matrix_text(f"omega_{web.variables[lam]}", om).rstrip("\n"))
        for lam in range(web.n):
            for mu in range(lam + 1, web.n):
                name = f"K_{web.variables[lam]}{web.variables[mu]}"
                lines.append(_matrix_text(name, report.component(lam, mu)).rstrip("\n"))
        lines.append(f"K^{h} {'vanishes' if report.vanishes else 'is nonzero'}")
    verdict = all(r["vanishes"] for r in results)
    lines.append(f"verdict: K^{h} {'vanishes' if verdict else 'is nonzero'} at {len(results)} point(s)")
    _emit(args, {"level": h, "points": results, "vanishes": verdict}, "\n".join(lines) + "\n")
    return 0


COMMANDS = {
    "analyze": cmd_analyze,
    "combinatorics": cmd_combinatorics,
    "ctable": cmd_ctable,
    "matrices": cmd_matrices,
    "curvature": cmd_curvature,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"webrank: error: {exc}", file=sys.stderr)
        return INPUT_ERROR
    except (WebFileError, WebError, ExpressionError, PoleError, SamplingError, ValueError,
            LiftObstructedError, ExpansionError, LinAlgError) as exc:
        print(f"webrank: error: {exc}", file=sys.stderr)
        return INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
