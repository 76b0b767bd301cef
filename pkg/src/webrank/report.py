"""Web definition files, and JSON / text renderings of an analysis."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from importlib import resources
from pathlib import Path

from .engine import AnalysisReport, INCONCLUSIVE, RANK_DETERMINED, RANK_ZERO, NONZERO, SKIPPED, VANISHES
from .expr import ExpressionError, parse_expression
from .rational import to_str
from .web import WebError, WebSpec

SUB = str.maketrans("0123456789", "₀₁₂₃₄₅₆₇₈₉")
SUP = str.maketrans("0123456789", "⁰¹²³⁴⁵⁶⁷⁸⁹")


class WebFileError(ValueError):
    """A web definition file could not be read or is malformed."""


def parse_web_text(text: str, source: str = "<string>") -> WebSpec:
    """Parse the ``vars: ...`` header followed by one first integral per line."""
    variables = None
    integrals = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if variables is None:
            head, sep, rest = line.partition(":")
            if not sep or head.strip() != "vars":
                raise WebFileError(f"{source}:{lineno}: expected 'vars: x, y, ...' header")
            variables = [v.strip() for v in rest.split(",")]
            if not all(v.isidentifier() for v in variables) or len(set(variables)) != len(variables):
                raise WebFileError(f"{source}:{lineno}: bad variable list {rest.strip()!r}")
            continue
        integrals.append((lineno, line))
    if variables is None:
        raise WebFileError(f"{source}: missing 'vars:' header")
    if len(integrals) < len(variables) + 1:
        raise WebFileError(
            f"{source}: {len(integrals)} first integrals over {len(variables)} variables; need at least {len(variables) + 1}"
        )
    exprs = []
    for lineno, line in integrals:
        try:
            exprs.append(parse_expression(line, variables))
        except ExpressionError as exc:
            raise WebFileError(f"{source}:{lineno}: {exc}") from exc
    try:
        return WebSpec(tuple(variables), tuple(exprs), tuple(line for _, line in integrals))
    except WebError as exc:
        raise WebFileError(f"{source}: {exc}") from exc


def load_web_file(path) -> WebSpec:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise WebFileError(f"cannot read {path}: {exc.strerror or exc}") from exc
    return parse_web_text(text, str(path))


def corpus_names() -> list:
    root = resources.files("webrank") / "corpus"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".web"))


def corpus_path(name: str) -> Path:
    return Path(str(resources.files("webrank") / "corpus" / f"{name}.web"))


def load_corpus(name: str) -> WebSpec:
    return load_web_file(corpus_path(name))


@dataclass
class ReportDocument:
    """JSON-ready form of an analysis; rationals are canonical "p/q" strings."""

    n: int
    d: int
    h0: int
    pi_prime: int
    pi_castelnuovo: int
    ordinary: bool
    rho: list
    curvature: list
    status: str
    rank: int | None
    seed: int
    samples: list
    warnings: list
    variables: list = field(default_factory=list)
    integrals: list = field(default_factory=list)
    weak_general_position: bool = True
    p_ranks: list = field(default_factory=list)
    m_ranks: list = field(default_factory=list)
    level: int | None = None
    start_level: int = 0
    h_max: int = 0
    justification: list = field(default_factory=list)

    @classmethod
    def from_analysis(cls, report: AnalysisReport) -> "ReportDocument":
        comb = report.combinatorics
        return cls(
            n=report.n,
            d=report.d,
            h0=comb.h0,
            pi_prime=comb.pi_prime,
            pi_castelnuovo=comb.pi_castelnuovo,
            ordinary=report.ordinariness.ordinary,
            rho=list(report.rho),
            curvature=[
                {"h": c.h, "verdict": c.verdict, "reason": c.reason,
                 "points": [[to_str(x) for x in p] for p in c.points]}
                for c in report.curvature
            ],
            status=report.status,
            rank=report.rank,
            seed=report.seed,
            samples=[[to_str(x) for x in p] for p in report.samples],
            warnings=list(report.warnings),
            variables=list(report.variables),
            integrals=list(report.integrals),
            weak_general_position=report.ordinariness.weak_general_position,
            p_ranks=list(report.ordinariness.p_ranks),
            m_ranks=list(report.m_ranks),
            level=report.level,
            start_level=report.start_level,
            h_max=report.h_max,
            justification=list(report.justification),
        )

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ReportDocument":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown report fields: {sorted(unknown)}")
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ReportDocument":
        return cls.from_dict(json.loads(text))


def _rho(h: int) -> str:
    return "ρ" + str(h).translate(SUB)


def profile_line(doc: ReportDocument) -> str:
    """The rho-sequence from the start level to the conclusion, e.g.
    ``ρ₂=14 > ρ₃=ρ₄=13, K³=0 ⇒ ρ(W)=13``."""
    lo = doc.start_level
    if doc.status == RANK_DETERMINED:
        hi = doc.level + 1
    elif doc.status == RANK_ZERO:
        hi = doc.level
    else:
        hi = len(doc.rho) - 1
    groups = []
    for h in range(lo, hi + 1):
        if groups and groups[-1][1] == doc.rho[h]:
            groups[-1][0].append(h)
        else:
            groups.append(([h], doc.rho[h]))
    parts = []
    for k, (levels, value) in enumerate(groups):
        if k:
            parts.append(" > " if groups[k - 1][1] > value else " < ")
        parts.append("=".join(_rho(h) for h in levels) + f"={value}")
    text = "".join(parts)
    if doc.status == RANK_DETERMINED:
        return text + f", K{str(doc.level).translate(SUP)}=0 ⇒ ρ(W)={doc.rank}"
    if doc.status == RANK_ZERO:
        return text + " ⇒ ρ(W)=0"
    return text + f" (no conclusion up to h={doc.h_max})"


def format_text(doc: ReportDocument) -> str:
    lines = []
    if doc.integrals:
        lines.append(f"web: ({', '.join(doc.integrals)}) in ({', '.join(doc.variables)})")
    lines.append(f"n={doc.n} d={doc.d} h0={doc.h0} π′(n,d)={doc.pi_prime} π(n,d)={doc.pi_castelnuovo}")
    p = ", ".join(f"P{str(j).translate(SUB)}:{r}" for j, r in enumerate(doc.p_ranks, 1))
    lines.append(f"ordinary: {'yes' if doc.ordinary else 'no'} (ranks {p})")
    lines.append("rho from h=0: " + " ".join(str(r) for r in doc.rho))
    for c in doc.curvature:
        k = "K" + str(c["h"]).translate(SUP)
        if c["verdict"] == VANISHES:
            count = len(c["points"])
            lines.append(f"{k}: vanishes at {count} point{'s' if count != 1 else ''}")
        elif c["verdict"] == NONZERO:
            lines.append(f"{k}: nonzero")
        elif c["verdict"] == SKIPPED:
            lines.append(f"{k}: skipped, {c['reason']}")
    lines.append(profile_line(doc))
    result = f"rank {doc.rank}" if doc.rank is not None else "rank undetermined"
    lines.append(f"status: {doc.status} ({result})")
    for j in doc.justification:
        lines.append(f"note: {j}")
    for w in doc.warnings:
        lines.append(f"warning: {w}")
    lines.append(f"seed {doc.seed}, samples " + " ".join("(" + ",".join(p) + ")" for p in doc.samples))
    return "\n".join(lines) + "\n"


def exit_code(status: str) -> int:
    return 2 if status == INCONCLUSIVE else 0
