"""Exact Fourier-Motzkin elimination over named non-negative rate variables.

A system is a list of inequalities ``sum coeff*var <= bound`` over declared
variables, each implicitly >= 0.  Eliminating a variable pairs every
inequality with a positive coefficient on it against every one with a
negative coefficient (the implicit ``-var <= 0`` counts as negative), which
projects the polyhedron exactly.  All arithmetic is integer after clearing
denominators, so nothing is ever rounded.

A brute-force companion, :func:`enumerate_integer_projection`, walks every
non-negative integer assignment and records the achieved rate pairs.  It is
intentionally independent of the elimination path and serves as its oracle.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Mapping

from .regions import Halfspace, RateRegion, canonicalize

# A row is (coeffs, bound) with integer coeffs aligned to a var tuple.
Row = tuple[tuple[int, ...], int]

ENUMERATION_LIMIT = 10**8


class InfeasibleSystemError(Exception):
    """The inequality system admits no non-negative solution."""


class EnumerationLimitError(RuntimeError):
    """The integer enumeration would exceed the combination budget."""


class SystemParseError(ValueError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True)
class LinearIneq:
    """sum(coeffs[v] * v) <= bound; absent vars have coefficient 0."""

    coeffs: Mapping[str, Fraction]
    bound: Fraction

    def __post_init__(self) -> None:
        if not any(self.coeffs.values()):
            raise ValueError("inequality needs at least one nonzero coefficient")

    @classmethod
    def of(cls, coeffs: Mapping[str, int | Fraction], bound: int | Fraction) -> "LinearIneq":
        return cls({v: Fraction(c) for v, c in coeffs.items() if c != 0}, Fraction(bound))


@dataclass(frozen=True)
class IneqSystem:
    vars: tuple[str, ...]
    ineqs: tuple[LinearIneq, ...]

    def __post_init__(self) -> None:
        if len(set(self.vars)) != len(self.vars):
            raise ValueError("duplicate variable names")
        declared = set(self.vars)
        for q in self.ineqs:
            undeclared = set(q.coeffs) - declared
            if undeclared:
                raise ValueError(f"inequality references undeclared vars {sorted(undeclared)}")


def _to_rows(vars: tuple[str, ...], ineqs: Iterable[LinearIneq]) -> list[Row]:
    rows = []
    for q in ineqs:
        denoms = [c.denominator for c in q.coeffs.values()] + [q.bound.denominator]
        lcm = 1
        for d in denoms:
            lcm = lcm * d // gcd(lcm, d)
        coeffs = tuple(int(q.coeffs.get(v, 0) * lcm) for v in vars)
        rows.append(_normalize((coeffs, int(q.bound * lcm))))
    return rows


def _normalize(row: Row) -> Row:
    coeffs, b = row
    g = 0
    for c in coeffs:
        g = gcd(g, abs(c))
    g = gcd(g, abs(b))
    if g > 1:
        coeffs = tuple(c // g for c in coeffs)
        b //= g
    return (coeffs, b)


def _dominates(r: Row, s: Row) -> bool:
    """r implies s for non-negative vars: coeffs(r) >= coeffs(s), bound(r) <= bound(s)."""
    (rc, rb), (sc, sb) = r, s
    return rb <= sb and all(a >= b for a, b in zip(rc, sc))


def _implied_by_pair(target: Row, s: Row, t: Row) -> bool:
    """Is target implied by a non-negative rational combination of s and t?

    Solves lambda*s + mu*t == target exactly on coordinate pairs and checks
    the remaining coordinates and the bound; all integer arithmetic with the
    solution kept as (lam_n/det, mu_n/det).
    """
    (tc, tb), (sc, sb), (uc, ub) = target, s, t
    n = len(tc)
    for k1 in range(n):
        for k2 in range(k1 + 1, n):
            det = sc[k1] * uc[k2] - sc[k2] * uc[k1]
            if det == 0:
                continue
            lam_n = tc[k1] * uc[k2] - tc[k2] * uc[k1]
            mu_n = sc[k1] * tc[k2] - sc[k2] * tc[k1]
            if det < 0:
                det, lam_n, mu_n = -det, -lam_n, -mu_n
            if lam_n < 0 or mu_n < 0:
                continue
            if lam_n * sb + mu_n * ub > tb * det:
                continue
            if all(lam_n * sc[i] + mu_n * uc[i] >= tc[i] * det for i in range(n)):
                return True
    return False


def _prune(rows: list[Row], deep: bool = False) -> list[Row]:
    """Drop trivial, duplicate and dominated rows; optionally pair-implied ones."""
    best: dict[tuple[int, ...], int] = {}
    infeasible: list[Row] = []
    for coeffs, b in rows:
        if not any(coeffs):
            if b < 0:
                infeasible.append((coeffs, b))
            continue
        if coeffs not in best or b < best[coeffs]:
            best[coeffs] = b
    out = [(c, b) for c, b in best.items()]
    kept = [r for r in out if not any(s != r and _dominates(s, r) for s in out)]
    if deep and len(kept) > 12:
        slim: list[Row] = []
        for i, r in enumerate(kept):
            others = slim + kept[i + 1:]
            implied = any(
                _implied_by_pair(r, others[a], others[b])
                for a in range(len(others))
                for b in range(a, len(others))
            )
            if not implied:
                slim.append(r)
        kept = slim
    return sorted(infeasible + kept)


def _eliminate_rows(rows: list[Row], idx: int, nvars: int) -> list[Row]:
    pos, neg, zero = [], [], []
    for row in rows:
        c = row[0][idx]
        (pos if c > 0 else neg if c < 0 else zero).append(row)
    # Implicit non-negativity of the eliminated variable: -v <= 0.
    unit = tuple(-1 if i == idx else 0 for i in range(nvars))
    neg.append((unit, 0))
    combined = list(zero)
    for pc, pb in pos:
        for nc, nb in neg:
            mp, mn = -nc[idx], pc[idx]
            coeffs = tuple(mp * a + mn * b for a, b in zip(pc, nc))
            combined.append(_normalize((coeffs, mp * pb + mn * nb)))
    return _prune(combined, deep=True)


def _drop_var(rows: list[Row], idx: int) -> list[Row]:
    return [ (r[0][:idx] + r[0][idx + 1:], r[1]) for r in rows ]


def eliminate(system: IneqSystem, var: str) -> IneqSystem:
    """One exact elimination step; the result never references ``var``."""
    if var not in system.vars:
        raise ValueError(f"variable {var!r} not declared in system")
    idx = system.vars.index(var)
    rows = _eliminate_rows(_to_rows(system.vars, system.ineqs), idx, len(system.vars))
    rows = _drop_var(rows, idx)
    new_vars = system.vars[:idx] + system.vars[idx + 1:]
    ineqs = []
    for coeffs, b in rows:
        if any(coeffs):
            ineqs.append(LinearIneq.of(dict(zip(new_vars, coeffs)), b))
        elif b < 0:
            raise InfeasibleSystemError("elimination produced 0 <= negative")
    return IneqSystem(new_vars, tuple(ineqs))


def _check_defs(system: IneqSystem, name: str, d: Mapping[str, int]) -> None:
    for v, c in d.items():
        if v not in system.vars:
            raise ValueError(f"{name} references undeclared var {v!r}")
        if not isinstance(c, int) or c < 0:
            raise ValueError(f"{name} coefficient on {v!r} must be a non-negative integer")


def project_to_rates(
    system: IneqSystem,
    r1_def: Mapping[str, int],
    r2_def: Mapping[str, int],
) -> RateRegion:
    """Project onto (R1, R2) where R1/R2 are the given combinations of vars.

    The two rate definitions are adjoined as equalities (a pair of opposing
    inequalities each) and every component variable is eliminated in
    declaration order.  Raises :class:`InfeasibleSystemError` for systems
    with no solution, which is distinct from the degenerate region {(0,0)}.
    """
    _check_defs(system, "r1_def", r1_def)
    _check_defs(system, "r2_def", r2_def)
    vars = system.vars + ("R1", "R2")
    nv = len(vars)
    rows = _to_rows(vars, [LinearIneq.of({**q.coeffs}, q.bound) for q in system.ineqs])

    def eq_rows(rate_idx: int, d: Mapping[str, int]) -> list[Row]:
        coeffs = [0] * nv
        for v, c in d.items():
            coeffs[vars.index(v)] = c
        coeffs[rate_idx] = -1
        fwd = tuple(coeffs)
        bwd = tuple(-c for c in coeffs)
        return [(fwd, 0), (bwd, 0)]

    rows += eq_rows(nv - 2, r1_def)
    rows += eq_rows(nv - 1, r2_def)

    live = list(range(nv))
    for v in system.vars:
        pos = live.index(vars.index(v))
        rows = _eliminate_rows(rows, pos, len(live))
        rows = _drop_var(rows, pos)
        live.pop(pos)

    halfspaces = []
    for coeffs, b in rows:
        a1, a2 = coeffs
        if a1 == 0 and a2 == 0:
            if b < 0:
                raise InfeasibleSystemError("system is infeasible")
            continue
        halfspaces.append(Halfspace(Fraction(a1), Fraction(a2), Fraction(b)))
    return canonicalize(RateRegion(tuple(halfspaces)))


def enumerate_integer_projection(
    system: IneqSystem,
    r1_def: Mapping[str, int],
    r2_def: Mapping[str, int],
    bound: int | None = None,
) -> set[tuple[int, int]]:
    """Ground-truth oracle: achieved integer (R1, R2) pairs by exhaustion.

    Walks every non-negative integer assignment with components up to
    ``bound`` (default: the largest inequality bound), keeps the ones
    satisfying every inequality and maps them through the rate definitions.
    Depth-first with exact slack pruning, so exactly the satisfying
    assignments are visited.
    """
    _check_defs(system, "r1_def", r1_def)
    _check_defs(system, "r2_def", r2_def)
    rows = _to_rows(system.vars, system.ineqs)
    if bound is None:
        bound = max((r[1] for r in rows), default=0)
        bound = max(bound, 0)
    nv = len(system.vars)

    caps = []
    for i in range(nv):
        cap = bound
        for coeffs, b in rows:
            c = coeffs[i]
            if c > 0 and all(x >= 0 for x in coeffs):
                cap = min(cap, b // c if b >= 0 else -1)
        caps.append(max(cap, -1))
    total = 1
    for cap in caps:
        total *= cap + 1
        if total > ENUMERATION_LIMIT:
            raise EnumerationLimitError(
                f"enumeration needs more than {ENUMERATION_LIMIT} combinations; "
                "use a smaller instance or bound"
            )

    r1c = [r1_def.get(v, 0) for v in system.vars]
    r2c = [r2_def.get(v, 0) for v in system.vars]
    achieved: set[tuple[int, int]] = set()

    def rest_min(i: int, coeffs: tuple[int, ...]) -> int:
        # Smallest possible remaining contribution to a row (negative coeffs
        # may still lower the sum, so pruning stays exact).
        return sum(c * caps[j] for j, c in enumerate(coeffs[i:], start=i) if c < 0)

    all_nonneg = all(c >= 0 for coeffs, _ in rows for c in coeffs)

    def walk(i: int, slacks: list[int], r1: int, r2: int) -> None:
        if i == nv:
            achieved.add((r1, r2))
            return
        for val in range(caps[i] + 1):
            new = [s - val * rows[k][0][i] for k, s in enumerate(slacks)]
            # A row is unsatisfiable iff even the smallest completion overshoots.
            if any(new[k] < rest_min(i + 1, rows[k][0]) for k in range(len(rows))):
                if all_nonneg:
                    break  # larger values only make it worse
                continue
            walk(i + 1, new, r1 + r1c[i] * val, r2 + r2c[i] * val)

    if all(b >= rest_min(0, coeffs) for (coeffs, b) in rows):
        walk(0, [b for _, b in rows], 0, 0)
    return achieved


_TERM = re.compile(r"^\s*(?:(\d+)\s*\*\s*)?([A-Za-z_][A-Za-z0-9_]*)\s*$")


def _parse_expr(expr: str, line_no: int) -> dict[str, int]:
    coeffs: dict[str, int] = {}
    expr = expr.strip()
    if expr == "0" or expr == "":
        return coeffs
    for term in expr.split("+"):
        m = _TERM.match(term)
        if not m:
            raise SystemParseError(line_no, f"cannot parse term {term.strip()!r}")
        c = int(m.group(1)) if m.group(1) else 1
        v = m.group(2)
        coeffs[v] = coeffs.get(v, 0) + c
    return coeffs


def parse_system(text: str) -> tuple[IneqSystem, dict[str, int], dict[str, int]]:
    """Parse the fixture format: inequalities, R1/R2 definitions, # comments.

    Grammar, one statement per line:
        # comment
        2*Rc2 + Rc1 + R1d + R2d <= 4
        R1 = Rc1 + Rc2 + R1d
        R2 = Rc1 + Rc2 + R2d
    Bounds are integers (parameters already substituted).  Variables are
    collected in order of first appearance.
    """
    vars: list[str] = []
    ineqs: list[LinearIneq] = []
    defs: dict[str, dict[str, int]] = {}

    def note_vars(coeffs: Mapping[str, int]) -> None:
        for v in coeffs:
            if v not in vars:
                vars.append(v)

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "<=" in line:
            lhs, _, rhs = line.partition("<=")
            coeffs = _parse_expr(lhs, line_no)
            if not coeffs:
                raise SystemParseError(line_no, "inequality with empty left side")
            try:
                bound = int(rhs.strip())
            except ValueError:
                raise SystemParseError(line_no, f"bound {rhs.strip()!r} is not an integer")
            note_vars(coeffs)
            ineqs.append(LinearIneq.of(coeffs, bound))
        elif "=" in line:
            name, _, rhs = line.partition("=")
            name = name.strip()
            if name not in ("R1", "R2"):
                raise SystemParseError(line_no, f"only R1 and R2 may be defined, got {name!r}")
            if name in defs:
                raise SystemParseError(line_no, f"{name} defined twice")
            coeffs = _parse_expr(rhs, line_no)
            note_vars(coeffs)
            defs[name] = coeffs
        else:
            raise SystemParseError(line_no, f"unrecognized statement {line!r}")
    for name in ("R1", "R2"):
        if name not in defs:
            raise SystemParseError(0, f"missing definition for {name}")
    return IneqSystem(tuple(vars), tuple(ineqs)), defs["R1"], defs["R2"]
