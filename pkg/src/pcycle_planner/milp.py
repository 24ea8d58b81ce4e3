"""Single-link-protection p-cycle ILP and its limiting constraints.

Variables (all integer >= 0 unless noted):

* ``np_<p>``        copies of cycle p
* ``nip_<i>_<p>``   copies of cycle p protecting span i (only where x(i,p) != 0)
* ``s_<i>``         spare capacity on span i
* ``a_<i>_<p>``     binary, cycle p protects span i (L3 only)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping

from .cycles import ON_CYCLE, STRADDLING, CycleSet
from .topo import Network

INTEGER = "integer"
BINARY = "binary"

GE = ">="
LE = "<="

# Spare sizing rule as implemented; echoed in plan headers.
SPARE_READING = "s_i >= sum_p n_p * delta_ip"

INTEGRALITY_TOL = 1e-6


class ModelError(ValueError):
    pass


class UncoverableSpanError(ModelError):
    def __init__(self, span_id: int):
        super().__init__(f"span {span_id} carries working capacity but no candidate cycle touches it")
        self.span_id = span_id


class InfeasibleAssignmentError(ModelError):
    def __init__(self, row: str, lhs, rhs, sense: str):
        super().__init__(f"constraint {row} violated: {lhs} {sense} {rhs} does not hold")
        self.row = row


class NonIntegralValueError(ModelError):
    pass


@dataclass(frozen=True)
class Variable:
    name: str
    kind: str
    col: int


@dataclass(frozen=True)
class Constraint:
    name: str
    terms: tuple[tuple[int, int], ...]
    sense: str
    rhs: int
    family: str

    def lhs(self, values) -> float:
        return sum(coef * values[col] for col, coef in self.terms)

    def holds(self, values, tol: float = 0.0) -> bool:
        lhs = self.lhs(values)
        if self.sense == GE:
            return lhs >= self.rhs - tol
        return lhs <= self.rhs + tol


@dataclass(frozen=True)
class Model:
    variables: tuple[Variable, ...]
    objective: tuple[tuple[int, int], ...]
    constraints: tuple[Constraint, ...]
    tags: tuple[str, ...]
    np_col: Mapping[int, int] = field(repr=False)
    nip_col: Mapping[tuple[int, int], int] = field(repr=False)
    s_col: Mapping[int, int] = field(repr=False)
    a_col: Mapping[tuple[int, int], int] = field(default_factory=dict, repr=False)

    @property
    def n_vars(self) -> int:
        return len(self.variables)

    def column(self, name: str) -> int:
        for v in self.variables:
            if v.name == name:
                return v.col
        raise KeyError(name)

    def family_count(self, family: str) -> int:
        return sum(1 for c in self.constraints if c.family == family)

    def has_tag(self, prefix: str) -> bool:
        return any(t == prefix or t.startswith(prefix + "(") for t in self.tags)

    def objective_is_integral(self) -> bool:
        return all(
            float(coef).is_integer() and self.variables[col].kind in (INTEGER, BINARY)
            for col, coef in self.objective
        )


def _terms(coefs: Mapping[int, int]) -> tuple[tuple[int, int], ...]:
    return tuple((col, c) for col, c in sorted(coefs.items()) if c != 0)


def build_slp(net: Network, cycles: CycleSet, straddle_linking: bool = True) -> Model:
    """Spare-capacity minimisation for 100% single-span protection.

    With ``straddle_linking`` (default) every straddling ``n_ip`` is also
    bounded by ``n_p``; the printed linking rows only cover on-cycle spans,
    which would let a chord be protected by a cycle that has no copies.
    """
    for s in net.spans:
        if s.working > 0 and not cycles.by_span.get(s.id):
            raise UncoverableSpanError(s.id)

    variables: list[Variable] = []

    def add(name: str, kind: str = INTEGER) -> int:
        variables.append(Variable(name, kind, len(variables)))
        return len(variables) - 1

    np_col = {c.id: add(f"np_{c.id}") for c in cycles}
    nip_col = {}
    for s in net.spans:
        for p in cycles.by_span.get(s.id, ()):
            nip_col[s.id, p] = add(f"nip_{s.id}_{p}")
    s_col = {s.id: add(f"s_{s.id}") for s in net.spans}

    rows: list[Constraint] = []
    for s in net.spans:
        coefs = {nip_col[s.id, p]: cycles.x_of(s.id, p) for p in cycles.by_span.get(s.id, ())}
        rows.append(Constraint(f"cover_{s.id}", _terms(coefs), GE, s.working, "coverage"))
    for s in net.spans:
        for p in cycles.by_span.get(s.id, ()):
            x = cycles.x_of(s.id, p)
            if x == ON_CYCLE:
                terms = _terms({np_col[p]: 1, nip_col[s.id, p]: -1})
                rows.append(Constraint(f"link_{s.id}_{p}", terms, GE, 0, "linking"))
            elif x == STRADDLING and straddle_linking:
                terms = _terms({np_col[p]: 1, nip_col[s.id, p]: -1})
                rows.append(Constraint(f"slink_{s.id}_{p}", terms, GE, 0, "straddle_linking"))
    for s in net.spans:
        coefs = {s_col[s.id]: 1}
        for p in cycles.by_span.get(s.id, ()):
            if cycles.delta(s.id, p):
                coefs[np_col[p]] = -1
        rows.append(Constraint(f"spare_{s.id}", _terms(coefs), GE, 0, "spare"))

    objective = tuple((s_col[s.id], s.unit_cost) for s in net.spans)
    return Model(tuple(variables), objective, tuple(rows), ("SLP",), np_col, nip_col, s_col)


def _require_slp(model: Model) -> None:
    if "SLP" not in model.tags:
        raise ModelError("limiting constraints attach to an SLP model")


def add_l1(model: Model, net: Network, cycles: CycleSet, K: int) -> Model:
    """Per-span sharing budget: the four-case sum for span i is <= K.

    Terms are linear and unclamped, so the bracketed
    ``n_jp - (n_p - n_ip)`` parts may go negative.
    """
    _require_slp(model)
    if K < 0:
        raise ModelError("K must be non-negative")
    rows = []
    for s in net.spans:
        i = s.id
        coefs: dict[int, int] = {}

        def bump(col: int, c: int) -> None:
            coefs[col] = coefs.get(col, 0) + c

        for p in cycles.by_span.get(i, ()):
            xi = cycles.x_of(i, p)
            for j, xj in cycles.related[p]:
                if j == i:
                    continue
                if xi == ON_CYCLE and xj == ON_CYCLE:
                    bump(model.nip_col[j, p], 1)
                    continue
                weight = 2 if (xi == STRADDLING and xj == STRADDLING) else 1
                # weight * [n_jp - (n_p - n_ip)]
                bump(model.nip_col[j, p], weight)
                bump(model.np_col[p], -weight)
                bump(model.nip_col[i, p], weight)
        rows.append(Constraint(f"l1_{i}", _terms(coefs), LE, K, "l1"))
    return replace(
        model, constraints=model.constraints + tuple(rows), tags=model.tags + (f"L1(K={K})",)
    )


def add_l2(model: Model, cycles: CycleSet) -> Model:
    """Per cycle: total protected copies across spans is at most n_p."""
    _require_slp(model)
    rows = []
    for c in cycles:
        coefs = {model.nip_col[i, c.id]: 1 for i, _ in cycles.related[c.id]}
        coefs[model.np_col[c.id]] = -1
        rows.append(Constraint(f"l2_{c.id}", _terms(coefs), LE, 0, "l2"))
    return replace(model, constraints=model.constraints + tuple(rows), tags=model.tags + ("L2",))


def default_big_m(net: Network) -> int:
    return 1 + net.total_working()


def add_l3(model: Model, net: Network, cycles: CycleSet, M: int | None = None) -> Model:
    """Dedicate each cycle to at most one span via binaries a_ip."""
    _require_slp(model)
    if model.has_tag("L3"):
        raise ModelError("L3 already attached")
    if M is None:
        M = default_big_m(net)
    if M <= net.total_working():
        raise ModelError(f"big M must exceed total working capacity {net.total_working()}, got {M}")

    variables = list(model.variables)
    a_col = {}
    for key in model.nip_col:
        i, p = key
        a_col[key] = len(variables)
        variables.append(Variable(f"a_{i}_{p}", BINARY, len(variables)))

    rows = []
    for (i, p), col in a_col.items():
        rows.append(
            Constraint(f"l3m_{i}_{p}", _terms({col: M, model.nip_col[i, p]: -1}), GE, 0, "l3_big_m")
        )
    for (i, p), col in a_col.items():
        rows.append(Constraint(f"l3u_{i}_{p}", ((col, 1),), LE, 1, "l3_upper"))
    for c in cycles:
        coefs = {a_col[i, c.id]: 1 for i, _ in cycles.related[c.id]}
        rows.append(Constraint(f"l3x_{c.id}", _terms(coefs), LE, 1, "l3_exclusive"))
    return replace(
        model,
        variables=tuple(variables),
        constraints=model.constraints + tuple(rows),
        tags=model.tags + (f"L3(M={M})",),
        a_col=a_col,
    )


def build_model(
    net: Network,
    cycles: CycleSet,
    method: str = "slp",
    K: int | None = None,
    M: int | None = None,
    straddle_linking: bool = True,
) -> Model:
    """SLP model with the limiting constraint named by ``method`` attached."""
    model = build_slp(net, cycles, straddle_linking=straddle_linking)
    if method == "slp":
        return model
    if method == "l1":
        if K is None:
            raise ModelError("method l1 needs K")
        return add_l1(model, net, cycles, K)
    if method == "l2":
        return add_l2(model, cycles)
    if method == "l3":
        return add_l3(model, net, cycles, M)
    raise ModelError(f"unknown method {method!r}")


# -- LP interchange ------------------------------------------------------------


def _fmt_num(v) -> str:
    v = float(v)
    return str(int(v)) if v.is_integer() else repr(v)


def _expr(model: Model, terms, per_line: int = 8) -> list[str]:
    if not terms:
        return []
    parts = []
    for col, coef in terms:
        sign = "-" if coef < 0 else "+"
        parts.append(f"{sign} {_fmt_num(abs(coef))} {model.variables[col].name}")
    return [" ".join(parts[k : k + per_line]) for k in range(0, len(parts), per_line)]


def export_lp_text(model: Model) -> str:
    """CPLEX-LP style text (Minimize / Subject To / Bounds / Generals / Binaries)."""
    out = [f"\\ p-cycle model: {' '.join(model.tags)}", "Minimize"]
    obj = _expr(model, model.objective)
    out.append(" obj: " + (obj[0] if obj else "0 " + model.variables[0].name))
    out += ["   " + line for line in obj[1:]]
    out.append("Subject To")
    for row in model.constraints:
        lines = _expr(model, row.terms)
        if not lines:
            # keep the row so row counts stay stable; the dummy term has coef 0
            lines = [f"0 {model.variables[0].name}"]
        rel = ">=" if row.sense == GE else "<="
        if len(lines) == 1:
            out.append(f" {row.name}: {lines[0]} {rel} {row.rhs}")
        else:
            out.append(f" {row.name}: {lines[0]}")
            out += ["   " + line for line in lines[1:-1]]
            out.append(f"   {lines[-1]} {rel} {row.rhs}")
    out.append("Bounds")
    for v in model.variables:
        if v.kind == INTEGER:
            out.append(f" {v.name} >= 0")
        else:
            out.append(f" 0 <= {v.name} <= 1")
    generals = [v.name for v in model.variables if v.kind == INTEGER]
    binaries = [v.name for v in model.variables if v.kind == BINARY]
    if generals:
        out.append("Generals")
        out += [" " + " ".join(generals[k : k + 10]) for k in range(0, len(generals), 10)]
    if binaries:
        out.append("Binaries")
        out += [" " + " ".join(binaries[k : k + 10]) for k in range(0, len(binaries), 10)]
    out.append("End")
    return "\n".join(out) + "\n"


def parse_solution_text(text: str) -> dict[str, float]:
    """Read ``name value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ModelError(f"solution line {lineno}: expected 'name value'")
        try:
            values[parts[0]] = float(parts[1])
        except ValueError:
            raise ModelError(f"solution line {lineno}: bad value {parts[1]!r}") from None
    return values


# -- solutions -----------------------------------------------------------------


@dataclass(frozen=True)
class Solution:
    n_p: dict[int, int]
    n_ip: dict[tuple[int, int], int]
    s: dict[int, int]
    a_ip: dict[tuple[int, int], int]
    objective_value: int
    values: dict[str, int] = field(repr=False, default_factory=dict)

    def to_text(self, header: Iterable[str] = ()) -> str:
        lines = [f"# {h}" for h in header]
        lines += [f"{name} {val}" for name, val in self.values.items()]
        return "\n".join(lines) + "\n"


def verify_assignment(model: Model, values) -> None:
    """Raise InfeasibleAssignmentError naming the first violated row."""
    for v in model.variables:
        if values[v.col] < 0 or (v.kind == BINARY and values[v.col] > 1):
            raise InfeasibleAssignmentError(f"bound({v.name})", values[v.col], "[0, ub]", "in")
    for row in model.constraints:
        if not row.holds(values):
            raise InfeasibleAssignmentError(row.name, row.lhs(values), row.rhs, row.sense)


def bind_solution(model: Model, assignments: Mapping[str, float]) -> Solution:
    """Check an external name->value assignment and wrap it as a Solution."""
    missing = [v.name for v in model.variables if v.name not in assignments]
    if missing:
        raise ModelError(f"no value for {len(missing)} variable(s), e.g. {missing[0]}")
    known = {v.name for v in model.variables}
    unknown = sorted(set(assignments) - known)
    if unknown:
        raise ModelError(f"unknown variable {unknown[0]}")

    ints = []
    for v in model.variables:
        raw = float(assignments[v.name])
        r = round(raw)
        if not math.isfinite(raw) or abs(raw - r) > INTEGRALITY_TOL:
            raise NonIntegralValueError(f"{v.name} = {raw} is not integral")
        ints.append(int(r))
    verify_assignment(model, ints)

    objective = sum(coef * ints[col] for col, coef in model.objective)
    return Solution(
        n_p={p: ints[c] for p, c in model.np_col.items()},
        n_ip={k: ints[c] for k, c in model.nip_col.items()},
        s={i: ints[c] for i, c in model.s_col.items()},
        a_ip={k: ints[c] for k, c in model.a_col.items()},
        objective_value=int(objective),
        values={v.name: ints[v.col] for v in model.variables},
    )


def solution_from_vector(model: Model, x) -> Solution:
    return bind_solution(model, {v.name: float(x[v.col]) for v in model.variables})
