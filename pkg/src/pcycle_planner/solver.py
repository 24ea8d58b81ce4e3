"""Exact MILP solving for desk-scale p-cycle models.

Two engines:

``bnb``
    In-tree two-phase tableau simplex for the relaxations, best-first
    branch-and-bound on top. Branches on the most fractional variable (ties:
    lowest column), floor child first, nodes ordered by bound then FIFO.
``highs``
    HiGHS through ``highspy`` for models too large for a dense tableau, with
    the root heuristics that dominate its runtime on these models switched off.

``auto`` picks ``bnb`` up to :data:`BNB_MAX_COLUMNS` columns unless the model
carries big-M rows.
"""

from __future__ import annotations

import heapq
import logging
import math
import time
from collections.abc import Mapping
from dataclasses import dataclass, field, replace

import numpy as np

from .milp import (
    BINARY,
    GE,
    LE,
    Constraint,
    InfeasibleAssignmentError,
    Model,
    Solution,
    solution_from_vector,
    verify_assignment,
)

log = logging.getLogger(__name__)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
BUDGET_EXHAUSTED = "budget_exhausted"

BNB_MAX_COLUMNS = 120

_FEAS_TOL = 1e-9
_PIVOT_TOL = 1e-9
# degenerate pivots in a row before anti-cycling kicks in (Bland's rule in the
# primal method, cost perturbation in the dual one)
_DEGENERATE_SWITCH = 50
# bytes of open-node tableaux kept instead of refactored on expansion
_TABLEAU_CACHE_BYTES = 256 * 2**20


class NumericalFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class SolveLimits:
    max_nodes: int = 200_000
    time_budget: float = 600.0
    integrality_tolerance: float = 1e-6
    absolute_gap: float = 0.0

    def __post_init__(self):
        if self.max_nodes <= 0 or self.time_budget <= 0:
            raise ValueError("solve budgets must be positive")
        if not 0 < self.integrality_tolerance <= 1e-3:
            raise ValueError("integrality tolerance must lie in (0, 1e-3]")
        if self.absolute_gap < 0:
            raise ValueError("absolute gap must be non-negative")


@dataclass(frozen=True)
class LPResult:
    status: str
    x: np.ndarray | None = None
    objective: float | None = None
    iterations: int = 0


@dataclass(frozen=True)
class SolveOutcome:
    status: str
    solution: Solution | None
    best_bound: float | None
    nodes_explored: int
    engine: str = "bnb"
    # root relaxation value; the HiGHS engine does not report one
    lp_bound: float | None = None
    incumbents: tuple[float, ...] = field(default=(), repr=False)

    @property
    def objective(self) -> int | None:
        return None if self.solution is None else self.solution.objective_value


# -- model -> arrays -----------------------------------------------------------


def model_arrays(model: Model):
    """Dense ``(c, A, senses, b, ub)`` for a model (all lower bounds are 0)."""
    n = model.n_vars
    c = np.zeros(n)
    for col, coef in model.objective:
        c[col] += coef
    A = np.zeros((len(model.constraints), n))
    b = np.zeros(len(model.constraints))
    senses = []
    for r, row in enumerate(model.constraints):
        for col, coef in row.terms:
            A[r, col] += coef
        b[r] = row.rhs
        senses.append(row.sense)
    ub = np.array([1.0 if v.kind == BINARY else np.inf for v in model.variables])
    return c, A, senses, b, ub


# -- simplex -------------------------------------------------------------------


def simplex(c, A, senses, b, lb=None, ub=None, max_iter: int = 100_000) -> LPResult:
    """Minimise ``c @ x`` s.t. ``A x (senses) b``, ``lb <= x <= ub``.

    Two-phase dense tableau method. Entering column by most negative reduced
    cost, falling back to Bland's rule after a run of degenerate pivots;
    leaving row by minimum ratio with ties on the smallest basic index.
    """
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float).reshape(-1, c.size)
    b = np.asarray(b, dtype=float)
    n = c.size
    lb = np.zeros(n) if lb is None else np.asarray(lb, dtype=float)
    ub = np.full(n, np.inf) if ub is None else np.asarray(ub, dtype=float)
    if np.any(ub < lb - _FEAS_TOL):
        return LPResult(INFEASIBLE)

    # shift to y = x - lb >= 0 and turn finite upper bounds into rows
    rows = [A]
    rhs = [b - A @ lb]
    sense = list(senses)
    finite = np.flatnonzero(np.isfinite(ub))
    if finite.size:
        U = np.zeros((finite.size, n))
        U[np.arange(finite.size), finite] = 1.0
        rows.append(U)
        rhs.append(ub[finite] - lb[finite])
        sense += ["<="] * finite.size
    A_ = np.vstack(rows) if len(rows) > 1 else A
    b_ = np.concatenate(rhs)
    m = b_.size

    # normalise to b >= 0
    flip = b_ < 0
    A_ = np.where(flip[:, None], -A_, A_)
    b_ = np.where(flip, -b_, b_)
    sense = [
        ({"<=": ">=", ">=": "<="}.get(s, s) if f else s) for s, f in zip(sense, flip)
    ]

    n_slack = sum(1 for s in sense if s in ("<=", ">="))
    n_art = sum(1 for s in sense if s in (">=", "="))
    width = n + n_slack + n_art
    T = np.zeros((m + 1, width + 1))
    T[:m, :n] = A_
    T[:m, -1] = b_
    basis = np.empty(m, dtype=int)
    sc, ac = n, n + n_slack
    art_cols = []
    for r, s in enumerate(sense):
        if s == "<=":
            T[r, sc] = 1.0
            basis[r] = sc
            sc += 1
        elif s == ">=":
            T[r, sc] = -1.0
            sc += 1
            T[r, ac] = 1.0
            basis[r] = ac
            art_cols.append(ac)
            ac += 1
        else:
            T[r, ac] = 1.0
            basis[r] = ac
            art_cols.append(ac)
            ac += 1

    iters = 0
    if art_cols:
        # phase 1: minimise the sum of artificials
        cost1 = np.zeros(width)
        cost1[art_cols] = 1.0
        T[m, :width] = cost1
        T[m, -1] = 0.0
        for r in range(m):
            if cost1[basis[r]]:
                T[m] -= T[r]
        status, k = _pivot_loop(T, basis, width, max_iter)
        iters += k
        if status != OPTIMAL:
            raise NumericalFailure(f"phase 1 ended with status {status}")
        if -T[m, -1] > 1e-7 * max(1.0, np.abs(b_).max(initial=0.0)):
            return LPResult(INFEASIBLE, iterations=iters)
        _evict_artificials(T, basis, n + n_slack)
        keep = [r for r in range(m) if basis[r] < n + n_slack]
        if len(keep) < m:
            T = np.vstack([T[keep], T[m:]])
            basis = basis[keep]
            m = len(keep)
        T = np.delete(T, art_cols, axis=1)
        width = n + n_slack

    # phase 2
    cost2 = np.zeros(width)
    cost2[:n] = c
    T[m, :width] = cost2
    T[m, -1] = 0.0
    for r in range(m):
        if cost2[basis[r]]:
            T[m] -= cost2[basis[r]] * T[r]
    status, k = _pivot_loop(T, basis, width, max_iter)
    iters += k
    if status != OPTIMAL:
        return LPResult(status, iterations=iters)

    y = np.zeros(width)
    y[basis] = T[:m, -1]
    x = y[:n] + lb
    return LPResult(OPTIMAL, x, float(c @ x), iters)


def _pivot_loop(T, basis, width, max_iter):
    m = T.shape[0] - 1
    degenerate_run = 0
    for it in range(max_iter):
        rc = T[m, :width]
        if degenerate_run >= _DEGENERATE_SWITCH:
            cand = np.flatnonzero(rc < -_PIVOT_TOL)
            if cand.size == 0:
                return OPTIMAL, it
            e = int(cand[0])
        else:
            e = int(np.argmin(rc))
            if rc[e] >= -_PIVOT_TOL:
                return OPTIMAL, it
        col = T[:m, e]
        pos = np.flatnonzero(col > _PIVOT_TOL)
        if pos.size == 0:
            return UNBOUNDED, it
        ratios = T[pos, -1] / col[pos]
        best = ratios.min()
        ties = pos[ratios <= best + 1e-12]
        r = int(ties[np.argmin(basis[ties])])
        degenerate_run = degenerate_run + 1 if T[r, -1] <= _FEAS_TOL else 0
        _pivot(T, r, e)
        basis[r] = e
    raise NumericalFailure("simplex iteration limit reached")


def _pivot(T, r, e):
    T[r] /= T[r, e]
    col = T[:, e].copy()
    col[r] = 0.0
    nz = np.flatnonzero(col)
    if nz.size:
        block = T[nz] - np.outer(col[nz], T[r])
        block[np.abs(block) < 1e-12] = 0.0
        T[nz] = block


def _evict_artificials(T, basis, n_real):
    m = T.shape[0] - 1
    for r in range(m):
        if basis[r] >= n_real:
            nz = np.flatnonzero(np.abs(T[r, :n_real]) > _PIVOT_TOL)
            if nz.size:
                e = int(nz[0])
                _pivot(T, r, e)
                basis[r] = e


def solve_lp(model: Model, lb=None, ub=None) -> LPResult:
    """LP relaxation of ``model`` with integrality dropped."""
    c, A, senses, b, model_ub = model_arrays(model)
    if ub is None:
        ub = model_ub
    return simplex(c, A, senses, b, lb, ub)


# -- branch and bound ----------------------------------------------------------


class _DualTableau:
    """Dense tableau for ``min c x, A x <= b, x >= 0`` driven by dual simplex.

    Every row owns a slack column. Branching bounds are appended as extra
    ``<=`` rows, so a child LP is its parent's optimal tableau plus one row,
    re-optimised with a few dual pivots.
    """

    def __init__(self, c, A, b):
        self.c = c
        self.A = A
        self.b = b
        self.n = c.size

    def full_rows(self, cuts):
        """Constraint matrix and rhs with the branching rows appended."""
        m, n = self.A.shape
        d = len(cuts)
        M = np.zeros((m + d, n + m + d))
        M[:m, :n] = self.A
        M[:, n:] = np.eye(m + d)
        rhs = np.empty(m + d)
        rhs[:m] = self.b
        for k, (j, sign, val) in enumerate(cuts):
            M[m + k, j] = sign
            rhs[m + k] = sign * val
        return M, rhs

    def factor(self, cuts, basis):
        """Rebuild the tableau for ``basis`` from the original data."""
        M, rhs = self.full_rows(cuts)
        B = M[:, basis]
        body = np.linalg.solve(B, np.column_stack([M, rhs]))
        cost = np.zeros(M.shape[1])
        cost[: self.n] = self.c
        T = np.vstack([body, np.append(cost, 0.0) - cost[basis] @ body])
        return _clean(T)

    def slack_start(self, cuts=()):
        M, rhs = self.full_rows(cuts)
        rows = M.shape[0]
        basis = np.arange(self.n, self.n + rows)
        T = np.zeros((rows + 1, M.shape[1] + 1))
        T[:rows, :-1] = M
        T[:rows, -1] = rhs
        T[rows, : self.n] = self.c
        return T, basis

    @staticmethod
    def add_cut(T, basis, j, sign, val):
        """Append ``sign * x_j <= sign * val`` to an optimal tableau."""
        m = T.shape[0] - 1
        T2 = np.zeros((m + 2, T.shape[1] + 1))
        T2[:m, :-2] = T[:m, :-1]
        T2[:m, -1] = T[:m, -1]
        T2[m + 1, :-2] = T[m, :-1]
        T2[m + 1, -1] = T[m, -1]
        row = np.zeros(T2.shape[1])
        row[j] = sign
        row[-2] = 1.0
        row[-1] = sign * val
        hit = np.flatnonzero(basis == j)
        if hit.size:
            r = int(hit[0])
            row -= sign * T2[r]
            row[j] = 0.0
        T2[m] = row
        return T2, np.append(basis, T.shape[1] - 1)

    def solution(self, T, basis):
        x = np.zeros(T.shape[1] - 1)
        x[basis] = T[:-1, -1]
        return x[: self.n], float(-T[-1, -1])


def _clean(T):
    T[np.abs(T) < 1e-11] = 0.0
    return T


def _dual_simplex(T, basis, max_iter=100_000):
    """Restore primal feasibility keeping reduced costs >= 0.

    A long run of dual-degenerate pivots can cycle. When one starts, the zero
    reduced costs are nudged up by tiny deterministic amounts; once primal
    feasible, the true costs are restored and primal pivots finish the job.
    """
    m = T.shape[0] - 1
    width = T.shape[1] - 1
    degenerate_run = 0
    lift = None
    for _ in range(max_iter):
        beta = T[:m, -1]
        bad = np.flatnonzero(beta < -_FEAS_TOL)
        if bad.size == 0:
            if lift is not None:
                _restore_costs(T, basis, lift)
                status, _ = _pivot_loop(T, basis, width, max_iter)
                return status
            return OPTIMAL
        if degenerate_run >= _DEGENERATE_SWITCH and lift is None:
            lift = _perturb_costs(T, basis)
        r = int(bad[np.argmin(beta[bad])])
        row = T[r, :-1]
        cand = np.flatnonzero(row < -_PIVOT_TOL)
        if cand.size == 0:
            if lift is not None:
                _restore_costs(T, basis, lift)
            return INFEASIBLE
        # Harris two-pass ratio test: among near-minimal ratios take the
        # largest pivot; tiny pivots at degenerate vertices wreck the tableau
        alpha = -row[cand]
        d = np.maximum(T[m, cand], 0.0)
        theta = ((d + _FEAS_TOL) / alpha).min()
        ok = np.flatnonzero(d / alpha <= theta)
        e = int(cand[ok[np.argmax(alpha[ok])]])
        degenerate_run = degenerate_run + 1 if T[m, e] <= _FEAS_TOL else 0
        _pivot(T, r, e)
        basis[r] = e
    raise NumericalFailure("dual simplex iteration limit reached")


def _perturb_costs(T, basis):
    """Add small distinct amounts to the nonbasic costs; return the amounts."""
    m = T.shape[0] - 1
    lift = np.random.default_rng(T.shape[1]).uniform(1e-7, 1e-6, T.shape[1] - 1)
    lift[basis] = 0.0
    T[m, :-1] += lift
    return lift


def _restore_costs(T, basis, lift):
    """Undo :func:`_perturb_costs` for whatever basis is current now."""
    m = T.shape[0] - 1
    lb = lift[basis]
    T[m, :-1] += lb @ T[:m, :-1] - lift
    T[m, -1] += lb @ T[:m, -1]


def _as_leq(c, A, senses, b, ub):
    """Rewrite rows (and finite upper bounds) as ``<=`` rows."""
    rows, rhs = [], []
    for k, sense in enumerate(senses):
        if sense in ("<=", "="):
            rows.append(A[k])
            rhs.append(b[k])
        if sense in (">=", "="):
            rows.append(-A[k])
            rhs.append(-b[k])
    for j in np.flatnonzero(np.isfinite(ub)):
        e = np.zeros(c.size)
        e[j] = 1.0
        rows.append(e)
        rhs.append(ub[j])
    A_ = np.array(rows).reshape(-1, c.size)
    b_ = np.array(rhs, dtype=float)
    # identical rows (e.g. an explicit a <= 1 row next to a binary bound) only bloat the tableau
    _, keep = np.unique(np.column_stack([A_, b_]), axis=0, return_index=True)
    keep.sort()
    return A_[keep], b_[keep]


@dataclass(order=True)
class _Node:
    bound: float
    seq: int
    cuts: tuple = field(compare=False)
    basis: np.ndarray = field(compare=False)
    x: np.ndarray = field(compare=False)


def _most_fractional(x, tol):
    frac = np.abs(x - np.round(x))
    j = int(np.argmax(frac))
    return None if frac[j] <= tol else j


def _prunable(bound, incumbent, integral_obj, gap):
    if incumbent is None:
        return False
    if integral_obj:
        return math.ceil(bound - 1e-6) >= incumbent - gap
    return bound >= incumbent - gap - 1e-9


def _child_lp(tab, T, node, j, sign, val):
    """Parent tableau plus one bound row, re-optimised; None if infeasible.

    Inherited tableaus pick up rounding drift down a deep tree. If the dual
    simplex stalls, the child is solved again from the all-slack basis, which
    is dual feasible because costs are non-negative.
    """
    T2, basis2 = tab.add_cut(T, node.basis, j, sign, val)
    try:
        status = _dual_simplex(T2, basis2, max_iter=_dual_iteration_cap(T2))
    except NumericalFailure:
        log.info("dual simplex stalled at depth %d; solving from scratch", len(node.cuts))
        T2, basis2 = tab.slack_start(node.cuts + ((j, sign, val),))
        status = _dual_simplex(T2, basis2, max_iter=_dual_iteration_cap(T2))
    return (T2, basis2) if status == OPTIMAL else None


def _dual_iteration_cap(T):
    return 50 * sum(T.shape)


def _solve_bnb(model: Model, limits: SolveLimits, warm: np.ndarray | None) -> SolveOutcome:
    start = time.monotonic()
    c, A, senses, b, ub = model_arrays(model)
    if np.any(c < 0):
        raise ValueError("the bnb engine needs a non-negative objective")
    integral_obj = model.objective_is_integral()
    tol = limits.integrality_tolerance
    tab = _DualTableau(c, *_as_leq(c, A, senses, b, ub))

    T, basis = tab.slack_start()
    if _dual_simplex(T, basis) == INFEASIBLE:
        return SolveOutcome(INFEASIBLE, None, None, 1, "bnb")
    x, root_obj = tab.solution(T, basis)

    heap = [_Node(root_obj, 0, (), basis.copy(), x)]
    cache = {0: T}
    cached_bytes = T.nbytes
    seq = 1
    incumbent_x, incumbent = None, None
    if warm is not None:
        incumbent_x, incumbent = warm, float(c @ warm)
    history = []
    nodes = 0
    exhausted = False
    while heap:
        if nodes >= limits.max_nodes or time.monotonic() - start > limits.time_budget:
            exhausted = True
            break
        node = heapq.heappop(heap)
        nodes += 1
        T = cache.pop(node.seq, None)
        if T is not None:
            cached_bytes -= T.nbytes
        if _prunable(node.bound, incumbent, integral_obj, limits.absolute_gap):
            continue
        j = _most_fractional(node.x, tol)
        if j is None:
            value = float(c @ np.round(node.x))
            if incumbent is None or value < incumbent:
                incumbent, incumbent_x = value, np.round(node.x)
                history.append(value)
                log.info("incumbent %g after %d nodes", value, nodes)
            continue
        if T is None:
            T = tab.factor(node.cuts, node.basis)
        v = node.x[j]
        for sign, val in ((1.0, math.floor(v)), (-1.0, math.ceil(v))):
            child = _child_lp(tab, T, node, j, sign, val)
            if child is None:
                continue
            T2, basis2 = child
            x2, obj2 = tab.solution(T2, basis2)
            if _prunable(obj2, incumbent, integral_obj, limits.absolute_gap):
                continue
            heapq.heappush(heap, _Node(obj2, seq, node.cuts + ((j, sign, val),), basis2, x2))
            if cached_bytes + T2.nbytes <= _TABLEAU_CACHE_BYTES:
                cache[seq] = T2
                cached_bytes += T2.nbytes
            seq += 1

    solution = solution_from_vector(model, incumbent_x) if incumbent_x is not None else None
    if exhausted:
        open_bounds = [n.bound for n in heap] + ([incumbent] if incumbent is not None else [])
        bound = min(open_bounds) if open_bounds else None
        if bound is not None and integral_obj:
            bound = float(math.ceil(bound - 1e-6))
        return SolveOutcome(
            BUDGET_EXHAUSTED, solution, bound, nodes, "bnb", root_obj, tuple(history)
        )
    if solution is None:
        return SolveOutcome(INFEASIBLE, None, None, nodes, "bnb", root_obj)
    if solution.objective_value < root_obj - 1e-6:
        raise NumericalFailure("integer optimum below the LP relaxation bound")
    return SolveOutcome(
        OPTIMAL,
        solution,
        float(solution.objective_value),
        nodes,
        "bnb",
        root_obj,
        tuple(history),
    )


# -- HiGHS ---------------------------------------------------------------------


_HIGHS_OPTIONS = {
    "output_flag": False,
    "threads": 1,
    "random_seed": 0,
    "mip_rel_gap": 0.0,
    "mip_abs_gap": 0.0,
    # on cycle models with thousands of columns the sub-MIP and
    # reduced-cost heuristics take minutes and rarely beat branching
    "mip_heuristic_effort": 0.0,
    "mip_heuristic_run_rins": False,
    "mip_heuristic_run_rens": False,
    "mip_heuristic_run_root_reduced_cost": False,
}


def _solve_highs(model: Model, limits: SolveLimits, warm: np.ndarray | None) -> SolveOutcome:
    import highspy

    n, m = model.n_vars, len(model.constraints)
    inf = highspy.kHighsInf
    lp = highspy.HighsLp()
    lp.num_col_, lp.num_row_ = n, m
    cost = np.zeros(n)
    for col, coef in model.objective:
        cost[col] += coef
    lp.col_cost_ = cost
    lp.col_lower_ = np.zeros(n)
    lp.col_upper_ = np.array([1.0 if v.kind == BINARY else inf for v in model.variables])
    lp.row_lower_ = np.array([r.rhs if r.sense == GE else -inf for r in model.constraints], float)
    lp.row_upper_ = np.array([r.rhs if r.sense != GE else inf for r in model.constraints], float)
    # row-wise storage maps straight onto the constraint list
    lengths = [len(r.terms) for r in model.constraints]
    lp.a_matrix_.format_ = highspy.MatrixFormat.kRowwise
    lp.a_matrix_.start_ = np.concatenate([[0], np.cumsum(lengths)]).astype(np.int32)
    lp.a_matrix_.index_ = np.array([c for r in model.constraints for c, _ in r.terms], np.int32)
    lp.a_matrix_.value_ = np.array([v for r in model.constraints for _, v in r.terms], float)
    lp.integrality_ = [highspy.HighsVarType.kInteger] * n

    h = highspy.Highs()
    for key, value in _HIGHS_OPTIONS.items():
        h.setOptionValue(key, value)
    h.setOptionValue("time_limit", float(limits.time_budget))
    h.setOptionValue("mip_max_nodes", int(limits.max_nodes))
    h.passModel(lp)
    if warm is not None:
        h.setSolution(n, np.arange(n, dtype=np.int32), warm)
    h.run()

    status = h.getModelStatus()
    info = h.getInfo()
    nodes = int(info.mip_node_count)
    S = highspy.HighsModelStatus
    if status in (S.kInfeasible, S.kUnboundedOrInfeasible):
        return SolveOutcome(INFEASIBLE, None, None, nodes, "highs")
    if status == S.kOptimal:
        outcome = OPTIMAL
    elif status in (S.kTimeLimit, S.kSolutionLimit, S.kIterationLimit, S.kInterrupt):
        outcome = BUDGET_EXHAUSTED
    else:
        raise NumericalFailure(f"HiGHS: {h.modelStatusToString(status)}")
    solution = None
    if info.primal_solution_status == highspy.SolutionStatus.kSolutionStatusFeasible:
        # HiGHS honours integrality to its own tolerance; the rounded point is
        # re-verified exactly by the caller
        solution = solution_from_vector(model, np.round(h.getSolution().col_value))
    if outcome == OPTIMAL:
        return SolveOutcome(OPTIMAL, solution, float(solution.objective_value), nodes, "highs")
    bound = float(info.mip_dual_bound)
    if model.objective_is_integral():
        bound = float(math.ceil(bound - 1e-6))
    return SolveOutcome(BUDGET_EXHAUSTED, solution, bound, nodes, "highs")


def with_implied_rows(model: Model) -> Model:
    """Add rows every integer-feasible point already satisfies.

    Under the one-span-per-cycle binaries at most one ``n_ip`` per cycle is
    nonzero and it is at most ``n_p``, so ``sum_i n_ip <= n_p`` holds. The big-M
    relaxation alone ignores this and its bound collapses to the plain model's.
    """
    if not model.a_col or model.has_tag("L2"):
        return model
    per_cycle: dict[int, list[int]] = {}
    for (_, p), col in model.nip_col.items():
        per_cycle.setdefault(p, []).append(col)
    rows = tuple(
        Constraint(
            f"implied_{p}",
            tuple(sorted((c, 1) for c in cols)) + ((model.np_col[p], -1),),
            LE,
            0,
            "implied_sharing",
        )
        for p, cols in sorted(per_cycle.items())
    )
    return replace(model, constraints=model.constraints + rows)


def _start_vector(model: Model, start: Mapping[str, float] | None) -> np.ndarray | None:
    if start is None:
        return None
    x = np.array([start.get(v.name, 0) for v in model.variables], dtype=float)
    try:
        verify_assignment(model, x)
    except InfeasibleAssignmentError:
        log.info("start assignment violates the model; ignored")
        return None
    return x


def solve_milp(
    model: Model,
    limits: SolveLimits | None = None,
    engine: str = "auto",
    start: Mapping[str, float] | None = None,
) -> SolveOutcome:
    """Exact optimum of ``model``; see the module docstring for the engines.

    ``start`` is an optional assignment by variable name used as the first
    incumbent. It is ignored unless it satisfies every row of ``model``.
    """
    limits = limits or SolveLimits()
    if engine == "auto":
        # big-M rows give the in-tree engine a near-useless relaxation
        small = model.n_vars <= BNB_MAX_COLUMNS and not model.family_count("l3_big_m")
        engine = "bnb" if small else "highs"
    solvers = {"bnb": _solve_bnb, "highs": _solve_highs}
    if engine not in solvers:
        raise ValueError(f"unknown engine {engine!r}")
    outcome = solvers[engine](with_implied_rows(model), limits, _start_vector(model, start))
    if outcome.solution is not None:
        verify_assignment(model, [outcome.solution.values[v.name] for v in model.variables])
    return outcome
