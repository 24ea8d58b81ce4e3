"""Command-line front end.

Exit codes: 0 success, 1 domain verdict failure (not 3-connected, infeasible
plan), 2 input error, 3 solver budget exhausted.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import os
import subprocess
import sys
import tempfile
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path

from . import solver as slv
from .cycles import AUTO, CycleBudgetExceeded, CycleSet, cycles_to_csv, enumerate_simple_cycles
from .impact import AccountingMode, ImpactReport, impact_report
from .milp import (
    SPARE_READING,
    InfeasibleAssignmentError,
    Model,
    ModelError,
    Solution,
    bind_solution,
    build_model,
    export_lp_text,
    parse_solution_text,
    verify_assignment,
)
from .topo import (
    Network,
    TopologyError,
    is_three_connected,
    low_connectivity_pairs,
    make_three_connected,
    read_network,
    serialize_network,
)

EXIT_OK = 0
EXIT_VERDICT = 1
EXIT_INPUT = 2
EXIT_BUDGET = 3

METHODS = ("slp", "l1", "l2", "l3")
EXTERNAL_SOLVER_ENV = "PCYCLE_EXTERNAL_SOLVER"

log = logging.getLogger(__name__)


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class PlanRequest:
    topology: Path
    method: str = "slp"
    K: int | None = None
    M: int | None = None
    hop_limit: int | None | str = AUTO
    mode: AccountingMode = AccountingMode.STRUCTURAL
    limits: slv.SolveLimits = field(default_factory=slv.SolveLimits)
    engine: str = "auto"
    out: Path | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise UsageError(f"unknown method {self.method!r}")
        if (self.K is not None) != (self.method == "l1"):
            raise UsageError("--k is required for method l1 and only allowed there")
        if self.M is not None and self.method != "l3":
            raise UsageError("--big-m is only allowed with method l3")
        if self.K is not None and self.K < 0:
            raise UsageError("K must be non-negative")


@dataclass(frozen=True)
class PlanResult:
    status: str
    model: Model
    cycles: CycleSet
    network: Network
    solution: Solution | None = None
    report: ImpactReport | None = None
    best_bound: float | None = None


def _hop_label(hop_limit) -> str:
    return "unlimited" if hop_limit is None else str(hop_limit)


def _resolved_hops(net: Network, hop_limit):
    from .cycles import default_hop_limit

    return default_hop_limit(net) if hop_limit == AUTO else hop_limit


def solve_external(model: Model, command: str, workdir: Path) -> Solution:
    """Export the model, run ``command <lp> <solution>``, import the result."""
    lp = workdir / "model.lp"
    sol = workdir / "external.sol"
    lp.write_text(export_lp_text(model), encoding="utf-8")
    subprocess.run([command, str(lp), str(sol)], check=True)
    return bind_solution(model, parse_solution_text(sol.read_text(encoding="utf-8")))


def plan(
    net: Network,
    method: str = "slp",
    K: int | None = None,
    M: int | None = None,
    hop_limit=AUTO,
    mode: AccountingMode = AccountingMode.STRUCTURAL,
    limits: slv.SolveLimits | None = None,
    engine: str = "auto",
    cycles: CycleSet | None = None,
    start: Mapping[str, float] | None = None,
) -> PlanResult:
    """Enumerate cycles, build and solve the model, analyse the result.

    ``start`` seeds the solver with a known assignment (ignored if infeasible).
    """
    if cycles is None:
        cycles = enumerate_simple_cycles(net, hop_limit)
    model = build_model(net, cycles, method, K=K, M=M)
    external = os.environ.get(EXTERNAL_SOLVER_ENV)
    if external:
        with tempfile.TemporaryDirectory() as tmp:
            solution = solve_external(model, external, Path(tmp))
        status, bound = slv.OPTIMAL, float(solution.objective_value)
    else:
        outcome = slv.solve_milp(model, limits, engine, start)
        status, solution, bound = outcome.status, outcome.solution, outcome.best_bound
    report = None
    if solution is not None:
        report = impact_report(solution, cycles, net.with_spare(solution.s), mode)
    return PlanResult(status, model, cycles, net, solution, report, bound)


def plan_header(result: PlanResult, method, K, M, hop_limit, mode) -> list[str]:
    lines = [
        f"method: {method}",
        f"K: {'-' if K is None else K}",
        f"M: {'-' if method != 'l3' else (M if M is not None else 'default')}",
        f"hop_limit: {_hop_label(hop_limit)}",
        f"mode: {AccountingMode(mode).value}",
        f"spare_sizing: {SPARE_READING}",
        f"model: {' '.join(result.model.tags)}",
        f"cycles: {len(result.cycles)}",
        f"status: {result.status}",
    ]
    if result.solution is not None:
        r = result.report
        lines += [
            f"objective: {result.solution.objective_value}",
            f"SE: {float(r.se):.6f} ({r.se})",
            f"impact_sum: {r.impact_sum}",
            f"impact_mean: {float(r.impact_mean):.6f} ({r.impact_mean})",
        ]
    if result.status == slv.BUDGET_EXHAUSTED and result.best_bound is not None:
        lines.append(f"best_bound: {result.best_bound:g}")
    return lines


def sweep_k(
    net: Network,
    ks,
    hop_limit=AUTO,
    mode: AccountingMode = AccountingMode.STRUCTURAL,
    limits: slv.SolveLimits | None = None,
    engine: str = "auto",
    cycles: CycleSet | None = None,
) -> list[dict]:
    """One row per K (ascending): K, objective, SE, impact_sum, impact_mean, status.

    A larger K only relaxes the L1 rows, so each solve starts from the
    previous row's plan.
    """
    if cycles is None:
        cycles = enumerate_simple_cycles(net, hop_limit)
    rows: list[dict] = []
    for K in sorted(set(ks)):
        rows.append(_sweep_row(net, K, cycles, mode, limits, engine, rows))
    return [_public(r) for r in rows]


def _sweep_row(net, K, cycles, mode, limits, engine, previous) -> dict:
    start = next((r["_values"] for r in reversed(previous) if r["_values"]), None)
    try:
        res = plan(net, "l1", K=K, mode=mode, limits=limits, engine=engine, cycles=cycles,
                   start=start)
    except (slv.NumericalFailure, ModelError) as exc:
        log.warning("K=%d failed: %s", K, exc)
        return _row(K, None, f"error: {exc}")
    return _row(K, res, res.status)


def _public(row: dict) -> dict:
    return {k: v for k, v in row.items() if not k.startswith("_")}


def _row(K, res, status) -> dict:
    row = {"K": K, "objective": None, "SE": None, "impact_sum": None, "impact_mean": None}
    row["_values"] = None
    if res is not None and res.solution is not None:
        row["_values"] = res.solution.values
        row.update(
            objective=res.solution.objective_value,
            SE=res.report.se,
            impact_sum=res.report.impact_sum,
            impact_mean=res.report.impact_mean,
        )
    row["solve_status"] = status
    return row


def sweep_until_saturation(
    net: Network,
    hop_limit=AUTO,
    mode: AccountingMode = AccountingMode.STRUCTURAL,
    limits: slv.SolveLimits | None = None,
    engine: str = "auto",
    cycles: CycleSet | None = None,
    max_k: int = 1 << 20,
) -> list[dict]:
    """K = 0, 1, 2, 4, ... until the L1 optimum reaches the SLP optimum.

    L1 only adds rows to the SLP model, so the SLP optimum is a floor no K can
    go below; once a row reaches it, larger K cannot change the objective.
    Every K at or above the largest L1 left side of an SLP optimum reaches it,
    so the doubling ends unless a solve runs out of budget.
    """
    if cycles is None:
        cycles = enumerate_simple_cycles(net, hop_limit)
    floor = plan(net, "slp", mode=mode, limits=limits, engine=engine, cycles=cycles)
    if floor.status != slv.OPTIMAL:
        return [_row(0, None, f"slp {floor.status}")]
    target = floor.solution.objective_value
    rows: list[dict] = []
    K = 0
    while K <= max_k:
        if _satisfies(build_model(net, cycles, "l1", K=K), floor.solution):
            # the SLP optimum is feasible here, hence optimal; no search needed
            rows.append(_row(K, floor, slv.OPTIMAL))
            break
        row = _sweep_row(net, K, cycles, mode, limits, engine, rows)
        if row["objective"] == target:
            # an incumbent at the floor is optimal even if the search was cut short
            row["solve_status"] = slv.OPTIMAL
        rows.append(row)
        if row["objective"] == target:
            break
        K = 1 if K == 0 else 2 * K
    return [_public(r) for r in rows]


def _satisfies(model: Model, solution: Solution) -> bool:
    try:
        verify_assignment(model, [solution.values.get(v.name, 0) for v in model.variables])
    except InfeasibleAssignmentError:
        return False
    return True


def sweep_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["K", "objective", "SE", "impact_sum", "impact_mean", "solve_status"])

    def fmt(v):
        if v is None:
            return ""
        return f"{float(v):.6f}" if not isinstance(v, int) else str(v)

    for r in rows:
        writer.writerow(
            [r["K"], fmt(r["objective"]), fmt(r["SE"]), fmt(r["impact_sum"]),
             fmt(r["impact_mean"]), r["solve_status"]]
        )
    return buf.getvalue()


# -- commands ------------------------------------------------------------------


def cmd_check(args) -> int:
    net = read_network(args.topology)
    if is_three_connected(net):
        print("3-connected: yes")
        return EXIT_OK
    print("3-connected: no")
    for a, b, k in low_connectivity_pairs(net):
        print(f"{a} {b} {k}")
    return EXIT_VERDICT


def cmd_merge(args) -> int:
    net = read_network(args.topology)
    merged, merge_log = make_three_connected(net)
    text = serialize_network(merged)
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "merged.topo").write_text(text, encoding="utf-8")
        (args.out / "merge.log").write_text(merge_log.to_text(), encoding="utf-8")
    else:
        sys.stdout.write(text)
    print(f"# {len(merge_log)} merge step(s)", file=sys.stderr)
    return EXIT_OK


def cmd_cycles(args) -> int:
    net = read_network(args.topology)
    text = cycles_to_csv(enumerate_simple_cycles(net, args.hop_limit))
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "cycles.csv").write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _limits(args) -> slv.SolveLimits:
    return slv.SolveLimits(max_nodes=args.max_nodes, time_budget=args.time_budget)


def cmd_plan(args) -> int:
    req = PlanRequest(
        topology=args.topology,
        method=args.method,
        K=args.k,
        M=args.big_m,
        hop_limit=args.hop_limit,
        mode=AccountingMode(args.mode),
        limits=_limits(args),
        engine=args.engine,
        out=args.out,
    )
    net = read_network(req.topology)
    if len(net.nodes) >= 2 and not is_three_connected(net):
        print("warning: topology is not 3-connected", file=sys.stderr)
    result = plan(net, req.method, req.K, req.M, req.hop_limit, req.mode, req.limits, req.engine)
    header = plan_header(
        result, req.method, req.K, req.M, _resolved_hops(net, req.hop_limit), req.mode
    )
    print("\n".join(header))
    if req.out:
        req.out.mkdir(parents=True, exist_ok=True)
        (req.out / "plan.txt").write_text("\n".join(header) + "\n", encoding="utf-8")
        if result.solution is not None:
            (req.out / "solution.txt").write_text(result.solution.to_text(header), encoding="utf-8")
            (req.out / "impact.json").write_text(result.report.to_json(), encoding="utf-8")
            (req.out / "impact.csv").write_text(result.report.to_csv(), encoding="utf-8")
    if result.status == slv.OPTIMAL:
        return EXIT_OK
    if result.status == slv.BUDGET_EXHAUSTED:
        return EXIT_BUDGET
    return EXIT_VERDICT


def _parse_k_range(text: str) -> list[int]:
    try:
        parts = [int(p) for p in text.split(":")]
    except ValueError:
        raise UsageError(f"bad --k-range {text!r}; expected A:B:STEP") from None
    if len(parts) == 2:
        parts.append(1)
    if len(parts) != 3 or parts[2] <= 0 or parts[0] < 0 or parts[1] < parts[0]:
        raise UsageError(f"bad --k-range {text!r}; expected A:B:STEP")
    a, b, step = parts
    return list(range(a, b + 1, step))


def cmd_sweep_k(args) -> int:
    if args.method != "l1":
        raise UsageError("sweep-k needs --method l1")
    net = read_network(args.topology)
    common = dict(
        hop_limit=args.hop_limit, mode=AccountingMode(args.mode), limits=_limits(args),
        engine=args.engine,
    )
    if args.saturate:
        rows = sweep_until_saturation(net, **common)
    else:
        if args.k_range:
            ks = _parse_k_range(args.k_range)
        elif args.k is not None:
            ks = [args.k]
        else:
            raise UsageError("sweep-k needs --k, --k-range or --saturate")
        rows = sweep_k(net, ks, **common)
    text = sweep_csv(rows)
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "sweep.csv").write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- argument parsing ----------------------------------------------------------


def _hop_limit(text: str):
    if text == AUTO:
        return AUTO
    if text in ("none", "unlimited", "inf"):
        return None
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad hop limit {text!r}") from None
    if value < 3:
        raise argparse.ArgumentTypeError("hop limit must be at least 3")
    return value


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INPUT)


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--topology", type=Path, required=True)
    shared.add_argument("--hop-limit", type=_hop_limit, default=AUTO,
                        help="max cycle length, 'unlimited', or 'auto' (default)")
    shared.add_argument("--mode", choices=[m.value for m in AccountingMode],
                        default=AccountingMode.STRUCTURAL.value)
    shared.add_argument("--max-nodes", type=int, default=200_000)
    shared.add_argument("--time-budget", type=float, default=600.0)
    shared.add_argument("--engine", choices=["auto", "bnb", "highs"], default="auto")
    shared.add_argument("--out", type=Path, default=None, help="output directory")

    parser = _Parser(prog="pcycle", description="p-cycle protection planning")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("check", parents=[shared], help="3-connectivity verdict")
    sub.add_parser("merge", parents=[shared], help="merge nodes until 3-connected")
    sub.add_parser("cycles", parents=[shared], help="dump candidate cycles as CSV")

    for name in ("plan", "sweep-k"):
        p = sub.add_parser(name, parents=[shared])
        p.add_argument("--method", choices=METHODS, default="slp" if name == "plan" else "l1")
        p.add_argument("--k", type=int, default=None)
        p.add_argument("--big-m", type=int, default=None)
        if name == "sweep-k":
            p.add_argument("--k-range", default=None, help="A:B:STEP (inclusive)")
            p.add_argument("--saturate", action="store_true",
                           help="K = 0,1,2,4,... until the objective reaches the SLP optimum")
    return parser


COMMANDS = {
    "check": cmd_check,
    "merge": cmd_merge,
    "cycles": cmd_cycles,
    "plan": cmd_plan,
    "sweep-k": cmd_sweep_k,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, TopologyError, ModelError, CycleBudgetExceeded, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except subprocess.CalledProcessError as exc:
        print(f"error: external solver failed: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
