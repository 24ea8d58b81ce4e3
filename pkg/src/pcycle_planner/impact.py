"""Impact-zone and spare-efficiency analysis of a p-cycle plan.

Two accounting modes for a failure of span i:

``structural``
    every cycle having i on-cycle is broken, whether or not it was carrying
    i's restoration;
``consumption``
    only cycles that actually restore i (``n_ip > 0``) lose capacity.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from .cycles import ON_CYCLE, STRADDLING, CycleSet
from .milp import Solution
from .topo import Network


class AccountingMode(str, Enum):
    STRUCTURAL = "structural"
    CONSUMPTION = "consumption"


class UndefinedEfficiencyError(ValueError):
    pass


def indicator(x: int) -> int:
    """|x| for negative x, else 0."""
    return -x if x < 0 else 0


def protection_capacity(solution: Solution, cycles: CycleSet) -> dict[int, int]:
    """Restoration units per span; straddling copies count twice."""
    cap = {i: 0 for i in cycles.span_ids}
    for (i, p), n in solution.n_ip.items():
        cap[i] += cycles.x_of(i, p) * n
    return cap


def pair_cycle_loss(
    i: int,
    k: int,
    p: int,
    solution: Solution,
    cycles: CycleSet,
    mode: AccountingMode = AccountingMode.STRUCTURAL,
) -> int:
    """Protection span k loses on cycle p when span i fails."""
    if i == k:
        raise ValueError("failed span and protected span must differ")
    mode = AccountingMode(mode)
    xi, xk = cycles.x_of(i, p), cycles.x_of(k, p)
    if not xi or not xk:
        return 0
    n_ip = solution.n_ip.get((i, p), 0)
    n_kp = solution.n_ip.get((k, p), 0)
    n_p = solution.n_p.get(p, 0)
    if mode is AccountingMode.CONSUMPTION and n_ip <= 0:
        return 0
    if xi == ON_CYCLE:
        if xk == ON_CYCLE:
            return n_kp
        return indicator((n_p - n_ip) - 2 * n_kp)
    if xi == STRADDLING and n_ip > 0:
        return indicator(xk * ((n_p - n_ip) - n_kp))
    return 0


def pair_loss(
    i: int,
    k: int,
    solution: Solution,
    cycles: CycleSet,
    mode: AccountingMode = AccountingMode.STRUCTURAL,
) -> int:
    shared = set(cycles.by_span.get(i, ())) & set(cycles.by_span.get(k, ()))
    return sum(pair_cycle_loss(i, k, p, solution, cycles, mode) for p in sorted(shared))


def impact_zone(
    i: int,
    solution: Solution,
    cycles: CycleSet,
    net: Network,
    mode: AccountingMode = AccountingMode.STRUCTURAL,
    prot_cap: dict[int, int] | None = None,
) -> int:
    """Working capacity left unprotected after span i fails and is restored."""
    if prot_cap is None:
        prot_cap = protection_capacity(solution, cycles)
    total = 0
    for s in net.spans:
        if s.id == i:
            continue
        loss = pair_loss(i, s.id, solution, cycles, mode)
        if loss:
            total += indicator(prot_cap[s.id] - loss - s.working)
    return total


@dataclass(frozen=True)
class ImpactReport:
    mode: AccountingMode
    prot_cap: dict[int, int]
    loss: dict[tuple[int, int], int]
    impact: dict[int, int]
    impact_sum: int
    impact_mean: Fraction
    se: Fraction
    working: dict[int, int]
    spare: dict[int, int]

    def to_json(self) -> str:
        doc = {
            "mode": self.mode.value,
            "se": float(self.se),
            "se_exact": str(self.se),
            "impact_sum": self.impact_sum,
            "impact_mean": float(self.impact_mean),
            "impact_mean_exact": str(self.impact_mean),
            "spans": [
                {
                    "span_id": i,
                    "w": self.working[i],
                    "s": self.spare[i],
                    "prot_cap": self.prot_cap[i],
                    "impact": self.impact[i],
                }
                for i in sorted(self.impact)
            ],
            "loss": [
                {"failed": i, "protected": k, "loss": v} for (i, k), v in sorted(self.loss.items())
            ],
        }
        return json.dumps(doc, indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["span_id", "w", "s", "prot_cap", "impact"])
        for i in sorted(self.impact):
            writer.writerow([i, self.working[i], self.spare[i], self.prot_cap[i], self.impact[i]])
        return buf.getvalue()


def spare_efficiency(spare: dict[int, int], net: Network) -> Fraction:
    total_w = net.total_working()
    if total_w == 0:
        raise UndefinedEfficiencyError("no working capacity; spare efficiency is undefined")
    return Fraction(sum(spare.values()), total_w)


def impact_report(
    solution: Solution,
    cycles: CycleSet,
    net: Network,
    mode: AccountingMode = AccountingMode.STRUCTURAL,
) -> ImpactReport:
    mode = AccountingMode(mode)
    se = spare_efficiency(solution.s, net)
    prot_cap = protection_capacity(solution, cycles)
    loss = {}
    impact = {}
    for s in net.spans:
        impact[s.id] = impact_zone(s.id, solution, cycles, net, mode, prot_cap)
        for k in net.spans:
            if k.id != s.id:
                v = pair_loss(s.id, k.id, solution, cycles, mode)
                if v:
                    loss[s.id, k.id] = v
    total = sum(impact.values())
    return ImpactReport(
        mode=mode,
        prot_cap=prot_cap,
        loss=loss,
        impact=impact,
        impact_sum=total,
        impact_mean=Fraction(total, len(net.spans)) if net.spans else Fraction(0),
        se=se,
        working={s.id: s.working for s in net.spans},
        spare={s.id: solution.s.get(s.id, 0) for s in net.spans},
    )


def oracle_impact(
    i: int,
    solution: Solution,
    cycles: CycleSet,
    net: Network,
    mode: AccountingMode = AccountingMode.STRUCTURAL,
) -> int:
    """Impact of failing span i by direct restoration-path accounting.

    Walks every cycle, works out how many restoration paths each protected
    span still has once i is restored, and sums the uncovered working units
    of spans that lost anything.
    """
    mode = AccountingMode(mode)
    span_of = {s.id: s for s in net.spans}
    failed = span_of[i]
    before = {s.id: 0 for s in net.spans}
    after = {s.id: 0 for s in net.spans}

    for cyc in cycles:
        copies = solution.n_p.get(cyc.id, 0)
        used = solution.n_ip.get((i, cyc.id), 0)
        i_on = i in cyc.spans
        i_chord = not i_on and failed.u in cyc.node_set and failed.v in cyc.node_set
        broken = i_on and (mode is AccountingMode.STRUCTURAL or used > 0)
        drained = i_chord and used > 0
        left = copies - used
        for k in net.spans:
            if k.id == i:
                continue
            units = solution.n_ip.get((k.id, cyc.id), 0)
            if not units:
                continue
            k_on = k.id in cyc.spans
            paths_per_copy = 1 if k_on else 2
            full = units * paths_per_copy
            if broken:
                # what is left of a cut ring is a single path between any two of its nodes
                survive = 0 if k_on else min(full, left)
            elif drained:
                survive = min(units, left) * paths_per_copy
            else:
                survive = full
            before[k.id] += full
            after[k.id] += survive

    unprotected = 0
    for k in net.spans:
        if k.id != i and after[k.id] < before[k.id]:
            unprotected += max(0, k.working - after[k.id])
    return unprotected
