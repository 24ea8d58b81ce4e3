"""Simple-cycle enumeration and on-cycle / straddling classification."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Union

from .topo import Network, Span

UNRELATED = 0
ON_CYCLE = 1
STRADDLING = 2

DEFAULT_MAX_CYCLES = 50_000
AUTO = "auto"

HopLimit = Union[int, None, str]


class CycleBudgetExceeded(RuntimeError):
    """More candidate cycles than the configured cap; lower the hop limit."""


@dataclass(frozen=True)
class Cycle:
    id: int
    nodes: tuple[str, ...]
    spans: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def node_set(self) -> frozenset[str]:
        return frozenset(self.nodes)


def classify(cycle: Cycle, span: Span) -> int:
    if span.id in cycle.spans:
        return ON_CYCLE
    if span.u in cycle.node_set and span.v in cycle.node_set:
        return STRADDLING
    return UNRELATED


@dataclass(frozen=True)
class CycleSet:
    """Candidate cycles plus the nonzero (span, cycle) classifications.

    ``x`` only stores nonzero entries; use :meth:`x_of` for lookups.
    """

    cycles: tuple[Cycle, ...]
    x: dict[tuple[int, int], int]
    span_ids: tuple[int, ...]
    related: dict[int, tuple[tuple[int, int], ...]] = field(repr=False, compare=False)
    by_span: dict[int, tuple[int, ...]] = field(repr=False, compare=False)

    @classmethod
    def build(cls, net: Network, cycles: list[Cycle]) -> "CycleSet":
        x: dict[tuple[int, int], int] = {}
        related: dict[int, list[tuple[int, int]]] = {c.id: [] for c in cycles}
        by_span: dict[int, list[int]] = {s.id: [] for s in net.spans}
        for c in cycles:
            for s in net.spans:
                k = classify(c, s)
                if k:
                    x[s.id, c.id] = k
                    related[c.id].append((s.id, k))
                    by_span[s.id].append(c.id)
        return cls(
            tuple(cycles),
            x,
            net.span_ids,
            {p: tuple(v) for p, v in related.items()},
            {i: tuple(v) for i, v in by_span.items()},
        )

    def __len__(self) -> int:
        return len(self.cycles)

    def __iter__(self):
        return iter(self.cycles)

    def x_of(self, span_id: int, cycle_id: int) -> int:
        return self.x.get((span_id, cycle_id), UNRELATED)

    def delta(self, span_id: int, cycle_id: int) -> int:
        return int(self.x_of(span_id, cycle_id) == ON_CYCLE)

    def cycle(self, cycle_id: int) -> Cycle:
        return self.cycles[cycle_id]


def default_hop_limit(net: Network) -> int | None:
    return None if len(net.nodes) <= 10 else 8


def _resolve_hop_limit(net: Network, hop_limit: HopLimit) -> int | None:
    if hop_limit == AUTO:
        return default_hop_limit(net)
    if hop_limit is not None and (not isinstance(hop_limit, int) or hop_limit < 1):
        raise ValueError(f"hop limit must be a positive integer or None, got {hop_limit!r}")
    return hop_limit


def enumerate_simple_cycles(
    net: Network,
    hop_limit: HopLimit = AUTO,
    max_cycles: int = DEFAULT_MAX_CYCLES,
) -> CycleSet:
    """All simple cycles with 3..hop_limit hops, canonical and ordered.

    A cycle starts at its smallest node and heads towards the smaller of that
    node's two cycle neighbours. Where parallel spans join two consecutive
    nodes the smallest span id is the traversed one; the others classify as
    straddling. Cycles are ordered by length, then node sequence, and numbered
    from 0 in that order.
    """
    limit = _resolve_hop_limit(net, hop_limit)
    # cheapest (smallest id) span per node pair
    hop_span: dict[frozenset[str], int] = {}
    for s in net.spans:
        key = s.endpoints
        if key not in hop_span or s.id < hop_span[key]:
            hop_span[key] = s.id
    adj: dict[str, list[str]] = {n: [] for n in net.nodes}
    for key in hop_span:
        a, b = sorted(key)
        adj[a].append(b)
        adj[b].append(a)
    for n in adj:
        adj[n].sort()

    found: list[tuple[str, ...]] = []

    def extend(path: list[str], on_path: set[str]) -> None:
        last = path[-1]
        for m in adj[last]:
            if m == path[0]:
                if len(path) >= 3 and path[1] < path[-1]:
                    found.append(tuple(path))
                    if len(found) > max_cycles:
                        raise CycleBudgetExceeded(
                            f"more than {max_cycles} cycles; lower the hop limit"
                        )
            elif m > path[0] and m not in on_path and (limit is None or len(path) < limit):
                path.append(m)
                on_path.add(m)
                extend(path, on_path)
                on_path.discard(m)
                path.pop()

    for start in sorted(net.nodes):
        extend([start], {start})

    found.sort(key=lambda seq: (len(seq), seq))
    cycles = []
    for cid, seq in enumerate(found):
        hops = zip(seq, seq[1:] + seq[:1])
        spans = tuple(hop_span[frozenset(h)] for h in hops)
        cycles.append(Cycle(cid, seq, spans))
    return CycleSet.build(net, cycles)


def cycles_to_csv(cycles: CycleSet) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["cycle_id", "length", "node_sequence", "oncycle_span_ids"])
    for c in cycles:
        writer.writerow([c.id, len(c), "-".join(c.nodes), ";".join(str(s) for s in c.spans)])
    return buf.getvalue()
