"""Network data model, topology file I/O, edge connectivity and node merging.

Topology files are line-based UTF-8 text::

    pcycle-topology 1
    node A
    node B
    span 1 A B 4 2      # id u v working [unit_cost=1]

``#`` starts a comment and blank lines are ignored.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field, replace
from itertools import combinations
from typing import Iterable, Iterator

HEADER = "pcycle-topology 1"
_NODE_ID = re.compile(r"^[A-Za-z0-9_]+$")

DEGREE2 = "degree2"
LOW_CONNECTIVITY = "low_connectivity"


class TopologyError(ValueError):
    """Invalid network structure or unknown node."""


class ParseError(TopologyError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class DisconnectedNetworkError(TopologyError):
    pass


@dataclass(frozen=True, order=True)
class Span:
    """A bidirectional link; endpoints are stored in sorted order."""

    id: int
    u: str
    v: str
    working: int = 0
    unit_cost: int = 1
    spare: int = 0

    def __post_init__(self):
        if self.u > self.v:
            u, v = self.v, self.u
            object.__setattr__(self, "u", u)
            object.__setattr__(self, "v", v)
        if self.u == self.v:
            raise TopologyError(f"span {self.id} is a self-loop on {self.u}")
        if self.working < 0:
            raise TopologyError(f"span {self.id}: negative working capacity")
        if self.unit_cost < 1:
            raise TopologyError(f"span {self.id}: unit cost must be >= 1")
        if self.spare < 0:
            raise TopologyError(f"span {self.id}: negative spare capacity")

    @property
    def endpoints(self) -> frozenset[str]:
        return frozenset((self.u, self.v))

    def other(self, node: str) -> str:
        if node == self.u:
            return self.v
        if node == self.v:
            return self.u
        raise TopologyError(f"node {node} is not an endpoint of span {self.id}")


@dataclass(frozen=True)
class Network:
    """Undirected multigraph of nodes and capacitated spans.

    Spans are kept sorted by id. Parallel spans between the same node pair are
    allowed and stay distinct.
    """

    nodes: frozenset[str] = frozenset()
    spans: tuple[Span, ...] = ()
    _by_id: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "nodes", frozenset(self.nodes))
        spans = tuple(sorted(self.spans, key=lambda s: s.id))
        object.__setattr__(self, "spans", spans)
        by_id = {}
        for s in spans:
            if s.id in by_id:
                raise TopologyError(f"duplicate span id {s.id}")
            for end in (s.u, s.v):
                if end not in self.nodes:
                    raise TopologyError(f"span {s.id} references unknown node {end}")
            by_id[s.id] = s
        object.__setattr__(self, "_by_id", by_id)

    def span(self, span_id: int) -> Span:
        return self._by_id[span_id]

    @property
    def span_ids(self) -> tuple[int, ...]:
        return tuple(s.id for s in self.spans)

    def sorted_nodes(self) -> list[str]:
        return sorted(self.nodes)

    def incident(self, node: str) -> list[Span]:
        self._require(node)
        return [s for s in self.spans if node in (s.u, s.v)]

    def degree(self, node: str) -> int:
        return len(self.incident(node))

    def neighbors(self, node: str) -> set[str]:
        return {s.other(node) for s in self.incident(node)}

    def total_working(self) -> int:
        return sum(s.working for s in self.spans)

    def total_spare(self) -> int:
        return sum(s.spare for s in self.spans)

    def with_spare(self, spare: dict[int, int]) -> "Network":
        """Copy of the network with spare capacities set from ``spare``."""
        spans = [replace(s, spare=int(spare.get(s.id, 0))) for s in self.spans]
        return Network(self.nodes, tuple(spans))

    def is_connected(self) -> bool:
        if not self.nodes:
            return True
        adj = _adjacency(self)
        start = min(self.nodes)
        seen = {start}
        queue = deque([start])
        while queue:
            n = queue.popleft()
            for m in adj[n]:
                if m not in seen:
                    seen.add(m)
                    queue.append(m)
        return len(seen) == len(self.nodes)

    def _require(self, *nodes: str) -> None:
        for n in nodes:
            if n not in self.nodes:
                raise TopologyError(f"unknown node {n}")


def _adjacency(net: Network) -> dict[str, set[str]]:
    adj: dict[str, set[str]] = {n: set() for n in net.nodes}
    for s in net.spans:
        adj[s.u].add(s.v)
        adj[s.v].add(s.u)
    return adj


# -- file format -------------------------------------------------------------


def _meaningful_lines(text: str) -> Iterator[tuple[int, list[str]]]:
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def _parse_int(token: str, lineno: int, what: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise ParseError(lineno, f"{what} must be an integer, got {token!r}") from None


def parse_network(text: str) -> Network:
    """Parse topology-file contents into a :class:`Network`.

    Raises:
        ParseError: on any syntax or consistency problem, with the line number.
    """
    lines = _meaningful_lines(text)
    first = next(lines, None)
    if first is None or " ".join(first[1]) != HEADER:
        lineno = first[0] if first else 1
        raise ParseError(lineno, f"expected header {HEADER!r}")

    nodes: set[str] = set()
    spans: dict[int, Span] = {}
    for lineno, tokens in lines:
        kind = tokens[0]
        if kind == "node":
            if len(tokens) != 2:
                raise ParseError(lineno, "expected 'node <id>'")
            name = tokens[1]
            if not _NODE_ID.match(name):
                raise ParseError(lineno, f"invalid node id {name!r}")
            if name in nodes:
                raise ParseError(lineno, f"duplicate node {name}")
            nodes.add(name)
        elif kind == "span":
            if len(tokens) not in (5, 6):
                raise ParseError(lineno, "expected 'span <id> <u> <v> <working> [unit_cost]'")
            sid = _parse_int(tokens[1], lineno, "span id")
            u, v = tokens[2], tokens[3]
            working = _parse_int(tokens[4], lineno, "working capacity")
            cost = _parse_int(tokens[5], lineno, "unit cost") if len(tokens) == 6 else 1
            if sid in spans:
                raise ParseError(lineno, f"duplicate span id {sid}")
            for end in (u, v):
                if end not in nodes:
                    raise ParseError(lineno, f"span {sid} references undeclared node {end}")
            if u == v:
                raise ParseError(lineno, f"span {sid} is a self-loop on {u}")
            try:
                spans[sid] = Span(sid, u, v, working, cost)
            except TopologyError as exc:
                raise ParseError(lineno, str(exc)) from None
        else:
            raise ParseError(lineno, f"unknown directive {kind!r}")
    return Network(frozenset(nodes), tuple(spans.values()))


def serialize_network(net: Network) -> str:
    """Canonical text: header, sorted nodes, spans by id, trailing newline."""
    out = [HEADER]
    out += [f"node {n}" for n in net.sorted_nodes()]
    out += [f"span {s.id} {s.u} {s.v} {s.working} {s.unit_cost}" for s in net.spans]
    return "\n".join(out) + "\n"


def read_network(path) -> Network:
    with open(path, encoding="utf-8") as fh:
        return parse_network(fh.read())


# -- connectivity ------------------------------------------------------------


def edge_connectivity(net: Network, u: str, v: str) -> int:
    """Maximum number of span-disjoint u-v paths.

    Unit-capacity max-flow; every span gives one unit in each direction, so
    parallel spans each add one.
    """
    net._require(u, v)
    if u == v:
        raise TopologyError("edge connectivity needs two distinct nodes")
    residual: dict[str, dict[str, int]] = {n: {} for n in net.nodes}
    for s in net.spans:
        residual[s.u][s.v] = residual[s.u].get(s.v, 0) + 1
        residual[s.v][s.u] = residual[s.v].get(s.u, 0) + 1

    flow = 0
    while True:
        parent = {u: None}
        queue = deque([u])
        while queue and v not in parent:
            n = queue.popleft()
            for m in sorted(residual[n]):
                if residual[n][m] > 0 and m not in parent:
                    parent[m] = n
                    queue.append(m)
        if v not in parent:
            return flow
        m = v
        while parent[m] is not None:
            n = parent[m]
            residual[n][m] -= 1
            residual[m][n] = residual[m].get(n, 0) + 1
            m = n
        flow += 1


def low_connectivity_pairs(net: Network, k: int = 3) -> list[tuple[str, str, int]]:
    """Node pairs (sorted) whose edge connectivity is below ``k``."""
    out = []
    for a, b in combinations(net.sorted_nodes(), 2):
        c = edge_connectivity(net, a, b)
        if c < k:
            out.append((a, b, c))
    return out


def is_three_connected(net: Network) -> bool:
    if len(net.nodes) < 2:
        raise TopologyError("3-connectivity needs at least two nodes")
    for a, b in combinations(net.sorted_nodes(), 2):
        if edge_connectivity(net, a, b) < 3:
            return False
    return True


# -- merging -----------------------------------------------------------------


@dataclass(frozen=True)
class MergeStep:
    kept: str
    absorbed: str
    reason: str
    dropped: tuple[int, ...] = ()


@dataclass(frozen=True)
class MergeLog:
    steps: tuple[MergeStep, ...] = ()

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    def to_text(self) -> str:
        lines = ["# kept absorbed reason dropped_span_ids"]
        for st in self.steps:
            dropped = ",".join(str(d) for d in st.dropped) or "-"
            lines.append(f"{st.kept} {st.absorbed} {st.reason} {dropped}")
        return "\n".join(lines) + "\n"


def merge_nodes(net: Network, keep: str, absorb: str) -> Network:
    """Contract ``absorb`` into ``keep``.

    Spans between the two become self-loops and are deleted; every other span
    incident to ``absorb`` is re-attached to ``keep`` with its id, working
    capacity and cost unchanged.
    """
    net._require(keep, absorb)
    if keep == absorb:
        raise TopologyError("cannot merge a node into itself")
    spans = []
    for s in net.spans:
        ends = {s.u, s.v}
        if ends == {keep, absorb}:
            continue
        if s.u == absorb:
            s = replace(s, u=keep)
        elif s.v == absorb:
            s = replace(s, v=keep)
        spans.append(s)
    return Network(net.nodes - {absorb}, tuple(spans))


def _dropped_by_merge(net: Network, keep: str, absorb: str) -> tuple[int, ...]:
    return tuple(s.id for s in net.spans if s.endpoints == frozenset((keep, absorb)))


def make_three_connected(net: Network) -> tuple[Network, MergeLog]:
    """Merge nodes until the network is 3-edge-connected or has <= 2 nodes.

    Each round first merges the smallest degree-2 node into its smaller
    neighbour; otherwise the smallest node pair with edge connectivity below 3
    is merged, absorbing the larger id.
    """
    if len(net.nodes) < 2:
        raise TopologyError("need at least two nodes")
    if not net.is_connected():
        raise DisconnectedNetworkError("network is not connected")

    steps: list[MergeStep] = []
    while len(net.nodes) > 2:
        deg2 = [n for n in net.sorted_nodes() if net.degree(n) == 2]
        if deg2:
            absorb = deg2[0]
            keep = min(net.neighbors(absorb))
            reason = DEGREE2
        else:
            pair = _first_weak_pair(net)
            if pair is None:
                break
            keep, absorb = pair
            reason = LOW_CONNECTIVITY
        steps.append(MergeStep(keep, absorb, reason, _dropped_by_merge(net, keep, absorb)))
        net = merge_nodes(net, keep, absorb)
    return net, MergeLog(tuple(steps))


def _first_weak_pair(net: Network) -> tuple[str, str] | None:
    for a, b in combinations(net.sorted_nodes(), 2):
        if edge_connectivity(net, a, b) < 3:
            return a, b
    return None


def replay_merge_log(net: Network, log: Iterable[MergeStep]) -> Network:
    for step in log:
        net = merge_nodes(net, step.kept, step.absorbed)
    return net
