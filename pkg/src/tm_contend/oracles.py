"""Exact and bounding oracles for small instances.

``optimal_makespan`` and ``chromatic_number`` are exponential-time searches
guarded by a vertex/transaction limit. They are written independently of
each other so that the coloring reduction can be checked in both directions.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .model import (
    ConflictGraph,
    Transaction,
    Workload,
    WorkloadError,
    build_conflict_graph,
)

DEFAULT_LIMIT = 10


class OracleLimitError(ValueError):
    """The instance is larger than the configured exhaustive-search limit."""


@dataclass(frozen=True)
class UndirectedGraph:
    vertex_count: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        norm = set()
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"self-loop on vertex {u}")
            if not (0 <= u < self.vertex_count and 0 <= v < self.vertex_count):
                raise ValueError(f"edge ({u}, {v}) outside {self.vertex_count} vertices")
            norm.add((min(u, v), max(u, v)))
        object.__setattr__(self, "edges", tuple(sorted(norm)))

    def adjacency(self) -> list[set[int]]:
        adj: list[set[int]] = [set() for _ in range(self.vertex_count)]
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj


@dataclass(frozen=True)
class LowerBoundReport:
    paper_bound: int  # gamma_max * tau_min
    strong_bound: int  # longest per-resource sum of writer durations
    tau_max_bound: int

    @property
    def best(self) -> int:
        return max(self.paper_bound, self.strong_bound, self.tau_max_bound)

    def to_dict(self) -> dict:
        return {
            "paper_bound": self.paper_bound,
            "strong_bound": self.strong_bound,
            "tau_max_bound": self.tau_max_bound,
            "best": self.best,
        }


def lower_bound(w: Workload) -> LowerBoundReport:
    """Makespan lower bounds: all writers of one resource must serialize."""
    strong = max(
        sum(t.duration for t in w.writers(r)) for r in range(w.resource_count)
    )
    return LowerBoundReport(
        paper_bound=w.gamma_max * w.tau_min,
        strong_bound=strong,
        tau_max_bound=w.tau_max,
    )


# -- optimal makespan ---------------------------------------------------------


def _components(graph: ConflictGraph) -> list[list[int]]:
    seen: set[int] = set()
    out = []
    for start in graph.nodes:
        if start in seen:
            continue
        comp, stack = [], [start]
        seen.add(start)
        while stack:
            v = stack.pop()
            comp.append(v)
            for u in graph.neighbors(v):
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        out.append(sorted(comp))
    return out


def _maximal_cliques(nodes: list[int], adj: dict[int, frozenset[int]]) -> list[frozenset[int]]:
    cliques = []

    def expand(r: set[int], p: set[int], x: set[int]) -> None:
        if not p and not x:
            cliques.append(frozenset(r))
            return
        pivot = max(p | x, key=lambda u: len(adj[u] & p))
        for v in sorted(p - adj[pivot]):
            expand(r | {v}, p & adj[v], x & adj[v])
            p = p - {v}
            x = x | {v}

    expand(set(), set(nodes), set())
    return cliques


def _component_optimum(nodes: list[int], dur: dict[int, int], graph: ConflictGraph) -> int:
    """Exact makespan for one connected component.

    Any feasible schedule orders each conflicting pair; left-justifying the
    schedule for that order never hurts. So it suffices to search over
    sequences, starting each transaction when its already-placed neighbours
    have finished.
    """
    if len(nodes) == 1:
        return dur[nodes[0]]
    adj = {v: graph.neighbors(v) & set(nodes) for v in nodes}
    cliques = [sorted(c) for c in _maximal_cliques(nodes, adj) if len(c) > 1]
    order = sorted(nodes, key=lambda v: (-dur[v], v))
    index = {v: k for k, v in enumerate(order)}

    # greedy list schedule for the initial incumbent
    end: dict[int, int] = {}
    for v in order:
        end[v] = max((end[u] for u in adj[v] if u in end), default=0) + dur[v]
    best = max(end.values())

    seen: dict[tuple, int] = {}

    def bound(ready: dict[int, int], span: int) -> int:
        lb = span
        for v, r in ready.items():
            lb = max(lb, r + dur[v])
        for c in cliques:
            rem = [v for v in c if v in ready]
            if len(rem) > 1:
                lb = max(lb, min(ready[v] for v in rem) + sum(dur[v] for v in rem))
        return lb

    def search(ready: dict[int, int], span: int) -> None:
        nonlocal best
        if not ready:
            best = min(best, span)
            return
        if bound(ready, span) >= best:
            return
        key = tuple(sorted((index[v], r) for v, r in ready.items()))
        if seen.get(key, best + 1) <= span:
            return
        seen[key] = span
        for v in sorted(ready, key=lambda u: (ready[u], -dur[u], u)):
            finish = ready[v] + dur[v]
            rest = {u: (max(r, finish) if u in adj[v] else r) for u, r in ready.items() if u != v}
            search(rest, max(span, finish))

    search(dict.fromkeys(nodes, 0), 0)
    return best


def optimal_makespan(w: Workload, limit: int = DEFAULT_LIMIT) -> int:
    """Minimum makespan of any (not necessarily greedy) conflict-free schedule."""
    if len(w) > limit:
        raise OracleLimitError(
            f"optimal_makespan: {len(w)} transactions exceeds limit {limit}"
        )
    graph = build_conflict_graph(w)
    dur = {t.id: t.duration for t in w.transactions}
    return max(_component_optimum(c, dur, graph) for c in _components(graph))


# -- chromatic number ---------------------------------------------------------


def _greedy_clique_size(adj: list[set[int]]) -> int:
    best = 1 if adj else 0
    for start in range(len(adj)):
        clique = [start]
        for v in sorted(adj[start], key=lambda u: -len(adj[u])):
            if all(v in adj[u] for u in clique):
                clique.append(v)
        best = max(best, len(clique))
    return best


def _colorable(adj: list[set[int]], k: int) -> bool:
    n = len(adj)
    colors = [-1] * n

    def pick() -> int:
        # DSATUR: most distinct neighbour colours, then highest degree
        best_v, best_key = -1, None
        for v in range(n):
            if colors[v] >= 0:
                continue
            sat = len({colors[u] for u in adj[v] if colors[u] >= 0})
            key = (sat, len(adj[v]), -v)
            if best_key is None or key > best_key:
                best_v, best_key = v, key
        return best_v

    def place(done: int, used: int) -> bool:
        if done == n:
            return True
        v = pick()
        taken = {colors[u] for u in adj[v]}
        # a fresh colour is interchangeable with any other unused one
        for c in range(min(used + 1, k)):
            if c in taken:
                continue
            colors[v] = c
            if place(done + 1, max(used, c + 1)):
                return True
        colors[v] = -1
        return False

    return place(0, 0)


def chromatic_number(g: UndirectedGraph, limit: int = DEFAULT_LIMIT) -> int:
    if g.vertex_count > limit:
        raise OracleLimitError(
            f"chromatic_number: {g.vertex_count} vertices exceeds limit {limit}"
        )
    if g.vertex_count == 0:
        return 0
    adj = g.adjacency()
    k = _greedy_clique_size(adj)
    while not _colorable(adj, k):
        k += 1
    return k


# -- reductions ---------------------------------------------------------------


def reduce_coloring_to_scheduling(g: UndirectedGraph) -> Workload:
    """One unit-length transaction per vertex, one written resource per edge.

    Vertices without edges still need a non-empty access set, so each gets a
    private resource numbered after the edge resources. It conflicts with
    nothing, which keeps the conflict graph isomorphic to ``g``.
    """
    if not g.edges:
        raise WorkloadError("graph has no edges; the scheduling instance would have no conflicts")
    writes: list[set[int]] = [set() for _ in range(g.vertex_count)]
    for r, (u, v) in enumerate(g.edges):
        writes[u].add(r)
        writes[v].add(r)
    s = len(g.edges)
    for v in range(g.vertex_count):
        if not writes[v]:
            writes[v].add(s)
            s += 1
    txns = tuple(Transaction(v, 1, frozenset(), frozenset(writes[v])) for v in range(g.vertex_count))
    return Workload(s, txns)


def reduce_scheduling_to_coloring(w: Workload) -> UndirectedGraph:
    """Conflict graph of a unit-duration workload; vertex k is the k-th smallest id."""
    if any(t.duration != 1 for t in w.transactions):
        raise WorkloadError("scheduling-to-coloring needs unit durations")
    graph = build_conflict_graph(w)
    pos = {tid: k for k, tid in enumerate(graph.nodes)}
    return UndirectedGraph(len(pos), tuple((pos[u], pos[v]) for u, v in graph.edges))


# -- graph files --------------------------------------------------------------


def parse_graph(text: str) -> UndirectedGraph:
    """Parse ``p <vertices> <edges>`` followed by ``e u v`` lines (0-indexed).

    Blank lines and lines starting with ``c`` are ignored.
    """
    header = None
    edges = []
    for lineno, line in enumerate(text.splitlines(), 1):
        parts = line.split()
        if not parts or parts[0] == "c":
            continue
        if parts[0] == "p" and len(parts) == 3 and header is None:
            header = (int(parts[1]), int(parts[2]))
        elif parts[0] == "e" and len(parts) == 3 and header is not None:
            edges.append((int(parts[1]), int(parts[2])))
        else:
            raise ValueError(f"line {lineno}: cannot parse {line!r}")
    if header is None:
        raise ValueError("missing 'p <vertices> <edges>' header")
    if len(edges) != header[1]:
        raise ValueError(f"header declares {header[1]} edges, found {len(edges)}")
    return UndirectedGraph(header[0], tuple(edges))


def format_graph(g: UndirectedGraph) -> str:
    lines = [f"p {g.vertex_count} {len(g.edges)}"]
    lines += [f"e {u} {v}" for u, v in g.edges]
    return "\n".join(lines) + "\n"


def load_graph(path: str | Path) -> UndirectedGraph:
    return parse_graph(Path(path).read_text())


def save_graph(g: UndirectedGraph, path: str | Path) -> None:
    Path(path).write_text(format_graph(g))
