"""Conflict-graph-aware contention manager.

Writers are bucketed into ``(duration group, access-size subgroup)`` and
read-only transactions go last. Each step, only the lowest non-empty subgroup
may hold high priority: transactions already high (and still pending) keep
it, and a greedy maximal independent set is added from the rest of that
subgroup, excluding anything that conflicts with the retained set. High beats
low; low-vs-low is decided by id.
"""

from __future__ import annotations

from typing import Iterable

from .engine import ContentionManager, EngineView
from .model import ConflictGraph, Workload, build_conflict_graph, classify_all


def maximal_independent_set(graph: ConflictGraph, nodes: Iterable[int] | None = None) -> set[int]:
    """Greedy MIS of the subgraph induced on ``nodes``, scanning ids upward."""
    candidates = sorted(graph.nodes if nodes is None else nodes)
    chosen: set[int] = set()
    for v in candidates:
        if graph.neighbors(v).isdisjoint(chosen):
            chosen.add(v)
    return chosen


class ClairvoyantManager(ContentionManager):
    name = "clairvoyant"

    def __init__(self, workload: Workload, record_priorities: bool = False):
        self.workload = workload
        self.graph = build_conflict_graph(workload)
        self.subgroup = classify_all(workload)
        self.high: set[int] = set()
        self.record_priorities = record_priorities
        self.priority_log: list[dict] = []
        self.seed = None

    def begin_step(self, t: int, view: EngineView) -> None:
        pending = view.pending
        lowest = min(self.subgroup[i] for i in pending)
        current = {i for i in pending if self.subgroup[i] == lowest}
        # high transactions are never aborted, so last step's high set minus
        # commits is exactly the set still running uninterrupted
        kept = self.high & current
        blocked = {i for i in pending if not self.graph.neighbors(i).isdisjoint(kept)}
        fresh = maximal_independent_set(self.graph, current - blocked)
        self.high = fresh | kept
        if self.record_priorities:
            self.priority_log.append({
                "step": t,
                "subgroup": lowest.to_json(),
                "high": sorted(self.high),
                "low": sorted(pending - self.high),
            })

    def resolve(self, u: int, v: int, t: int) -> int:
        u_high = u in self.high
        v_high = v in self.high
        if u_high and v_high:
            raise AssertionError(f"high-priority transactions {u} and {v} conflict at step {t}")
        if u_high:
            return u
        if v_high:
            return v
        return min(u, v)

    def notify_commit(self, tid: int, t: int) -> None:
        self.high.discard(tid)

    def notify_abort(self, loser: int, winner: int, t: int) -> None:
        if loser in self.high:
            raise AssertionError(f"high-priority transaction {loser} aborted at step {t}")
