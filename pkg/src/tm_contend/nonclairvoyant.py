"""Randomized contention manager that never looks at the conflict graph.

Across subgroups, the lower subgroup always wins. Inside a subgroup each
transaction draws a priority uniformly from ``[1, n]`` whenever it (re)starts
and the smaller number wins; a transaction that lost to another one keeps
losing to it until that winner commits or is itself aborted.

Draws come from :class:`random.Random` (Mersenne Twister) seeded once per run,
taken in ascending id order at the start of each step.
"""

from __future__ import annotations

import random

from .engine import ContentionManager, EngineView
from .model import Workload, classify_all


class NonClairvoyantManager(ContentionManager):
    name = "non-clairvoyant"

    def __init__(self, workload: Workload, seed: int = 0, record_priorities: bool = False):
        self.workload = workload
        self.seed = seed
        self.rng = random.Random(seed)
        self.n = len(workload)
        self.subgroup = classify_all(workload)
        self.r: dict[int, int] = {}
        self.blocked: set[tuple[int, int]] = set()  # (loser, winner)
        self.record_priorities = record_priorities
        self.priority_log: list[dict] = []

    def on_restart(self, tid: int) -> int:
        self.r[tid] = self.rng.randint(1, self.n)
        return self.r[tid]

    def begin_step(self, t: int, view: EngineView) -> None:
        for tid in sorted(view.restarted):
            self.on_restart(tid)
        if self.record_priorities:
            self.priority_log.append(
                {"step": t, "r": {str(i): self.r[i] for i in sorted(view.pending)}}
            )

    def resolve(self, u: int, v: int, t: int) -> int:
        su, sv = self.subgroup[u], self.subgroup[v]
        if su < sv:
            return u
        if sv < su:
            return v
        if (u, v) in self.blocked:
            winner = v
        elif (v, u) in self.blocked:
            winner = u
        elif self.r[u] < self.r[v]:
            winner = u
        else:
            winner = v
        loser = v if winner == u else u
        self.blocked.add((loser, winner))
        return winner

    def notify_abort(self, loser: int, winner: int, t: int) -> None:
        self.blocked = {(a, b) for a, b in self.blocked if b != loser}

    def notify_commit(self, tid: int, t: int) -> None:
        self.blocked = {(a, b) for a, b in self.blocked if tid not in (a, b)}
        self.r.pop(tid, None)
