"""Synchronous greedy execution engine.

Every pending transaction runs at every step. Conflicting pairs are offered
to a contention manager in ascending ``(min id, max id)`` order; the loser is
aborted for the rest of the step and restarts from scratch at the next one.
Aborts and restarts cost nothing. A transaction that accumulates
``duration`` consecutive unaborted steps commits at the end of that step.
"""

from __future__ import annotations

import csv
import io
import json
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import NamedTuple

from .model import Workload, build_conflict_graph

ISSUE = "ISSUE"
ABORT = "ABORT"
COMMIT = "COMMIT"


class PolicyError(RuntimeError):
    """A contention manager broke its contract."""


class SimulationError(RuntimeError):
    """The engine gave up (the step guard was exceeded)."""


@dataclass(frozen=True)
class EngineView:
    """What a contention manager gets to see at the start of a step."""

    t: int
    pending: frozenset[int]
    restarted: frozenset[int]  # ids (re)starting at this step; all ids at t=0


class ContentionManager(ABC):
    """Base class for conflict-resolution policies plugged into :func:`run`."""

    name = "abstract"

    def begin_step(self, t: int, view: EngineView) -> None:
        pass

    @abstractmethod
    def resolve(self, u: int, v: int, t: int) -> int:
        """Return the id (``u`` or ``v``) that keeps running."""

    def notify_commit(self, tid: int, t: int) -> None:
        pass

    def notify_abort(self, loser: int, winner: int, t: int) -> None:
        pass


class Event(NamedTuple):
    step: int
    kind: str
    txn: int  # the loser for ABORT
    winner: int | None = None


@dataclass
class TxnRecord:
    id: int
    issue_step: int = 0
    starts: list[int] = field(default_factory=list)
    aborts: list[int] = field(default_factory=list)
    commits: list[int] = field(default_factory=list)

    @property
    def commit_time(self) -> int | None:
        """Time at which the transaction committed (end of its last step)."""
        return self.commits[-1] + 1 if self.commits else None

    @property
    def abort_count(self) -> int:
        return len(self.aborts)

    @property
    def final_interval(self) -> tuple[int, int] | None:
        if not self.commits or not self.starts:
            return None
        return (self.starts[-1], self.commit_time)


@dataclass
class ExecutionTrace:
    events: list[Event]
    algorithm: str = ""
    seed: int | None = None

    @property
    def records(self) -> dict[int, TxnRecord]:
        recs: dict[int, TxnRecord] = {}
        for ev in self.events:
            rec = recs.setdefault(ev.txn, TxnRecord(ev.txn))
            if ev.kind == ISSUE:
                rec.issue_step = ev.step
                rec.starts.append(ev.step)
            elif ev.kind == ABORT:
                rec.aborts.append(ev.step)
                rec.starts.append(ev.step + 1)
            elif ev.kind == COMMIT:
                rec.commits.append(ev.step)
        return recs

    @property
    def makespan(self) -> int:
        return max((ev.step + 1 for ev in self.events if ev.kind == COMMIT), default=0)

    def commit_times(self) -> dict[int, int]:
        return {ev.txn: ev.step + 1 for ev in self.events if ev.kind == COMMIT}

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "seed": self.seed,
            "makespan": self.makespan,
            "events": [
                {"step": e.step, "kind": e.kind, "txn": e.txn, "winner": e.winner}
                for e in self.events
            ],
            "transactions": [
                {
                    "id": r.id,
                    "issue_step": r.issue_step,
                    "commit_time": r.commit_time,
                    "abort_count": r.abort_count,
                    "aborts": r.aborts,
                    "final_interval": list(r.final_interval) if r.final_interval else None,
                }
                for _, r in sorted(self.records.items())
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> ExecutionTrace:
        events = [Event(e["step"], e["kind"], e["txn"], e.get("winner")) for e in doc["events"]]
        return cls(events, doc.get("algorithm", ""), doc.get("seed"))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_csv(self) -> str:
        """Flat ``step,kind,loser,winner`` rows.

        ISSUE and COMMIT rows carry their transaction in the ``loser`` column
        and leave ``winner`` empty.
        """
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["step", "kind", "loser", "winner"])
        for e in self.events:
            writer.writerow([e.step, e.kind, e.txn, "" if e.winner is None else e.winner])
        return buf.getvalue()


def run(w: Workload, policy: ContentionManager, max_steps: int | None = None) -> ExecutionTrace:
    graph = build_conflict_graph(w)
    pairs = graph.sorted_edges()
    durations = {t.id: t.duration for t in w.transactions}
    ids = sorted(durations)
    if max_steps is None:
        max_steps = 4 * len(ids) * sum(durations.values())

    pending = set(ids)
    progress = dict.fromkeys(ids, 0)
    events = [Event(0, ISSUE, i) for i in ids]
    restarted = frozenset(ids)
    t = 0
    while pending:
        if t > max_steps:
            raise SimulationError(f"no completion after {max_steps} steps")
        policy.begin_step(t, EngineView(t, frozenset(pending), restarted))

        aborted: set[int] = set()
        for u, v in pairs:
            if u not in pending or v not in pending or u in aborted or v in aborted:
                continue
            winner = policy.resolve(u, v, t)
            if winner == u:
                loser = v
            elif winner == v:
                loser = u
            else:
                raise PolicyError(f"{policy.name} returned {winner!r} for pair ({u}, {v})")
            aborted.add(loser)
            progress[loser] = 0
            events.append(Event(t, ABORT, loser, winner))
            policy.notify_abort(loser, winner, t)

        done = []
        for i in sorted(pending - aborted):
            progress[i] += 1
            if progress[i] == durations[i]:
                done.append(i)
        for i in done:
            pending.discard(i)
            events.append(Event(t, COMMIT, i))
            policy.notify_commit(i, t)

        restarted = frozenset(aborted)
        t += 1
    return ExecutionTrace(events, algorithm=policy.name, seed=getattr(policy, "seed", None))


def validate_trace(w: Workload, trace: ExecutionTrace) -> list[str]:
    """Return human-readable safety, completeness and greediness violations."""
    problems = []
    records = trace.records
    durations = {t.id: t.duration for t in w.transactions}

    for tid in sorted(durations):
        rec = records.get(tid)
        n_commits = len(rec.commits) if rec else 0
        if n_commits != 1:
            problems.append(f"completeness: transaction {tid} committed {n_commits} times")
    for tid in sorted(set(records) - set(durations)):
        problems.append(f"completeness: unknown transaction {tid} in trace")

    graph = build_conflict_graph(w)
    for u, v in graph.sorted_edges():
        a = records.get(u)
        b = records.get(v)
        if a is None or b is None or a.final_interval is None or b.final_interval is None:
            continue
        (s1, e1), (s2, e2) = a.final_interval, b.final_interval
        if s1 < e2 and s2 < e1:
            problems.append(
                f"safety: conflicting {u} [{s1},{e1}) and {v} [{s2},{e2}) overlap"
            )

    for tid in sorted(durations):
        rec = records.get(tid)
        if rec is None or len(rec.commits) != 1:
            continue
        if rec.issue_step != 0 or not rec.starts or rec.starts[0] != 0:
            problems.append(f"greedy: transaction {tid} not started at issue")
            continue
        for k, ab in enumerate(rec.aborts):
            start = rec.starts[k]
            if not start <= ab < start + durations[tid]:
                problems.append(f"greedy: transaction {tid} aborted at {ab} outside its run")
        if rec.commit_time - rec.starts[-1] != durations[tid]:
            problems.append(
                f"greedy: transaction {tid} ran [{rec.starts[-1]},{rec.commit_time}) "
                f"for duration {durations[tid]}"
            )
    return problems


def pending_commit_holds(trace: ExecutionTrace) -> bool:
    """Check that at every step some running transaction finishes uninterrupted."""
    records = trace.records
    commit = {tid: r.commit_time for tid, r in records.items()}
    last_abort = {tid: (r.aborts[-1] if r.aborts else -1) for tid, r in records.items()}
    if any(c is None for c in commit.values()):
        return False
    for t in range(trace.makespan):
        if not any(commit[tid] > t and last_abort[tid] < t for tid in records):
            return False
    return True
