"""Transactions, workloads, conflicts and the group/subgroup classification."""

from __future__ import annotations

import functools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Iterator


class WorkloadError(ValueError):
    """Raised when a transaction or workload violates its invariants."""


@dataclass(frozen=True)
class Transaction:
    id: int
    duration: int
    reads: frozenset[int] = frozenset()
    writes: frozenset[int] = frozenset()

    def __post_init__(self):
        reads = frozenset(self.reads)
        writes = frozenset(self.writes)
        # a written resource is recorded only once, as a write
        object.__setattr__(self, "reads", reads - writes)
        object.__setattr__(self, "writes", writes)
        if isinstance(self.duration, bool) or not isinstance(self.duration, int):
            raise WorkloadError(f"transaction {self.id}: duration must be an integer")
        if self.duration < 1:
            raise WorkloadError(f"transaction {self.id}: duration must be >= 1")
        if not reads and not writes:
            raise WorkloadError(f"transaction {self.id}: empty access set")
        if any(r < 0 for r in reads | writes):
            raise WorkloadError(f"transaction {self.id}: negative resource index")

    @property
    def resources(self) -> frozenset[int]:
        return self.reads | self.writes

    @property
    def size(self) -> int:
        """Number of distinct resources accessed (lambda)."""
        return len(self.reads) + len(self.writes)

    @property
    def is_read_only(self) -> bool:
        return not self.writes


def conflicts(a: Transaction, b: Transaction) -> bool:
    """True if one of the two writes a resource the other accesses."""
    return not a.writes.isdisjoint(b.resources) or not b.writes.isdisjoint(a.resources)


def balancing_ratio(t: Transaction) -> Fraction:
    return Fraction(len(t.writes), t.size)


@dataclass(frozen=True)
class Workload:
    resource_count: int
    transactions: tuple[Transaction, ...]

    def __post_init__(self):
        object.__setattr__(self, "transactions", tuple(self.transactions))
        if self.resource_count < 1:
            raise WorkloadError("resource_count must be positive")
        if not self.transactions:
            raise WorkloadError("workload has no transactions")
        ids = [t.id for t in self.transactions]
        if len(set(ids)) != len(ids):
            raise WorkloadError("duplicate transaction ids")
        for t in self.transactions:
            bad = [r for r in t.resources if r >= self.resource_count]
            if bad:
                raise WorkloadError(
                    f"transaction {t.id}: resource {bad[0]} outside [0, {self.resource_count})"
                )
        if all(t.is_read_only for t in self.transactions):
            raise WorkloadError("workload needs at least one writing transaction")

    def __len__(self) -> int:
        return len(self.transactions)

    def __iter__(self) -> Iterator[Transaction]:
        return iter(self.transactions)

    @functools.cached_property
    def by_id(self) -> dict[int, Transaction]:
        return {t.id: t for t in self.transactions}

    @property
    def ids(self) -> list[int]:
        return sorted(self.by_id)

    @property
    def tau_min(self) -> int:
        return min(t.duration for t in self.transactions)

    @property
    def tau_max(self) -> int:
        return max(t.duration for t in self.transactions)

    @property
    def lambda_max(self) -> int:
        return max(t.size for t in self.transactions)

    def writers(self, resource: int) -> list[Transaction]:
        return [t for t in self.transactions if resource in t.writes]

    def gamma(self, resource: int) -> int:
        """Number of transactions writing ``resource``."""
        return sum(1 for t in self.transactions if resource in t.writes)

    @property
    def gamma_max(self) -> int:
        return max(self.gamma(r) for r in range(self.resource_count))

    @property
    def ell(self) -> int:
        """Number of duration groups: ceil(log2(tau_max / tau_min)) + 1."""
        k = 0
        while self.tau_min << k < self.tau_max:
            k += 1
        return k + 1

    @property
    def kappa(self) -> int:
        """Number of access-size subgroups: ceil(log2 s) + 1."""
        return (self.resource_count - 1).bit_length() + 1

    @property
    def beta(self) -> Fraction:
        return global_beta(self)


def global_beta(w: Workload) -> Fraction:
    """Minimum balancing ratio over the writing transactions."""
    ratios = [balancing_ratio(t) for t in w.transactions if t.writes]
    if not ratios:
        raise WorkloadError("no writing transaction")
    return min(ratios)


@functools.total_ordering
@dataclass(frozen=True)
class SubgroupKey:
    """Position of a transaction in the subgroup order.

    Writing transactions get ``(group, subgroup)``; read-only ones get the
    special key ``SubgroupKey.read_only()`` which sorts after every writer.
    """

    group: int | None = None
    subgroup: int | None = None

    @classmethod
    def read_only(cls) -> SubgroupKey:
        return cls(None, None)

    @property
    def is_read_only(self) -> bool:
        return self.group is None

    def _rank(self):
        if self.is_read_only:
            return (1, 0, 0)
        return (0, self.group, self.subgroup)

    def __lt__(self, other: SubgroupKey) -> bool:
        if not isinstance(other, SubgroupKey):
            return NotImplemented
        return self._rank() < other._rank()

    def __repr__(self) -> str:
        if self.is_read_only:
            return "SubgroupKey(B)"
        return f"SubgroupKey({self.group}, {self.subgroup})"

    def to_json(self):
        return "B" if self.is_read_only else [self.group, self.subgroup]


def classify(t: Transaction, w: Workload) -> SubgroupKey:
    if t.is_read_only:
        return SubgroupKey.read_only()
    tau_min = w.tau_min
    # largest i with tau_min * 2**i <= duration
    i = (t.duration // tau_min).bit_length() - 1
    j = t.size.bit_length() - 1
    return SubgroupKey(i, j)


def classify_all(w: Workload) -> dict[int, SubgroupKey]:
    return {t.id: classify(t, w) for t in w.transactions}


@dataclass(frozen=True)
class ConflictGraph:
    nodes: tuple[int, ...]
    edges: frozenset[tuple[int, int]]
    adjacency: dict[int, frozenset[int]] = field(compare=False, repr=False)

    @classmethod
    def from_edges(cls, nodes: Iterable[int], edges: Iterable[tuple[int, int]]) -> ConflictGraph:
        nodes = tuple(sorted(nodes))
        norm = set()
        adj: dict[int, set[int]] = {v: set() for v in nodes}
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop on {u}")
            a, b = min(u, v), max(u, v)
            norm.add((a, b))
            adj[a].add(b)
            adj[b].add(a)
        return cls(nodes, frozenset(norm), {v: frozenset(n) for v, n in adj.items()})

    def neighbors(self, v: int) -> frozenset[int]:
        return self.adjacency[v]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    @property
    def max_degree(self) -> int:
        return max((len(n) for n in self.adjacency.values()), default=0)

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adjacency.get(u, ())

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def subgraph(self, keep: Iterable[int]) -> ConflictGraph:
        keep = set(keep)
        return ConflictGraph.from_edges(
            keep, ((u, v) for u, v in self.edges if u in keep and v in keep)
        )


def build_conflict_graph(w: Workload) -> ConflictGraph:
    txns = sorted(w.transactions, key=lambda t: t.id)
    edges = [
        (a.id, b.id)
        for k, a in enumerate(txns)
        for b in txns[k + 1:]
        if conflicts(a, b)
    ]
    return ConflictGraph.from_edges((t.id for t in txns), edges)


# -- JSON workload files ------------------------------------------------------

_TOP_KEYS = {"resource_count", "transactions"}
_TXN_KEYS = {"id", "duration", "reads", "writes"}


def workload_from_dict(doc: dict) -> Workload:
    if not isinstance(doc, dict):
        raise WorkloadError("workload document must be an object")
    extra = set(doc) - _TOP_KEYS
    if extra:
        raise WorkloadError(f"unknown workload fields: {sorted(extra)}")
    missing = _TOP_KEYS - set(doc)
    if missing:
        raise WorkloadError(f"missing workload fields: {sorted(missing)}")
    txns = []
    for raw in doc["transactions"]:
        extra = set(raw) - _TXN_KEYS
        if extra:
            raise WorkloadError(f"unknown transaction fields: {sorted(extra)}")
        if "id" not in raw or "duration" not in raw:
            raise WorkloadError("transaction needs 'id' and 'duration'")
        for key in ("id", "duration"):
            if isinstance(raw[key], bool) or not isinstance(raw[key], int):
                raise WorkloadError(f"transaction field {key!r} must be an integer")
        txns.append(
            Transaction(
                id=raw["id"],
                duration=raw["duration"],
                reads=frozenset(_int_list(raw.get("reads", []))),
                writes=frozenset(_int_list(raw.get("writes", []))),
            )
        )
    rc = doc["resource_count"]
    if isinstance(rc, bool) or not isinstance(rc, int):
        raise WorkloadError("resource_count must be an integer")
    return Workload(rc, tuple(txns))


def _int_list(values) -> list[int]:
    if not isinstance(values, list) or any(
        isinstance(v, bool) or not isinstance(v, int) for v in values
    ):
        raise WorkloadError("resource lists must be arrays of integers")
    return values


def workload_to_dict(w: Workload) -> dict:
    return {
        "resource_count": w.resource_count,
        "transactions": [
            {
                "id": t.id,
                "duration": t.duration,
                "reads": sorted(t.reads),
                "writes": sorted(t.writes),
            }
            for t in w.transactions
        ],
    }


def load_workload(path: str | Path) -> Workload:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise WorkloadError(f"{path}: invalid JSON ({exc})") from None
    return workload_from_dict(doc)


def save_workload(w: Workload, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(workload_to_dict(w), fh, indent=2)
        fh.write("\n")
