import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tm_contend import (
    ClairvoyantManager,
    ConflictGraph,
    Transaction,
    Workload,
    build_conflict_graph,
    classify,
    maximal_independent_set,
    pending_commit_holds,
    run,
)
from tm_contend.engine import EngineView
from tm_contend.oracles import UndirectedGraph, reduce_coloring_to_scheduling

from conftest import unit_writers, workloads


def graph(n, edges):
    return ConflictGraph.from_edges(range(1, n + 1), edges)


class TestMaximalIndependentSet:
    def test_edgeless(self):
        assert maximal_independent_set(graph(3, [])) == {1, 2, 3}

    def test_triangle(self):
        assert maximal_independent_set(graph(3, [(1, 2), (2, 3), (1, 3)])) == {1}

    def test_path(self):
        assert maximal_independent_set(graph(3, [(1, 2), (2, 3)])) == {1, 3}

    def test_restricted_to_subset(self):
        g = graph(4, [(1, 2), (2, 3), (3, 4)])
        assert maximal_independent_set(g, {2, 3, 4}) == {2, 4}

    @settings(max_examples=200)
    @given(st.integers(1, 9).flatmap(lambda n: st.tuples(
        st.just(n), st.sets(st.tuples(st.integers(1, n), st.integers(1, n)).filter(lambda e: e[0] != e[1])))))
    def test_independent_and_maximal(self, case):
        n, edges = case
        g = graph(n, edges)
        mis = maximal_independent_set(g)
        assert all(not g.has_edge(u, v) for u, v in itertools.combinations(mis, 2))
        assert all(not g.neighbors(v).isdisjoint(mis) for v in g.nodes if v not in mis)


def view(t, pending, restarted=()):
    return EngineView(t, frozenset(pending), frozenset(restarted))


class TestPriorityAssignment:
    def test_independent_workload_all_high(self):
        w = Workload(3, tuple(Transaction(i, 1, frozenset(), frozenset({i})) for i in range(3)))
        cm = ClairvoyantManager(w)
        cm.begin_step(0, view(0, {0, 1, 2}))
        assert cm.high == {0, 1, 2}

    def test_triangle_lowest_id(self):
        cm = ClairvoyantManager(unit_writers(3))
        cm.begin_step(0, view(0, {0, 1, 2}))
        assert cm.high == {0}

    def test_high_persists(self):
        w = Workload(2, (Transaction(5, 2, frozenset(), frozenset({0})),
                         Transaction(3, 2, frozenset(), frozenset({0, 1}))))
        cm = ClairvoyantManager(w)
        cm.begin_step(0, view(0, {3, 5}))
        assert cm.high == {5}  # subgroup (0,0) comes before (0,1)
        cm.begin_step(1, view(1, {3, 5}))
        assert cm.high == {5}

    def test_retained_transaction_survives_lower_id_newcomer(self):
        # 2 was high last step: it keeps priority, 0 is excluded for conflicting
        # with it, and the fresh independent set adds 1
        ts = (Transaction(0, 1, frozenset(), frozenset({0, 1})),
              Transaction(1, 1, frozenset(), frozenset({0, 2})),
              Transaction(2, 1, frozenset(), frozenset({1, 3})))
        cm = ClairvoyantManager(Workload(4, ts))
        cm.high = {2}
        cm.begin_step(1, view(1, {0, 1, 2}))
        assert cm.high == {1, 2}

    def test_read_only_last(self):
        w = Workload(2, (Transaction(0, 1, frozenset(), frozenset({0})),
                         Transaction(1, 1, frozenset({1}), frozenset())))
        cm = ClairvoyantManager(w)
        cm.begin_step(0, view(0, {0, 1}))
        assert cm.high == {0}
        cm.begin_step(1, view(1, {1}))
        assert cm.high == {1}


class TestResolve:
    def setup_method(self):
        self.cm = ClairvoyantManager(unit_writers(3))
        self.cm.high = {0}

    def test_high_beats_low(self):
        assert self.cm.resolve(0, 2, 0) == 0

    def test_low_low_lower_id(self):
        assert self.cm.resolve(1, 2, 0) == 1

    def test_symmetric(self):
        self.cm.high = {2}
        assert self.cm.resolve(1, 2, 0) == 2

    def test_two_high_is_a_bug(self):
        self.cm.high = {0, 1}
        with pytest.raises(AssertionError):
            self.cm.resolve(0, 1, 0)


class Checked(ClairvoyantManager):
    """Asserts the priority invariants after every assignment."""

    def begin_step(self, t, v):
        previous = set(self.high)
        super().begin_step(t, v)
        pending = v.pending
        lowest = min(self.subgroup[i] for i in pending)
        current = {i for i in pending if self.subgroup[i] == lowest}
        assert self.high and self.high <= current
        for a, b in itertools.combinations(self.high, 2):
            assert not self.graph.has_edge(a, b)
        kept = previous & pending
        assert kept <= self.high
        blocked = {i for i in pending if not self.graph.neighbors(i).isdisjoint(kept)}
        for i in current - blocked - self.high:
            assert not self.graph.neighbors(i).isdisjoint(self.high)


def clairvoyant_trace(w, record=False):
    cm = Checked(w, record_priorities=record)
    return run(w, cm), cm


@settings(max_examples=300, deadline=None)
@given(workloads(max_n=8, max_s=6, max_tau=5))
def test_priority_invariants_and_pending_commit(w):
    trace, _ = clairvoyant_trace(w)
    assert pending_commit_holds(trace)


@settings(max_examples=200, deadline=None)
@given(workloads(max_n=8, max_s=6, max_tau=5))
def test_no_conflicting_high_transaction_during_final_run(w):
    trace, cm = clairvoyant_trace(w, record=True)
    g = cm.graph
    high_at = {entry["step"]: set(entry["high"]) for entry in cm.priority_log}
    for tid, rec in trace.records.items():
        start, end = rec.final_interval
        for step in range(start, end):
            assert g.neighbors(tid).isdisjoint(high_at[step])


@settings(max_examples=200, deadline=None)
@given(workloads(max_n=8, max_s=6, max_tau=4))
def test_read_only_finish_within_tau_max_of_last_writer(w):
    trace, _ = clairvoyant_trace(w)
    commits = trace.commit_times()
    last_writer = max(commits[t.id] for t in w.transactions if t.writes)
    for t in w.transactions:
        if t.is_read_only:
            assert commits[t.id] <= last_writer + w.tau_max


@st.composite
def single_subgroup(draw):
    j = draw(st.integers(0, 2))
    s = draw(st.integers(max(1, 2**j), 7))
    tau = draw(st.integers(1, 3))
    n = draw(st.integers(1, 7))
    txns = []
    for tid in range(n):
        size = draw(st.integers(2**j, min(2 ** (j + 1) - 1, s)))
        res = draw(st.permutations(range(s)))[:size]
        k = draw(st.integers(1, size))
        txns.append(Transaction(tid, tau, frozenset(res[k:]), frozenset(res[:k])))
    return Workload(s, tuple(txns)), j


@settings(max_examples=300, deadline=None)
@given(single_subgroup())
def test_single_subgroup_neighbour_bound(case):
    # each neighbour holds high priority at most once, for at most tau steps
    w, _ = case
    trace, cm = clairvoyant_trace(w)
    commits = trace.commit_times()
    for t in w.transactions:
        assert commits[t.id] <= (cm.graph.degree(t.id) + 1) * w.tau_max


@settings(max_examples=300, deadline=None)
@given(single_subgroup())
def test_single_subgroup_bound_for_write_only(case):
    w, j = case
    w = Workload(w.resource_count, tuple(
        Transaction(t.id, t.duration, frozenset(), t.resources) for t in w.transactions))
    keys = {classify(t, w) for t in w.transactions}
    assert len(keys) == 1
    j = keys.pop().subgroup
    trace, _ = clairvoyant_trace(w)
    assert trace.makespan <= ((2 ** (j + 1) - 1) * w.gamma_max + 1) * w.tau_max


def test_read_write_conflicts_can_exceed_single_subgroup_bound():
    # regular tournament: i writes i and reads i+1, i+2 (mod 5). Every pair
    # conflicts, yet each resource has a single writer.
    txns = tuple(Transaction(i, 1, frozenset({(i + 1) % 5, (i + 2) % 5}), frozenset({i}))
                 for i in range(5))
    w = Workload(5, txns)
    assert {classify(t, w) for t in txns} == {classify(txns[0], w)}
    assert classify(txns[0], w).subgroup == 1 and w.gamma_max == 1
    assert len(build_conflict_graph(w).edges) == 10
    trace, _ = clairvoyant_trace(w)
    assert trace.makespan == 5 > (3 * 1 + 1) * 1


def test_triangle_reduction_is_serialized():
    w = reduce_coloring_to_scheduling(UndirectedGraph(3, ((0, 1), (1, 2), (0, 2))))
    trace, _ = clairvoyant_trace(w)
    assert trace.makespan == 3
