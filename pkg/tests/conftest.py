import itertools

from hypothesis import strategies as st

from tm_contend import Transaction, Workload, conflicts


@st.composite
def workloads(draw, max_n=6, max_s=5, max_tau=3, min_n=1):
    s = draw(st.integers(1, max_s))
    n = draw(st.integers(min_n, max_n))
    txns = []
    for tid in range(n):
        resources = draw(st.sets(st.integers(0, s - 1), min_size=1, max_size=s))
        writes = draw(st.sets(st.sampled_from(sorted(resources)), max_size=len(resources)))
        duration = draw(st.integers(1, max_tau))
        txns.append(Transaction(tid, duration, frozenset(resources - writes), frozenset(writes)))
    if all(t.is_read_only for t in txns):
        t = txns[0]
        txns[0] = Transaction(t.id, t.duration, frozenset(), t.resources)
    return Workload(s, tuple(txns))


def brute_force_makespan(w: Workload) -> int:
    """Smallest K admitting start times with conflicting intervals disjoint."""
    txns = list(w.transactions)
    pairs = [(a, b) for a, b in itertools.combinations(range(len(txns)), 2)
             if conflicts(txns[a], txns[b])]
    horizon = sum(t.duration for t in txns)
    for k in range(max(t.duration for t in txns), horizon + 1):
        ranges = [range(0, k - t.duration + 1) for t in txns]
        for starts in itertools.product(*ranges):
            if all(
                starts[a] + txns[a].duration <= starts[b] or starts[b] + txns[b].duration <= starts[a]
                for a, b in pairs
            ):
                return k
    raise AssertionError("unreachable: serial schedule fits the horizon")


def brute_force_chromatic(n: int, edges) -> int:
    for k in range(1, n + 1):
        for colors in itertools.product(range(k), repeat=n):
            if all(colors[u] != colors[v] for u, v in edges):
                return k
    return 0


def unit_writers(n, resource=0):
    return Workload(resource + 1, tuple(
        Transaction(i, 1, frozenset(), frozenset({resource})) for i in range(n)
    ))


ACCEPTANCE: dict[str, tuple[bool, str]] = {}


def record_criterion(name: str, passed: bool, detail: str) -> None:
    ACCEPTANCE[name] = (passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[name]
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")
