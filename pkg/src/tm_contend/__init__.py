"""Discrete-time simulation of greedy transactional-memory contention managers."""

from .clairvoyant import ClairvoyantManager, maximal_independent_set
from .engine import (
    ContentionManager,
    EngineView,
    ExecutionTrace,
    PolicyError,
    SimulationError,
    pending_commit_holds,
    run,
    validate_trace,
)
from .harness import GeneratorParams, competitive_ratio, generate, run_experiment, simulate
from .model import (
    ConflictGraph,
    SubgroupKey,
    Transaction,
    Workload,
    WorkloadError,
    balancing_ratio,
    build_conflict_graph,
    classify,
    conflicts,
    global_beta,
    load_workload,
    save_workload,
)
from .nonclairvoyant import NonClairvoyantManager
from .oracles import (
    LowerBoundReport,
    OracleLimitError,
    UndirectedGraph,
    chromatic_number,
    lower_bound,
    optimal_makespan,
    reduce_coloring_to_scheduling,
    reduce_scheduling_to_coloring,
)

__version__ = "0.1.0"
