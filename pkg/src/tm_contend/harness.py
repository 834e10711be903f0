"""Workload generation, experiment sweeps and competitive-ratio reporting."""

from __future__ import annotations

import csv
import io
import json
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

from .clairvoyant import ClairvoyantManager
from .engine import ContentionManager, ExecutionTrace, pending_commit_holds, run, validate_trace
from .model import Transaction, Workload, WorkloadError, balancing_ratio, load_workload
from .nonclairvoyant import NonClairvoyantManager
from .oracles import DEFAULT_LIMIT, OracleLimitError, lower_bound, optimal_makespan

ALGORITHMS = ("clairvoyant", "non-clairvoyant")


def make_policy(algo: str, workload: Workload, seed: int = 0, record_priorities: bool = False) -> ContentionManager:
    if algo == "clairvoyant":
        return ClairvoyantManager(workload, record_priorities=record_priorities)
    if algo == "non-clairvoyant":
        return NonClairvoyantManager(workload, seed=seed, record_priorities=record_priorities)
    raise ValueError(f"unknown algorithm {algo!r}; expected one of {ALGORITHMS}")


def simulate(workload: Workload, algo: str, seed: int = 0) -> ExecutionTrace:
    return run(workload, make_policy(algo, workload, seed))


# -- generation ---------------------------------------------------------------


def _as_fraction(x) -> Fraction:
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10**6)
    return Fraction(x)


@dataclass
class GeneratorParams:
    n: int = 8
    s: int = 8
    beta_target: Fraction = Fraction(1, 2)
    read_only_fraction: Fraction = Fraction(0)
    tau_min: int = 1
    tau_max: int = 4
    lambda_min: int = 1
    lambda_max: int = 4
    seed: int = 0

    def __post_init__(self):
        self.beta_target = _as_fraction(self.beta_target)
        self.read_only_fraction = _as_fraction(self.read_only_fraction)

    def validate(self) -> None:
        if self.n < 1 or self.s < 1:
            raise WorkloadError("n and s must be positive")
        if not 0 < self.beta_target <= 1:
            raise WorkloadError("beta_target must lie in (0, 1]")
        if not 0 <= self.read_only_fraction < 1:
            raise WorkloadError("read_only_fraction must lie in [0, 1)")
        if not 1 <= self.tau_min <= self.tau_max:
            raise WorkloadError("need 1 <= tau_min <= tau_max")
        if not 1 <= self.lambda_min <= self.lambda_max:
            raise WorkloadError("need 1 <= lambda_min <= lambda_max")
        if self.lambda_max > self.s:
            raise WorkloadError(f"lambda_max={self.lambda_max} exceeds s={self.s}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["beta_target"] = str(self.beta_target)
        d["read_only_fraction"] = str(self.read_only_fraction)
        return d


def generate(params: GeneratorParams) -> Workload:
    params.validate()
    rng = random.Random(params.seed)
    n_read_only = math.floor(params.read_only_fraction * params.n)
    read_only = set(rng.sample(range(params.n), n_read_only))
    txns = []
    for tid in range(params.n):
        size = rng.randint(params.lambda_min, params.lambda_max)
        resources = rng.sample(range(params.s), size)
        duration = rng.randint(params.tau_min, params.tau_max)
        if tid in read_only:
            txns.append(Transaction(tid, duration, frozenset(resources), frozenset()))
            continue
        n_writes = max(1, math.ceil(params.beta_target * size))
        t = Transaction(tid, duration, frozenset(resources[n_writes:]), frozenset(resources[:n_writes]))
        assert balancing_ratio(t) >= params.beta_target
        txns.append(t)
    return Workload(params.s, tuple(txns))


# -- ratios and bounds --------------------------------------------------------


def competitive_ratio(makespan: int, reference: int) -> Fraction:
    if reference <= 0:
        raise ValueError("reference makespan must be >= 1")
    return Fraction(makespan, reference)


def clairvoyant_bound(w: Workload) -> float:
    """32 * ell * sqrt(s / beta) + 1."""
    return 32 * w.ell * math.sqrt(w.resource_count / w.beta) + 1


def non_clairvoyant_bound(w: Workload) -> float:
    """512 * e * ell * sqrt(s / beta) * ln n + 1 (holds with probability >= 1 - 1/n)."""
    return 512 * math.e * w.ell * math.sqrt(w.resource_count / w.beta) * math.log(len(w)) + 1


def paper_bound(w: Workload, algo: str) -> float:
    return clairvoyant_bound(w) if algo == "clairvoyant" else non_clairvoyant_bound(w)


def response_time_bound(degree: int, tau: int, n: int) -> float:
    """16 * e * (d + 1) * tau * ln n."""
    return 16 * math.e * (degree + 1) * tau * math.log(n)


# -- experiments --------------------------------------------------------------

CSV_COLUMNS = (
    "workload", "algo", "seed", "n", "s", "beta", "ell", "makespan",
    "lower_bound", "optimal", "reference", "ratio", "paper_bound",
    "bound_ok", "violations", "pending_commit",
)


@dataclass
class ExperimentReport:
    rows: list[dict] = field(default_factory=list)

    @property
    def summary(self) -> dict:
        ratios = [r["ratio"] for r in self.rows]
        return {
            "rows": len(self.rows),
            "mean_ratio": sum(ratios) / len(ratios) if ratios else None,
            "max_ratio": max(ratios) if ratios else None,
            "bound_violations": sum(1 for r in self.rows if not r["bound_ok"]),
            "invariant_violations": sum(r["violations"] for r in self.rows),
        }

    @property
    def ok(self) -> bool:
        s = self.summary
        return s["bound_violations"] == 0 and s["invariant_violations"] == 0

    def to_json(self) -> str:
        rows = [{**r, "ratio": _fmt(r["ratio"]), "paper_bound": _fmt(r["paper_bound"])} for r in self.rows]
        summary = {k: (_fmt(v) if isinstance(v, float) else v) for k, v in self.summary.items()}
        return json.dumps({"summary": summary, "rows": rows}, indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in self.rows:
            writer.writerow(
                "" if r[c] is None else _fmt(r[c]) if isinstance(r[c], float) else r[c]
                for c in CSV_COLUMNS
            )
        return buf.getvalue()

    def write(self, out_dir: str | Path) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.csv").write_text(self.to_csv())
        (out / "report.json").write_text(self.to_json())


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def run_cell(workload_id: str, w: Workload, algo: str, seed: int,
             optimal: int | None, lb: int) -> dict:
    trace = simulate(w, algo, seed)
    problems = validate_trace(w, trace)
    ref_kind = "optimal" if optimal is not None else "lower_bound"
    reference = optimal if optimal is not None else lb
    ratio = float(competitive_ratio(trace.makespan, reference))
    bound = paper_bound(w, algo)
    return {
        "workload": workload_id,
        "algo": algo,
        "seed": seed,
        "n": len(w),
        "s": w.resource_count,
        "beta": str(w.beta),
        "ell": w.ell,
        "makespan": trace.makespan,
        "lower_bound": lb,
        "optimal": optimal,
        "reference": ref_kind,
        "ratio": ratio,
        "paper_bound": bound,
        "bound_ok": ratio <= bound,
        "violations": len(problems),
        "pending_commit": pending_commit_holds(trace),
    }


def _expand_seeds(spec) -> list[int]:
    if isinstance(spec, dict):
        return list(range(spec.get("start", 0), spec.get("start", 0) + spec["count"]))
    if isinstance(spec, int):
        return [spec]
    return list(spec)


def load_config_workloads(config: dict, base_dir: Path | None = None) -> list[tuple[str, Workload]]:
    out = []
    for k, entry in enumerate(config.get("workloads", [])):
        wid = str(entry.get("id", f"w{k}"))
        if "file" in entry:
            path = Path(entry["file"])
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            out.append((wid, load_workload(path)))
        elif "generate" in entry:
            count = entry.get("count", 1)
            base = dict(entry["generate"])
            seed0 = base.pop("seed", 0)
            for c in range(count):
                params = GeneratorParams(**base, seed=seed0 + c)
                out.append((wid if count == 1 else f"{wid}-{c}", generate(params)))
        else:
            raise ValueError(f"workload entry {wid!r} needs 'file' or 'generate'")
    return out


def run_experiment(config: dict, base_dir: Path | None = None, jobs: int = 1) -> ExperimentReport:
    """Run every (workload, algorithm, seed) cell named by ``config``.

    Config keys: ``workloads`` (entries with ``file`` or ``generate`` plus an
    optional ``count``), ``algorithms``, ``seeds`` (list, int, or
    ``{"start", "count"}``), ``optimal`` (bool, default true) and
    ``oracle_limit``. Rows whose instance is too large for the exact oracle
    fall back to the best lower bound and are marked ``reference=lower_bound``.
    """
    algos = config.get("algorithms", list(ALGORITHMS))
    for a in algos:
        if a not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {a!r}")
    seeds = _expand_seeds(config.get("seeds", [0]))
    use_optimal = config.get("optimal", True)
    limit = config.get("oracle_limit", DEFAULT_LIMIT)

    cells = []
    for wid, w in load_config_workloads(config, base_dir):
        lb = lower_bound(w).best
        opt = None
        if use_optimal:
            try:
                opt = optimal_makespan(w, limit=limit)
            except OracleLimitError:
                opt = None
        for algo in algos:
            for seed in seeds:
                cells.append((wid, w, algo, seed, opt, lb))

    if jobs > 1 and cells:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(run_cell, *zip(*cells)))
    else:
        rows = [run_cell(*c) for c in cells]
    rows.sort(key=lambda r: (r["workload"], r["algo"], r["seed"]))
    return ExperimentReport(rows)
