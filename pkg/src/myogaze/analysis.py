"""Session-log metrics and nonparametric statistics.

Metrics per trial: switch success (SR-G) with its switching time (T-G),
plus the task-level rate and time for the running mode: transport tasks
(SR-HT, T-HT: placed in the zone with the correct type) or hold-only tasks
(SR-PT, T-PT: held with the correct type). Time data is summarized as
box-plot statistics (median, quartiles, extrema) since it is generally not
normal; significance uses Wilcoxon signed-rank for two paired groups and
Friedman plus Bonferroni for more.
"""

from __future__ import annotations

import collections
import itertools
import statistics
from dataclasses import dataclass, field

import numpy as np
from scipy.special import kolmogorov, ndtr
from scipy.stats import chi2, rankdata

from .runner import Mode
from .wire import EventRecord

WILCOXON_EXACT_MAX_N = 12


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    method: str
    n: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_value <= 1.0:
            raise ValueError(f"p-value out of [0, 1]: {self.p_value}")

    def to_json(self) -> dict:
        return {
            "statistic": self.statistic,
            "p_value": self.p_value,
            "method": self.method,
            "n": self.n,
        }


@dataclass(frozen=True)
class TimesSummary:
    """Sort-based box-plot summary of a list of times (ms)."""

    n: int
    values: tuple[float, ...]
    median: float | None = None
    q1: float | None = None
    q3: float | None = None
    minimum: float | None = None
    maximum: float | None = None

    @property
    def iqr(self) -> float | None:
        if self.q1 is None or self.q3 is None:
            return None
        return self.q3 - self.q1

    @classmethod
    def from_values(cls, values: list[float]) -> "TimesSummary":
        vals = tuple(sorted(values))
        if not vals:
            return cls(n=0, values=())
        if len(vals) == 1:
            v = vals[0]
            return cls(n=1, values=vals, median=v, q1=v, q3=v, minimum=v, maximum=v)
        q1, med, q3 = statistics.quantiles(vals, n=4, method="inclusive")
        return cls(
            n=len(vals), values=vals, median=med, q1=q1, q3=q3,
            minimum=vals[0], maximum=vals[-1],
        )

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "median": self.median,
            "q1": self.q1,
            "q3": self.q3,
            "iqr": self.iqr,
            "min": self.minimum,
            "max": self.maximum,
        }


@dataclass(frozen=True)
class TrialView:
    """Flat per-trial view extracted from the event stream."""

    index: int
    block: int
    object_id: int
    object_name: str
    optimal_type: str
    final_type: str
    correct_type: bool
    outcome: str
    t0: int
    duration_ms: int
    switch_time_ms: int | None  # start -> final correct trigger
    held_time_ms: int | None
    placed_time_ms: int | None


class LogValidationError(ValueError):
    pass


def extract_trials(records: list[EventRecord]) -> list[TrialView]:
    trials: list[TrialView] = []
    cur: dict | None = None
    for rec in records:
        if rec.kind == "TrialStart":
            if cur is not None:
                raise LogValidationError(
                    f"TrialStart at t={rec.t} inside an open trial"
                )
            cur = {
                "index": rec.attrs["trial"],
                "block": rec.attrs["block"],
                "object_id": rec.attrs["object_id"],
                "object_name": rec.attrs.get("object", ""),
                "optimal": rec.attrs["optimal_type"],
                "t0": rec.t,
                "correct_triggers": [],
                "held_t": None,
                "held_type": None,
                "placed_t": None,
            }
        elif cur is None:
            if rec.kind != "EmgCommand":
                raise LogValidationError(
                    f"{rec.kind} at t={rec.t} outside any trial"
                )
        elif rec.kind == "GazeTrigger":
            if rec.attrs.get("grasp") == cur["optimal"]:
                cur["correct_triggers"].append(rec.t)
        elif rec.kind == "Held":
            cur["held_t"] = rec.t
            cur["held_type"] = rec.attrs["used_type"]
        elif rec.kind == "Placed":
            cur["placed_t"] = rec.t
        elif rec.kind == "TrialEnd":
            # The grasp type that held the object is the one judged; for
            # trials that never held, the type at trial end stands in.
            final_type = cur["held_type"] or rec.attrs["final_type"]
            correct = final_type == cur["optimal"]
            switch_time = (
                cur["correct_triggers"][-1] - cur["t0"]
                if correct and cur["correct_triggers"]
                else None
            )
            trials.append(
                TrialView(
                    index=cur["index"],
                    block=cur["block"],
                    object_id=cur["object_id"],
                    object_name=cur["object_name"],
                    optimal_type=cur["optimal"],
                    final_type=final_type,
                    correct_type=correct,
                    outcome=rec.attrs["outcome"],
                    t0=cur["t0"],
                    duration_ms=rec.attrs["duration_ms"],
                    switch_time_ms=switch_time,
                    held_time_ms=None if cur["held_t"] is None else cur["held_t"] - cur["t0"],
                    placed_time_ms=None if cur["placed_t"] is None else cur["placed_t"] - cur["t0"],
                )
            )
            cur = None
    if cur is not None:
        raise LogValidationError("log ends inside an open trial")
    return trials


def _task_success(trial: TrialView, mode: Mode) -> bool:
    if mode is Mode.TRANSPORT:
        return trial.correct_type and trial.placed_time_ms is not None
    return trial.correct_type and trial.held_time_ms is not None


def _task_time(trial: TrialView, mode: Mode) -> int | None:
    return trial.placed_time_ms if mode is Mode.TRANSPORT else trial.held_time_ms


@dataclass(frozen=True)
class GroupMetrics:
    n: int
    sr_g: float | None
    sr_task: float | None
    t_g: TimesSummary
    t_task: TimesSummary

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "sr_g": self.sr_g,
            "sr_task": self.sr_task,
            "t_g": self.t_g.to_json(),
            "t_task": self.t_task.to_json(),
        }


def _group_metrics(trials: list[TrialView], mode: Mode) -> GroupMetrics:
    n = len(trials)
    if n == 0:
        return GroupMetrics(0, None, None, TimesSummary.from_values([]),
                            TimesSummary.from_values([]))
    sr_g = sum(t.correct_type for t in trials) / n
    sr_task = sum(_task_success(t, mode) for t in trials) / n
    t_g = TimesSummary.from_values(
        [float(t.switch_time_ms) for t in trials if t.switch_time_ms is not None]
    )
    t_task = TimesSummary.from_values(
        [float(_task_time(t, mode)) for t in trials
         if _task_success(t, mode) and _task_time(t, mode) is not None]
    )
    return GroupMetrics(n=n, sr_g=sr_g, sr_task=sr_task, t_g=t_g, t_task=t_task)


@dataclass(frozen=True)
class MetricsReport:
    mode: Mode
    overall: GroupMetrics
    per_block: dict[int, GroupMetrics] = field(default_factory=dict)
    per_type: dict[str, GroupMetrics] = field(default_factory=dict)
    per_object: dict[int, GroupMetrics] = field(default_factory=dict)
    trials: tuple[TrialView, ...] = ()

    @property
    def task_rate_name(self) -> str:
        return "SR-HT" if self.mode is Mode.TRANSPORT else "SR-PT"

    @property
    def task_time_name(self) -> str:
        return "T-HT" if self.mode is Mode.TRANSPORT else "T-PT"

    def to_json(self) -> dict:
        return {
            "mode": self.mode.value,
            "n_trials": self.overall.n,
            "sr_g": self.overall.sr_g,
            "t_g_ms": self.overall.t_g.to_json(),
            self.task_rate_name.lower().replace("-", "_"): self.overall.sr_task,
            self.task_time_name.lower().replace("-", "_") + "_ms":
                self.overall.t_task.to_json(),
            "per_block": {str(k): v.to_json() for k, v in sorted(self.per_block.items())},
            "per_type": {k: v.to_json() for k, v in sorted(self.per_type.items())},
            "per_object": {str(k): v.to_json() for k, v in sorted(self.per_object.items())},
        }

    def to_text(self) -> str:
        def pct(x: float | None) -> str:
            return "   n/a" if x is None else f"{100.0 * x:5.1f}%"

        def ms(x: float | None) -> str:
            return "      n/a" if x is None else f"{x:8.0f}ms"

        o = self.overall
        lines = [
            f"trials: {o.n}    mode: {self.mode.value}",
            f"SR-G : {pct(o.sr_g)}   T-G : median {ms(o.t_g.median)}  "
            f"IQR [{ms(o.t_g.q1)}, {ms(o.t_g.q3)}]  n={o.t_g.n}",
            f"{self.task_rate_name}: {pct(o.sr_task)}   {self.task_time_name}: "
            f"median {ms(o.t_task.median)}  IQR [{ms(o.t_task.q1)}, "
            f"{ms(o.t_task.q3)}]  n={o.t_task.n}",
        ]
        if self.per_block:
            lines.append("per block:")
            for b, g in sorted(self.per_block.items()):
                lines.append(
                    f"  block {b:2d}: SR-G {pct(g.sr_g)}  "
                    f"{self.task_rate_name} {pct(g.sr_task)}  "
                    f"{self.task_time_name} {ms(g.t_task.median)}"
                )
        if self.per_type:
            lines.append("per grasp type:")
            for name, g in sorted(self.per_type.items()):
                lines.append(
                    f"  {name:12s}: n={g.n:3d}  {self.task_rate_name} "
                    f"{pct(g.sr_task)}  {self.task_time_name} {ms(g.t_task.median)}"
                )
        return "\n".join(lines)

    def csv_rows(self) -> list[list]:
        rows: list[list] = [[
            "trial", "block", "object_id", "object", "optimal_type",
            "final_type", "correct_type", "outcome", "duration_ms",
            "switch_time_ms", "held_time_ms", "placed_time_ms",
        ]]
        for t in self.trials:
            rows.append([
                t.index, t.block, t.object_id, t.object_name, t.optimal_type,
                t.final_type, int(t.correct_type), t.outcome, t.duration_ms,
                t.switch_time_ms, t.held_time_ms, t.placed_time_ms,
            ])
        return rows


def compute_metrics(records: list[EventRecord], mode: Mode) -> MetricsReport:
    """Build the full metrics report from one session's event records."""
    trials = extract_trials(records)
    per_block: dict[int, list[TrialView]] = {}
    per_type: dict[str, list[TrialView]] = {}
    per_object: dict[int, list[TrialView]] = {}
    for t in trials:
        per_block.setdefault(t.block, []).append(t)
        per_type.setdefault(t.optimal_type, []).append(t)
        per_object.setdefault(t.object_id, []).append(t)
    return MetricsReport(
        mode=mode,
        overall=_group_metrics(trials, mode),
        per_block={k: _group_metrics(v, mode) for k, v in per_block.items()},
        per_type={k: _group_metrics(v, mode) for k, v in per_type.items()},
        per_object={k: _group_metrics(v, mode) for k, v in per_object.items()},
        trials=tuple(trials),
    )


def trial_durations(records: list[EventRecord]) -> list[float]:
    """Total per-trial times, defined for every trial regardless of outcome;
    the quantity paired across sessions by the significance tests."""
    return [float(t.duration_ms) for t in extract_trials(records)]


# -- nonparametric tests ----------------------------------------------------


def _signed_rank_setup(x, y) -> tuple[np.ndarray, np.ndarray]:
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if xa.shape != ya.shape or xa.ndim != 1:
        raise ValueError("paired samples must be equal-length 1-D sequences")
    d = xa - ya
    d = d[d != 0.0]  # zero differences carry no sign information; drop them
    if d.size < 5:
        raise ValueError(
            f"too few nonzero differences for a signed-rank test: {d.size} < 5"
        )
    ranks = rankdata(np.abs(d))
    return d, ranks


def wilcoxon_signed_rank(x, y) -> TestResult:
    """Two-sided Wilcoxon signed-rank test on paired samples.

    Exact null enumeration over all 2^n sign assignments for n <= 12;
    beyond that, a normal approximation with tie and continuity correction.
    """
    d, ranks = _signed_rank_setup(x, y)
    n = d.size
    w_plus = float(ranks[d > 0].sum())
    if n <= WILCOXON_EXACT_MAX_N:
        total = 2 ** n
        count_le = 0
        count_ge = 0
        for signs in itertools.product((0.0, 1.0), repeat=n):
            w = float(np.dot(signs, ranks))
            if w <= w_plus:
                count_le += 1
            if w >= w_plus:
                count_ge += 1
        p = min(1.0, 2.0 * min(count_le, count_ge) / total)
        return TestResult(statistic=w_plus, p_value=p, method="wilcoxon-exact", n=n)
    mu = n * (n + 1) / 4.0
    tie_counts = np.unique(ranks, return_counts=True)[1].astype(float)
    var = n * (n + 1) * (2 * n + 1) / 24.0 - float(((tie_counts**3 - tie_counts) / 48.0).sum())
    dev = w_plus - mu
    z = 0.0 if dev == 0.0 else (dev - 0.5 * np.sign(dev)) / np.sqrt(var)
    p = min(1.0, 2.0 * float(ndtr(-abs(z))))
    return TestResult(statistic=w_plus, p_value=p, method="wilcoxon-normal", n=n)


FRIEDMAN_EXACT_MAX_K = 4
FRIEDMAN_EXACT_MAX_N = 30


def _friedman_exact_p(ranks: np.ndarray, obs_sum_sq: float) -> float:
    """Exact null of the rank-sum square total under independent uniform
    permutations of each subject's rank vector, by convolution over the
    first k-1 treatment sums (the last is fixed by the subject totals)."""
    k, n = ranks.shape
    half = np.rint(ranks * 2).astype(int)  # average ranks step in halves
    dist: dict[tuple[int, ...], float] = {(0,) * (k - 1): 1.0}
    for j in range(n):
        col = tuple(int(v) for v in half[:, j])
        perms = collections.Counter(itertools.permutations(col))
        total = sum(perms.values())
        new: dict[tuple[int, ...], float] = collections.defaultdict(float)
        for state, prob in dist.items():
            for perm, weight in perms.items():
                key = tuple(s + perm[i] for i, s in enumerate(state))
                new[key] += prob * (weight / total)
        dist = dict(new)
    grand_half = int(half.sum())
    p = 0.0
    for state, prob in dist.items():
        last = grand_half - sum(state)
        ssq = sum((s / 2.0) ** 2 for s in state) + (last / 2.0) ** 2
        if ssq >= obs_sum_sq - 1e-9:
            p += prob
    return min(1.0, p)


def friedman(matrix) -> TestResult:
    """Friedman test with tie-corrected within-subject ranks.

    `matrix` is k treatments x n subjects. The statistic is the chi-square
    statistic with df = k-1; its p-value comes from the exact permutation
    null when the problem is small enough to enumerate (k <= 4, n <= 30)
    and from the chi-square tail otherwise.
    """
    data = np.asarray(matrix, dtype=float)
    if data.ndim != 2:
        raise ValueError("friedman needs a 2-D matrix, treatments x subjects")
    k, n = data.shape
    if k < 3:
        raise ValueError(f"friedman needs at least 3 treatments, got {k}")
    if n < 2:
        raise ValueError(f"friedman needs at least 2 subjects, got {n}")
    ranks = np.apply_along_axis(rankdata, 0, data)  # rank within each subject
    rank_sums = ranks.sum(axis=1)
    sum_sq = float((rank_sums**2).sum())
    q0 = 12.0 / (n * k * (k + 1)) * sum_sq - 3.0 * n * (k + 1)
    ties = 0.0
    for j in range(n):
        counts = np.unique(data[:, j], return_counts=True)[1].astype(float)
        ties += float((counts**3 - counts).sum())
    correction = 1.0 - ties / (n * k * (k * k - 1))
    if correction <= 0.0:
        return TestResult(statistic=0.0, p_value=1.0, method="friedman-exact", n=n)
    q = q0 / correction
    if k <= FRIEDMAN_EXACT_MAX_K and n <= FRIEDMAN_EXACT_MAX_N:
        p = _friedman_exact_p(ranks, sum_sq)
        method = "friedman-exact"
    else:
        p = float(chi2.sf(q, k - 1))
        method = "friedman-chi2"
    return TestResult(statistic=q, p_value=min(1.0, max(0.0, p)), method=method, n=n)


def bonferroni(pvals, m: int | None = None) -> list[float]:
    """Bonferroni adjustment: p_adj = min(1, m * p)."""
    pvals = list(pvals)
    if m is None:
        m = len(pvals)
    if m < 1:
        raise ValueError("m must be at least 1")
    return [min(1.0, m * p) for p in pvals]


def ks_normality(
    sample, monte_carlo: bool = False, n_sim: int = 2000, seed: int = 0
) -> TestResult:
    """Kolmogorov-Smirnov test against a normal fitted to the sample.

    The default asymptotic p ignores that the parameters were estimated
    (and so understates significance); monte_carlo=True calibrates the null
    by simulation instead.
    """
    arr = np.sort(np.asarray(sample, dtype=float))
    n = arr.size
    if n < 5:
        raise ValueError(f"need at least 5 observations, got {n}")
    sd = float(arr.std(ddof=1))
    if sd == 0.0:
        raise ValueError("degenerate sample: zero standard deviation")
    mean = float(arr.mean())

    def _stat(sorted_rows: np.ndarray) -> np.ndarray:
        m = sorted_rows.shape[-1]
        grid = np.arange(1, m + 1) / m
        cdf = ndtr(sorted_rows)
        d_plus = (grid - cdf).max(axis=-1)
        d_minus = (cdf - (grid - 1.0 / m)).max(axis=-1)
        return np.maximum(d_plus, d_minus)

    d = float(_stat((arr - mean) / sd))
    if not monte_carlo:
        p = float(kolmogorov(d * np.sqrt(n)))
        return TestResult(statistic=d, p_value=min(1.0, max(0.0, p)),
                          method="ks-normal", n=n)
    rng = np.random.default_rng(seed)
    sims = np.sort(rng.standard_normal((n_sim, n)), axis=1)
    sims = (sims - sims.mean(axis=1, keepdims=True)) / sims.std(axis=1, ddof=1, keepdims=True)
    d_sims = _stat(sims)
    p = (1.0 + float((d_sims >= d).sum())) / (n_sim + 1.0)
    return TestResult(statistic=d, p_value=p, method="ks-normal-mc", n=n)
