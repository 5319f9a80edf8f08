"""Label conventions, empirical win-rate estimators, and the accuracy-bias identity.

Labels are binary throughout: 0 means generator A won the comparison, 1 means
generator B won. Ties never reach this layer; score-level ties are resolved
upstream (see :func:`swap_and_sum` and the Likert aggregation in
``wincal.data``).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DEGENERACY_GUARD",
    "AccuracyPair",
    "AnnotationMatrix",
    "ComparisonTask",
    "DegenerateAccuracyError",
    "FeasibilityReport",
    "empirical_accuracies",
    "empirical_win_rate",
    "estimation_bias",
    "feasibility_check",
    "forward_win_rate",
    "invert_win_rate",
    "pooled_observed_win_rate",
    "swap_and_sum",
]

# Below this distance of q0 + q1 from 1 the inversion denominator is treated
# as degenerate; 1e-3 bounds the magnitude of inverted samples at ~1e3.
DEGENERACY_GUARD = 1e-3


class DegenerateAccuracyError(ValueError):
    """The evaluator accuracies leave the win rate unidentifiable (q0 + q1 ~ 1)."""


def _check_label(value, where: str):
    if value not in (0, 1):
        raise ValueError(f"{where}: label must be 0 or 1, got {value!r}")
    return int(value)


@dataclass(frozen=True)
class AccuracyPair:
    """Conditional agreement rates of one evaluator with the human verdict.

    ``q0`` is the probability the evaluator also says A-wins when the human
    verdict is A-wins; ``q1`` is the analogue for B-wins.
    """

    q0: float
    q1: float

    def __post_init__(self):
        for name, v in (("q0", self.q0), ("q1", self.q1)):
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")


@dataclass(frozen=True)
class FeasibilityReport:
    """Whether an observed win rate can invert to a probability in [0, 1]."""

    feasible: bool
    regime: str  # "above-half" | "below-half" | "degenerate"


@dataclass
class ComparisonTask:
    """One pairwise comparison: optional human verdict plus one label per evaluator."""

    task_id: str
    eval_labels: dict[str, int]
    human_label: int | None = None

    def __post_init__(self):
        if self.human_label is not None:
            self.human_label = _check_label(self.human_label, f"task {self.task_id}")
        self.eval_labels = {
            str(e): _check_label(v, f"task {self.task_id}, evaluator {e}")
            for e, v in self.eval_labels.items()
        }


@dataclass
class AnnotationMatrix:
    """Complete task x evaluator label matrix for one generator pair.

    Every listed evaluator must have a label on every task. An empty evaluator
    list is permitted only as the skeleton state produced by attribution
    simulation (human labels present, judge columns not yet attached); all
    estimators reject evaluator-free matrices.
    """

    generator_a: str
    generator_b: str
    tasks: list[ComparisonTask]
    evaluators: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.tasks:
            raise ValueError("annotation matrix needs at least one task")
        if len(set(self.evaluators)) != len(self.evaluators):
            raise ValueError("evaluator ids must be distinct")
        seen = set()
        for task in self.tasks:
            if task.task_id in seen:
                raise ValueError(f"duplicate task_id {task.task_id!r}")
            seen.add(task.task_id)
            missing = set(self.evaluators) - set(task.eval_labels)
            extra = set(task.eval_labels) - set(self.evaluators)
            if missing or extra:
                raise ValueError(
                    f"task {task.task_id!r}: incomplete evaluator coverage "
                    f"(missing {sorted(missing)}, unlisted {sorted(extra)})"
                )

    @property
    def n_tasks(self) -> int:
        return len(self.tasks)

    @property
    def task_ids(self) -> list[str]:
        return [t.task_id for t in self.tasks]

    def eval_column(self, evaluator_id: str) -> list[int]:
        if evaluator_id not in self.evaluators:
            raise KeyError(evaluator_id)
        return [t.eval_labels[evaluator_id] for t in self.tasks]

    def label_matrix(self) -> np.ndarray:
        """Eval labels as an (n_tasks, n_evaluators) int array."""
        if not self.evaluators:
            raise ValueError("matrix has no evaluators")
        return np.array(
            [[t.eval_labels[e] for e in self.evaluators] for t in self.tasks],
            dtype=np.int64,
        )

    @property
    def has_human_labels(self) -> bool:
        return all(t.human_label is not None for t in self.tasks)

    def human_column(self) -> list[int]:
        if not self.has_human_labels:
            raise ValueError("matrix has tasks without human labels")
        return [t.human_label for t in self.tasks]  # type: ignore[misc]

    def flipped(self) -> "AnnotationMatrix":
        """Swap the generator roles, flipping every label."""
        tasks = [
            ComparisonTask(
                task_id=t.task_id,
                eval_labels={e: 1 - v for e, v in t.eval_labels.items()},
                human_label=None if t.human_label is None else 1 - t.human_label,
            )
            for t in self.tasks
        ]
        return AnnotationMatrix(
            generator_a=self.generator_b,
            generator_b=self.generator_a,
            tasks=tasks,
            evaluators=list(self.evaluators),
        )


def empirical_win_rate(labels) -> float:
    """Fraction of A-wins (label 0) in a label sequence."""
    labels = list(labels)
    if not labels:
        raise ValueError("no observations")
    arr = np.asarray(labels)
    return float(np.mean(arr == 0))


def pooled_observed_win_rate(matrix: AnnotationMatrix) -> float:
    """Fraction of A-wins over all (task, evaluator) judgments pooled equally.

    For a complete matrix this equals the mean of the per-evaluator rates.
    """
    return float(np.mean(matrix.label_matrix() == 0))


def empirical_accuracies(eval_labels, human_labels) -> AccuracyPair:
    """Per-class agreement rates of an evaluator against human verdicts.

    Returns ``(q0, q1)`` where ``q0`` is the agreement rate on tasks the human
    labelled 0 and ``q1`` the agreement rate on tasks labelled 1.
    """
    ev = np.asarray(list(eval_labels))
    hu = np.asarray(list(human_labels))
    if ev.shape != hu.shape:
        raise ValueError(f"label lists differ in length: {ev.size} vs {hu.size}")
    n0 = int(np.sum(hu == 0))
    n1 = int(np.sum(hu == 1))
    if n0 == 0:
        raise ValueError("q0 undefined: no tasks with human label 0")
    if n1 == 0:
        raise ValueError("q1 undefined: no tasks with human label 1")
    q0 = float(np.sum((hu == 0) & (ev == 0)) / n0)
    q1 = float(np.sum((hu == 1) & (ev == 1)) / n1)
    return AccuracyPair(q0, q1)


def forward_win_rate(p: float, acc: AccuracyPair) -> float:
    """Observed win rate implied by a true win rate under imperfect accuracies.

    Total probability over the human verdict: ``k = p*q0 + (1 - p)*(1 - q1)``.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    return p * acc.q0 + (1.0 - p) * (1.0 - acc.q1)


def invert_win_rate(k: float, acc: AccuracyPair, *, guard: float = DEGENERACY_GUARD) -> float:
    """Solve the forward identity for the true win rate.

    Returns ``(k + q1 - 1) / (q0 + q1 - 1)``, which may fall outside [0, 1]
    when the observed rate is infeasible for the given accuracies; callers
    apply their own policy (see :func:`feasibility_check`).
    """
    denom = acc.q0 + acc.q1 - 1.0
    if abs(denom) <= guard:
        raise DegenerateAccuracyError(
            f"q0 + q1 - 1 = {denom:.3g} is within the degeneracy guard {guard:g}"
        )
    return (k + acc.q1 - 1.0) / denom


def estimation_bias(estimate: float, p: float) -> float:
    """Absolute error of a win-rate estimate against the true rate."""
    return abs(estimate - p)


def feasibility_check(
    k: float, acc: AccuracyPair, *, guard: float = DEGENERACY_GUARD
) -> FeasibilityReport:
    """Report whether inverting ``k`` under ``acc`` lands strictly inside (0, 1).

    Never raises: degenerate accuracies are reported, not thrown.
    """
    s = acc.q0 + acc.q1
    if abs(s - 1.0) <= guard:
        return FeasibilityReport(feasible=False, regime="degenerate")
    if s > 1.0:
        return FeasibilityReport(
            feasible=(1.0 - acc.q1) < k < acc.q0, regime="above-half"
        )
    return FeasibilityReport(feasible=acc.q0 < k < (1.0 - acc.q1), regime="below-half")


def swap_and_sum(original, swapped, rng: np.random.Generator) -> int:
    """Pick a winner from scores collected under both presentation orders.

    ``original`` holds (first, second) scores with generator A shown first;
    ``swapped`` holds (first, second) scores with generator B shown first and
    is re-aligned here. The generator with the larger total across both
    orderings wins; equal totals draw a uniform random winner from ``rng``.
    """
    o_first, o_second = (float(v) for v in original)
    s_first, s_second = (float(v) for v in swapped)
    for v in (o_first, o_second, s_first, s_second):
        if not np.isfinite(v):
            raise ValueError(f"scores must be finite, got {v}")
    total_a = o_first + s_second
    total_b = o_second + s_first
    if total_a > total_b:
        return 0
    if total_b > total_a:
        return 1
    return int(rng.integers(0, 2))
