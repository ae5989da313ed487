"""Layered majority-vote ensembles.

Level 1: for one (country, cycle) dataset, cross-validate every
registered classifier, keep the top three, tune each by grid search,
and wrap them in a majority-vote ensemble.

Level 2: for one cycle, test every country's level-1 ensemble on the
target country's data for that cycle and keep the top three, provided
each clears the quality gate (hit rate strictly above the threshold).
When fewer than three qualify, the largest odd number of qualifiers is
kept so the vote stays well-defined; a cycle with no qualifier is
rejected and excluded from the aggregate.

The overall hit rate is the micro-average: total correct over total
predictions across the evaluated cycles.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .classifiers import (
    ClassifierSpec,
    CvReport,
    DEFAULT_GRIDS,
    TrainedModel,
    cross_validate,
    derive_seed,
    grid_search,
    predict,
)
from .errors import DataError
from .ingest import Dataset
from .validation import check_feature_matrix


@dataclass
class SelectionSet:
    """Ranked candidates and the chosen subset for one selection step."""

    cycle: str
    ranked: list[tuple[str, float]]
    chosen: list[str]

    def to_dict(self) -> dict:
        return {
            "cycle": self.cycle,
            "ranked": [[name, rate] for name, rate in self.ranked],
            "chosen": list(self.chosen),
        }


@dataclass
class VotingEnsemble:
    """Majority-rule ensemble; members vote with equal weight."""

    level: int
    members: list[Union[TrainedModel, "VotingEnsemble"]]
    provenance: tuple[str, str]
    member_hit_rates: list[float] = field(default_factory=list)

    def __post_init__(self):
        if self.level not in (1, 2):
            raise DataError(f"ensemble level must be 1 or 2, got {self.level}")
        if len(self.members) % 2 == 0 or not self.members:
            raise DataError(f"member count must be odd, got {len(self.members)}")
        for member in self.members:
            ok = isinstance(member, TrainedModel) if self.level == 1 else (
                isinstance(member, VotingEnsemble) and member.level == 1
            )
            if not ok:
                raise DataError(
                    f"level-{self.level} ensemble members must be "
                    f"{'trained models' if self.level == 1 else 'level-1 ensembles'}"
                )

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        votes = np.zeros(len(X), dtype=int)
        for member in self.members:
            if isinstance(member, TrainedModel):
                votes += predict(member, X)
            else:
                votes += member.predict(X)
        return np.where(votes >= 0, 1, -1).astype(int)


def vote(ensemble: VotingEnsemble, x) -> int:
    """Majority vote of the ensemble on one feature vector."""
    x = check_feature_matrix(np.asarray(x, dtype=float).reshape(1, -1))
    return int(ensemble.predict(x)[0])


def build_level1(
    country: str,
    cycle: str,
    data: Dataset,
    registry: list[ClassifierSpec],
    k: int = 5,
    seed: int = 0,
    grids: dict[str, dict[str, list]] | None = None,
    cv_mode: str = "stratified",
) -> tuple[VotingEnsemble, SelectionSet, list[CvReport]]:
    """Select, tune, and ensemble the top three classifiers for one cycle.

    Candidates that fail to cross-validate on this data (for instance a
    single-class fold problem) are excluded from the ranking; at least
    three must survive. Ranking ties keep registry order.
    """
    grids = grids if grids is not None else DEFAULT_GRIDS
    reports: list[CvReport] = []
    scored: list[tuple[str, float, ClassifierSpec]] = []
    for idx, spec in enumerate(registry):
        candidate_id = f"{idx}:{spec.describe()}"
        try:
            report = cross_validate(
                spec, data, k=k, seed=derive_seed(seed, country, cycle), mode=cv_mode
            )
        except DataError:
            continue
        reports.append(report)
        scored.append((candidate_id, report.mean_hit_rate, spec))
    if len(scored) < 3:
        raise DataError(
            f"{country}/{cycle}: only {len(scored)} of {len(registry)} classifiers "
            f"are trainable, need at least 3"
        )
    order = sorted(range(len(scored)), key=lambda i: -scored[i][1])
    ranked = [(scored[i][0], scored[i][1]) for i in order]
    chosen_idx = order[:3]

    members: list[TrainedModel] = []
    for i in chosen_idx:
        _, _, spec = scored[i]
        grid = grids.get(spec.kind)
        if grid:
            _, model, _ = grid_search(
                spec.kind, grid, data, k=k,
                seed=derive_seed(seed, country, cycle, "grid", spec.kind), mode=cv_mode,
            )
        else:
            from .classifiers import train

            model = train(spec, data, derive_seed(seed, country, cycle, "final", spec.kind))
        members.append(model)

    selection = SelectionSet(
        cycle=cycle, ranked=ranked, chosen=[scored[i][0] for i in chosen_idx]
    )
    ensemble = VotingEnsemble(
        level=1,
        members=members,
        provenance=(country, cycle),
        member_hit_rates=[scored[i][1] for i in chosen_idx],
    )
    return ensemble, selection, reports


def select_top_members(
    rated: list[tuple[str, float]], threshold: float
) -> tuple[list[str], list[tuple[str, float]]]:
    """Pick level-2 members from (name, hit rate) pairs.

    Ranked by hit rate (ties keep input order): the top three when all
    three clear the threshold, otherwise the largest odd number of
    qualifiers, otherwise nothing.
    """
    order = sorted(range(len(rated)), key=lambda i: -rated[i][1])
    ranked = [rated[i] for i in order]
    qualifiers = [name for name, rate in ranked if rate > threshold]
    if len(qualifiers) >= 3:
        chosen = [name for name, _ in ranked[:3]]
    elif qualifiers:
        keep = len(qualifiers) if len(qualifiers) % 2 == 1 else len(qualifiers) - 1
        chosen = qualifiers[:keep]
    else:
        chosen = []
    return chosen, ranked


def build_level2(
    cycle: str,
    level1_vcs: list[VotingEnsemble],
    target_data: Dataset,
    threshold: float = 0.75,
) -> tuple[VotingEnsemble | None, SelectionSet]:
    """Combine the best level-1 ensembles for a cycle, quality-gated.

    Each candidate is scored on the whole target-country subset for this
    cycle (no cross-validation). Returns ``(None, selection)`` when no
    candidate clears the threshold.
    """
    if not level1_vcs:
        raise DataError(f"{cycle}: no level-1 ensembles supplied")
    if len(target_data) == 0:
        raise DataError(f"{cycle}: empty target dataset")
    for vc in level1_vcs:
        if vc.provenance[1] != cycle:
            raise DataError(
                f"{cycle}: level-1 ensemble from {vc.provenance} does not match cycle"
            )
    rated = [
        (vc.provenance[0], float(np.mean(vc.predict(target_data.X) == target_data.y)))
        for vc in level1_vcs
    ]
    chosen, ranked = select_top_members(rated, threshold)
    selection = SelectionSet(cycle=cycle, ranked=ranked, chosen=chosen)
    if not chosen:
        return None, selection
    by_country = {vc.provenance[0]: vc for vc in level1_vcs}
    rates = dict(ranked)
    ensemble = VotingEnsemble(
        level=2,
        members=[by_country[name] for name in chosen],
        provenance=("cross-country", cycle),
        member_hit_rates=[rates[name] for name in chosen],
    )
    return ensemble, selection


@dataclass
class CycleOutcome:
    correct: int
    total: int

    @property
    def hit_rate(self) -> float:
        return self.correct / self.total


@dataclass
class AggregateReport:
    """Per-cycle counts plus the micro-averaged overall hit rate."""

    per_cycle: dict[str, CycleOutcome]
    selection_trace: list[SelectionSet] = field(default_factory=list)
    rejected_cycles: list[str] = field(default_factory=list)

    @property
    def overall_hit_rate(self) -> float:
        correct = sum(o.correct for o in self.per_cycle.values())
        total = sum(o.total for o in self.per_cycle.values())
        if total == 0:
            raise DataError("no predictions were evaluated")
        return correct / total

    def to_dict(self) -> dict:
        correct = sum(o.correct for o in self.per_cycle.values())
        total = sum(o.total for o in self.per_cycle.values())
        return {
            "per_cycle": {
                cycle: {
                    "correct": o.correct,
                    "total": o.total,
                    "hit_rate": o.hit_rate,
                }
                for cycle, o in sorted(self.per_cycle.items())
            },
            "overall": {
                "correct": correct,
                "total": total,
                "hit_rate": self.overall_hit_rate,
            },
            "rejected_cycles": list(self.rejected_cycles),
            "selection_trace": [s.to_dict() for s in self.selection_trace],
        }


def evaluate_overall(
    level2_vcs: dict[str, VotingEnsemble], target_datasets: dict[str, Dataset]
) -> AggregateReport:
    """Test each cycle's level-2 ensemble on the matching target subset."""
    per_cycle: dict[str, CycleOutcome] = {}
    for cycle, vc in sorted(level2_vcs.items()):
        data = target_datasets.get(cycle)
        if data is None:
            raise DataError(f"no target dataset for cycle {cycle}")
        correct = int(np.sum(vc.predict(data.X) == data.y))
        per_cycle[cycle] = CycleOutcome(correct=correct, total=len(data))
    return AggregateReport(per_cycle=per_cycle)
