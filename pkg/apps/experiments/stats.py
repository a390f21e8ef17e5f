from dataclasses import dataclass
from typing import Optional

from apps.attacks.config import GENETIC, GREEDY
from apps.classifiers.bow import EmptyInputError


@dataclass(frozen=True)
class CellStats:
    runs: int
    successes: int
    success_rate: float
    mean_similarity: Optional[float] = None
    avg_perturbation_rate: Optional[float] = None
    min_perturbations: Optional[int] = None


def aggregate(outcomes):
    """Summarise one cell of attacks.

    Works on anything exposing ``success``, ``final_similarity``, ``perturbation_count``
    and ``base_length``: in-memory outcomes, rows read back from ``runs.csv`` and
    ``AttackRecord`` rows all qualify. The three success-only statistics are ``None``
    when nothing succeeded.
    """
    outcomes = list(outcomes)
    if not outcomes:
        raise EmptyInputError('cannot aggregate an empty cell')
    successes = [o for o in outcomes if o.success]
    if not successes:
        return CellStats(runs=len(outcomes), successes=0, success_rate=0.0)
    return CellStats(
        runs=len(outcomes),
        successes=len(successes),
        success_rate=len(successes) / len(outcomes),
        mean_similarity=sum(o.final_similarity for o in successes) / len(successes),
        avg_perturbation_rate=sum(
            o.perturbation_count / o.base_length for o in successes
        ) / len(successes),
        min_perturbations=min(o.perturbation_count for o in successes),
    )


@dataclass(frozen=True)
class SearchTiming:
    runs: int
    mean_seconds: float
    mean_explain_calls: float


def aggregate_timings(results):
    """Mean wall time and explain calls per attack, keyed by ``(dataset, search)``.

    Rows need ``elapsed`` and ``explain_calls``; cells of every measure and threshold
    are pooled.
    """
    groups = {}
    for key, rows in results:
        groups.setdefault((key.dataset, key.search), []).extend(rows)
    return {
        group: SearchTiming(
            runs=len(rows),
            mean_seconds=sum(r.elapsed for r in rows) / len(rows),
            mean_explain_calls=sum(r.explain_calls for r in rows) / len(rows),
        )
        for group, rows in groups.items() if rows
    }


def time_ratio(timings, dataset):
    """GA over GS mean seconds per attack, or None without both searches"""
    genetic = timings.get((dataset, GENETIC))
    greedy = timings.get((dataset, GREEDY))
    if genetic is None or greedy is None or greedy.mean_seconds <= 0:
        return None
    return genetic.mean_seconds / greedy.mean_seconds
