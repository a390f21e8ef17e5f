"""Similarity measures between ranked explanations.

Every measure maps two ranked lists to [0, 1] with 1 for identical lists. Lists may
rank different items: Kendall and footrule work over the union of both lists and give
items missing from a list the sentinel rank ``len(union) + 1``. Weighted variants use
exact rational arithmetic so they reduce bit-for-bit to the unweighted forms when all
weights agree.
"""
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, partial
from itertools import combinations

import numpy as np
from scipy.optimize import linear_sum_assignment

from apps.exceptions import ParameterError, StabilityError


class EmptyExplanationError(StabilityError, ValueError):
    pass


@dataclass(frozen=True)
class RankedList:
    items: tuple
    weights: tuple

    def __post_init__(self):
        if len(set(self.items)) != len(self.items):
            raise ValueError('ranked list items must be distinct')
        if len(self.weights) != len(self.items):
            raise ValueError('one weight per item is required')
        if any(w < 0 for w in self.weights):
            raise ValueError('ranked list weights must be non-negative')

    @classmethod
    def of(cls, items, weights=None):
        items = tuple(items)
        if weights is None:
            weights = [1.0] * len(items)
        total = sum(weights)
        if total > 0:
            weights = [w / total for w in weights]
        return cls(items, tuple(float(w) for w in weights))

    @classmethod
    def from_explanation(cls, explanation):
        return cls.of(
            [word for word, _ in explanation.features],
            [abs(weight) for _, weight in explanation.features],
        )

    def __len__(self):
        return len(self.items)

    def rank(self, item, sentinel):
        try:
            return self.items.index(item) + 1
        except ValueError:
            return sentinel

    def weight(self, item):
        try:
            return Fraction(self.weights[self.items.index(item)])
        except ValueError:
            return Fraction(0)


def _require(a, b):
    if not len(a) or not len(b):
        raise EmptyExplanationError('cannot compare an empty explanation')


def _union(a, b):
    return list(a.items) + [item for item in b.items if item not in a.items]


def _mean_weights(a, b, union):
    return {item: (a.weight(item) + b.weight(item)) / 2 for item in union}


def jaccard(a, b, weighted=False):
    _require(a, b)
    union = _union(a, b)
    if weighted:
        low = sum(min(a.weight(f), b.weight(f)) for f in union)
        high = sum(max(a.weight(f), b.weight(f)) for f in union)
        if high > 0:
            return float(low / high)
    shared = len(set(a.items) & set(b.items))
    return shared / len(union)


def rbo(a, b, p):
    """Rank-biased overlap truncated at the longer list and renormalised"""
    _require(a, b)
    if not 0 < p < 1:
        raise ParameterError(f'rbo persistence p must lie in (0, 1), got {p}')
    depth = max(len(a), len(b))
    score = norm = 0.0
    seen_a, seen_b = set(), set()
    overlap = 0
    for d in range(1, depth + 1):
        if d <= len(a):
            item = a.items[d - 1]
            overlap += item in seen_b
            seen_a.add(item)
        if d <= len(b):
            item = b.items[d - 1]
            overlap += item in seen_a
            seen_b.add(item)
        weight = p ** (d - 1)
        score += weight * (overlap / d)
        norm += weight
    return score / norm


def _sign(x):
    return (x > 0) - (x < 0)


def kendall(a, b, weighted=False):
    _require(a, b)
    union = sorted(_union(a, b))
    sentinel = len(union) + 1
    if len(union) < 2:
        return 1.0
    rank_a = {f: a.rank(f, sentinel) for f in union}
    rank_b = {f: b.rank(f, sentinel) for f in union}
    discordant = [
        _sign(rank_a[f] - rank_a[g]) * _sign(rank_b[f] - rank_b[g]) < 0
        for f, g in combinations(union, 2)
    ]
    if weighted:
        w = _mean_weights(a, b, union)
        penalties = [(w[f] + w[g]) / 2 for f, g in combinations(union, 2)]
        total = sum(penalties)
        if total > 0:
            broken = sum(pen for pen, bad in zip(penalties, discordant) if bad)
            return 1.0 - float(broken / total)
    pairs = len(discordant)
    return 1.0 - sum(discordant) / pairs


@lru_cache(maxsize=None)
def footrule_maximum(len_a, len_b, union):
    """Largest footrule distance between lists of these lengths covering ``union`` items.

    List ``a`` is fixed to ranks 1..len_a (relabelling is free). For every choice of
    which ``a`` items ``b`` shares, the best arrangement of ``b`` is an assignment of
    items to positions, solved exactly.
    """
    if len_a > len_b:
        len_a, len_b = len_b, len_a
    sentinel = union + 1
    shared = len_a + len_b - union
    only_b = len_b - shared
    best = 0
    for kept in combinations(range(1, len_a + 1), shared):
        dropped = sum(sentinel - r for r in range(1, len_a + 1) if r not in kept)
        origins = list(kept) + [sentinel] * only_b
        positions = np.arange(1, len_b + 1)
        cost = np.abs(np.array(origins)[:, None] - positions[None, :])
        rows, cols = linear_sum_assignment(cost, maximize=True)
        best = max(best, dropped + int(cost[rows, cols].sum()))
    return best


def spearman(a, b, weighted=False):
    _require(a, b)
    union = sorted(_union(a, b))
    sentinel = len(union) + 1
    displacement = {f: abs(a.rank(f, sentinel) - b.rank(f, sentinel)) for f in union}
    maximum = footrule_maximum(len(a), len(b), len(union))
    if maximum == 0:
        return 1.0
    if weighted:
        w = _mean_weights(a, b, union)
        mean_weight = sum(w.values()) / len(union)
        if mean_weight > 0:
            distance = sum(w[f] * displacement[f] for f in union)
            similarity = 1.0 - float(distance / (mean_weight * maximum))
            return min(1.0, max(0.0, similarity))
    similarity = 1.0 - sum(displacement.values()) / maximum
    return min(1.0, max(0.0, similarity))


MEASURES = {
    'rbo05': partial(rbo, p=0.5),
    'rbo07': partial(rbo, p=0.7),
    'rbo09': partial(rbo, p=0.9),
    'jaccard': partial(jaccard, weighted=False),
    'jaccard_w': partial(jaccard, weighted=True),
    'kendall': partial(kendall, weighted=False),
    'kendall_w': partial(kendall, weighted=True),
    'spearman': partial(spearman, weighted=False),
    'spearman_w': partial(spearman, weighted=True),
}

MEASURE_LABELS = {
    'rbo05': 'RBO0.5', 'rbo07': 'RBO0.7', 'rbo09': 'RBO0.9',
    'jaccard': 'Jaccard', 'jaccard_w': 'Jaccard_w',
    'kendall': 'Kendall', 'kendall_w': 'Kendall_w',
    'spearman': 'Spearman', 'spearman_w': 'Spearman_w',
}


def get_measure(name):
    try:
        return MEASURES[name]
    except KeyError:
        raise ParameterError(
            f'unknown similarity measure {name!r}; choose from {", ".join(MEASURES)}'
        ) from None


def explanation_similarity(name, e_a, e_b):
    return get_measure(name)(e_a.ranked_list(), e_b.ranked_list())
