from itertools import combinations, permutations

import numpy as np
from django.test import SimpleTestCase

from apps.exceptions import ParameterError
from apps.explainers.lime import Explanation
from apps.similarity.measures import (
    MEASURES, EmptyExplanationError, RankedList, explanation_similarity, footrule_maximum,
    get_measure, jaccard, kendall, rbo, spearman,
)

VOCABULARY = [
    'dog', 'cat', 'ball', 'park', 'good', 'bad', 'love', 'hate', 'walk', 'today', 'my', 'the',
]


def ranked(*items):
    return RankedList.of(items)


def random_list(rng):
    size = int(rng.integers(1, 11))
    items = rng.choice(VOCABULARY, size=size, replace=False)
    return RankedList.of([str(i) for i in items], list(rng.random(size)))


class MeasureExampleTests(SimpleTestCase):
    def test_jaccard(self):
        self.assertEqual(jaccard(ranked('a', 'b', 'c'), ranked('b', 'c', 'd')), 0.5)

    def test_weighted_jaccard(self):
        a = RankedList.of(['a', 'b'], [0.75, 0.25])
        b = RankedList.of(['a', 'c'], [0.75, 0.25])
        self.assertEqual(jaccard(a, b, weighted=True), 0.6)
        self.assertEqual(jaccard(a, a, weighted=True), 1.0)

    def test_rbo(self):
        self.assertEqual(rbo(ranked('a', 'b'), ranked('b', 'a'), p=0.5), 1 / 3)
        self.assertEqual(rbo(ranked('a', 'b', 'c'), ranked('a', 'b', 'c'), p=0.9), 1.0)
        self.assertEqual(rbo(ranked('a', 'b'), ranked('c', 'd'), p=0.7), 0.0)

    def test_rbo_penalises_disagreement_at_the_top_more(self):
        base = ranked('a', 'b', 'c', 'd')
        for p in (0.5, 0.7, 0.9):
            deep = rbo(base, ranked('a', 'b', 'd', 'c'), p)
            shallow = rbo(base, ranked('b', 'a', 'c', 'd'), p)
            self.assertGreater(deep, shallow)

    def test_appending_a_shared_item_can_lower_rbo(self):
        # the new depth agrees on 2 of 3 items, below the running average of [a, b] vs [a, c]
        before = rbo(ranked('a', 'b'), ranked('a', 'c'), p=0.5)
        after = rbo(ranked('a', 'b', 'x'), ranked('a', 'c', 'x'), p=0.5)
        self.assertAlmostEqual(before, 1.25 / 1.5)
        self.assertAlmostEqual(after, (1.25 + 0.25 * 2 / 3) / 1.75)
        for p in (0.5, 0.7, 0.9):
            with self.subTest(p=p):
                self.assertLess(
                    rbo(ranked('a', 'b', 'x'), ranked('a', 'c', 'x'), p),
                    rbo(ranked('a', 'b'), ranked('a', 'c'), p),
                )

    def test_disjoint_lists_gain_from_a_shared_item(self):
        for p in (0.5, 0.7, 0.9):
            with self.subTest(p=p):
                self.assertEqual(rbo(ranked('a', 'b'), ranked('c', 'd'), p), 0.0)
                self.assertGreater(rbo(ranked('a', 'b', 'x'), ranked('c', 'd', 'x'), p), 0.0)

    def test_rbo_persistence_range(self):
        with self.assertRaises(ParameterError):
            rbo(ranked('a'), ranked('a'), p=1.0)
        with self.assertRaises(ParameterError):
            rbo(ranked('a'), ranked('a'), p=0)

    def test_kendall(self):
        self.assertEqual(kendall(ranked('a', 'b', 'c'), ranked('c', 'b', 'a')), 0.0)
        self.assertAlmostEqual(kendall(ranked('a', 'b', 'c'), ranked('a', 'c', 'b')), 2 / 3)

    def test_kendall_absent_items_take_the_sentinel_rank(self):
        # only (b, c) is discordant; b and c are each missing from one list
        self.assertAlmostEqual(kendall(ranked('a', 'b'), ranked('a', 'c')), 2 / 3)
        self.assertEqual(kendall(ranked('a'), ranked('a')), 1.0)

    def test_spearman(self):
        self.assertEqual(spearman(ranked('a', 'b', 'c'), ranked('c', 'b', 'a')), 0.0)
        self.assertEqual(spearman(ranked('a', 'b', 'c'), ranked('b', 'a', 'c')), 0.5)

    def test_spearman_partial_lists(self):
        self.assertEqual(footrule_maximum(2, 2, 3), 6)
        self.assertAlmostEqual(spearman(ranked('a', 'b'), ranked('a', 'c')), 1 / 3)

    def test_empty_list(self):
        for name, measure in MEASURES.items():
            with self.subTest(measure=name), self.assertRaises(EmptyExplanationError):
                measure(ranked(), ranked('a'))

    def test_unknown_measure(self):
        with self.assertRaises(ParameterError):
            get_measure('cosine')

    def test_ranked_list_normalises_weights(self):
        lst = RankedList.of(['a', 'b'], [3.0, 1.0])
        self.assertEqual(lst.weights, (0.75, 0.25))
        with self.assertRaises(ValueError):
            RankedList.of(['a', 'a'])

    def test_explanation_similarity_uses_absolute_weights(self):
        a = Explanation(features=(('good', 0.6), ('dog', -0.2)), target_class=1, seed=0)
        b = Explanation(features=(('good', -0.6), ('dog', 0.2)), target_class=1, seed=0)
        for name in MEASURES:
            with self.subTest(measure=name):
                self.assertEqual(explanation_similarity(name, a, b), 1.0)


class MeasureOracleTests(SimpleTestCase):
    """Permutations of up to six shared items against direct counting."""

    @staticmethod
    def pairs(n):
        items = [chr(ord('a') + i) for i in range(n)]
        lists = list(permutations(items))
        if n <= 5:
            return [(a, b) for a in lists for b in lists]
        return [(tuple(items), b) for b in lists]

    def test_kendall_counts_discordant_pairs(self):
        for n in range(2, 7):
            for a, b in self.pairs(n):
                discordant = sum(
                    (a.index(f) - a.index(g)) * (b.index(f) - b.index(g)) < 0
                    for f, g in combinations(a, 2)
                )
                expected = 1.0 - discordant / (n * (n - 1) // 2)
                self.assertEqual(kendall(ranked(*a), ranked(*b)), expected)

    def test_footrule_maximum_matches_brute_force(self):
        for n in range(1, 7):
            items = tuple(range(n))
            brute = max(sum(abs(i - p.index(x)) for i, x in enumerate(items)) for p in permutations(items))
            self.assertEqual(brute, n * n // 2)
            self.assertEqual(footrule_maximum(n, n, n), brute)

    def test_footrule_maximum_for_partial_lists(self):
        for len_a in range(1, 4):
            for len_b in range(1, 4):
                a = tuple(range(len_a))
                best = {}
                for b in permutations(range(len_a + len_b), len_b):
                    union = set(a) | set(b)
                    sentinel = len(union) + 1

                    def rank(lst, item):
                        return lst.index(item) + 1 if item in lst else sentinel

                    distance = sum(abs(rank(a, f) - rank(b, f)) for f in union)
                    best[len(union)] = max(best.get(len(union), 0), distance)
                for union, distance in best.items():
                    self.assertEqual(footrule_maximum(len_a, len_b, union), distance)

    def test_spearman_matches_rank_displacement(self):
        for n in range(2, 7):
            maximum = n * n // 2
            for a, b in self.pairs(n):
                displacement = sum(abs(a.index(f) - b.index(f)) for f in a)
                self.assertEqual(spearman(ranked(*a), ranked(*b)), 1.0 - displacement / maximum)

    def test_jaccard_matches_set_arithmetic(self):
        rng = np.random.default_rng(5)
        for _ in range(500):
            a, b = random_list(rng), random_list(rng)
            expected = len(set(a.items) & set(b.items)) / len(set(a.items) | set(b.items))
            self.assertEqual(jaccard(a, b), expected)

    def test_rbo_matches_the_series(self):
        rng = np.random.default_rng(6)
        for _ in range(500):
            a, b = random_list(rng), random_list(rng)
            depth = max(len(a), len(b))
            for p in (0.5, 0.7, 0.9):
                terms = [
                    p ** (d - 1) * len(set(a.items[:d]) & set(b.items[:d])) / d
                    for d in range(1, depth + 1)
                ]
                norm = sum(p ** (d - 1) for d in range(1, depth + 1))
                self.assertAlmostEqual(rbo(a, b, p), sum(terms) / norm, places=12)


class MeasureAxiomTests(SimpleTestCase):
    trials = 10_000

    def test_shared_item_moves_rbo_towards_the_new_agreement(self):
        rng = np.random.default_rng(29)
        for _ in range(2_000):
            depth = int(rng.integers(1, 6))
            a = [str(w) for w in rng.choice(VOCABULARY, size=depth, replace=False)]
            b = [str(w) for w in rng.choice(VOCABULARY, size=depth, replace=False)]
            p = float(rng.choice([0.5, 0.7, 0.9]))
            before = rbo(ranked(*a), ranked(*b), p)
            after = rbo(ranked(*a, 'zebra'), ranked(*b, 'zebra'), p)
            agreement = (len(set(a) & set(b)) + 1) / (depth + 1)
            if agreement > before + 1e-9:
                self.assertGreater(after, before)
            elif agreement < before - 1e-9:
                self.assertLess(after, before)
            else:
                self.assertAlmostEqual(after, before, places=9)

    def test_identity_symmetry_and_range(self):
        for name, measure in MEASURES.items():
            rng = np.random.default_rng(17)
            violations = []
            for trial in range(self.trials):
                a, b = random_list(rng), random_list(rng)
                ab, ba = measure(a, b), measure(b, a)
                if measure(a, a) != 1.0 or ab != ba or not 0.0 <= ab <= 1.0:
                    violations.append((trial, a, b, ab, ba))
            with self.subTest(measure=name):
                self.assertEqual(violations, [])

    def test_weighted_variants_reduce_to_unweighted(self):
        rng = np.random.default_rng(23)
        for _ in range(2_000):
            size = int(rng.integers(1, 11))
            a = [str(w) for w in rng.choice(VOCABULARY, size=size, replace=False)]
            b = [str(w) for w in rng.choice(VOCABULARY, size=size, replace=False)]
            shuffled = [str(w) for w in rng.permutation(a)]

            # equal-length lists carry identical uniform weights
            self.assertEqual(jaccard(ranked(*a), ranked(*b), weighted=True), jaccard(ranked(*a), ranked(*b)))
            # conjoint lists give every pair the same penalty
            self.assertEqual(
                kendall(ranked(*a), ranked(*shuffled), weighted=True), kendall(ranked(*a), ranked(*shuffled)),
            )
            self.assertEqual(
                spearman(ranked(*a), ranked(*shuffled), weighted=True), spearman(ranked(*a), ranked(*shuffled)),
            )
