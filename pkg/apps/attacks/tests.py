import os
import tempfile
from io import StringIO

import numpy as np
from django.core.management import CommandError, call_command
from django.test import SimpleTestCase, override_settings
from rest_framework import status
from rest_framework.test import APISimpleTestCase

from apps.attacks.config import AttackConfig
from apps.attacks.engine import (
    AttackContext, check_constraints, derive_seed, evaluate_candidate, max_perturbations,
)
from apps.attacks.genetic import Chromosome, crossover, genetic_attack, mutate
from apps.attacks.greedy import greedy_attack
from apps.classifiers.bow import TrainingSettings, save_model, train_bow
from apps.embeddings.bundled import build_embeddings
from apps.embeddings.store import EmbeddingStore, save_embeddings
from apps.exceptions import ParameterError
from apps.experiments.runner import select_examples
from apps.explainers.lime import Explanation, ExplainerParams
from apps.texts.corpora import build_corpus
from apps.texts.documents import LineageError, apply_replacement, tokenize


class LinearToyModel:
    """P(high) = 0.2 + 0.6 [alpha present] + 0.2 [beta present]"""
    classes = ('low', 'high')

    def predict_proba(self, batch):
        high = np.array([0.2 + 0.6 * ('alpha' in t) + 0.2 * ('beta' in t) for t in batch])
        return np.column_stack([1 - high, high])


# zeta replaces beta and drops it from the explanation; gamma and delta are interchangeable
TOY_STORE = EmbeddingStore.from_mapping({
    'beta': [1.0, 0.0, 0.0],
    'zeta': [0.8, 0.6, 0.0],
    'gamma': [0.0, -1.0, 0.0],
    'delta': [0.0, -0.9, 0.1],
})

TOY_TEXT = 'alpha beta gamma'


def toy_config(**changes):
    values = {'measure': 'rbo05', 'tau': 0.9, 'explainer': ExplainerParams(n=200, m=2)}
    values.update(changes)
    return AttackConfig(**values)


class ConfigTests(SimpleTestCase):
    def test_parameter_ranges(self):
        for changes in ({'tau': 1.0}, {'epsilon': 0}, {'k': -1}, {'ga_population': 3}, {'measure': 'cosine'}):
            with self.subTest(**changes), self.assertRaises(ParameterError):
                toy_config(**changes)

    def test_from_settings_applies_overrides(self):
        cfg = AttackConfig.from_settings(tau=0.4, k=None)
        self.assertEqual(cfg.tau, 0.4)
        self.assertEqual(cfg.k, 1)


class BudgetAndSeedTests(SimpleTestCase):
    def test_budget_rounds_up_over_content_words(self):
        self.assertEqual(max_perturbations(tokenize('a b c d e f g h i j'), 0.3), 3)
        self.assertEqual(max_perturbations(tokenize('a b c d e f g h i j'), 0.25), 3)
        self.assertEqual(max_perturbations(tokenize('alpha beta gamma !'), 0.3), 1)
        self.assertEqual(max_perturbations(tokenize(
            'i love dogs ! though i wish mine was more helpful while i play tennis . fetching balls . . .'
        ), 0.3), 5)

    def test_derived_seeds_are_stable(self):
        self.assertEqual(derive_seed(0, 'short', 0.5), derive_seed(0, 'short', 0.5))
        self.assertNotEqual(derive_seed(0, 'short', 0.5), derive_seed(1, 'short', 0.5))
        self.assertTrue(0 <= derive_seed('x') < 2 ** 63)


class ConstraintTests(SimpleTestCase):
    def setUp(self):
        self.model = LinearToyModel()
        self.base = tokenize(TOY_TEXT)
        self.e_b = Explanation((('alpha', 0.6), ('beta', 0.2)), target_class=1, seed=0)
        self.cfg = toy_config()

    def test_unchanged_document_passes(self):
        report = check_constraints(self.base, self.base, self.e_b, self.e_b, self.model, TOY_STORE, self.cfg)
        self.assertTrue(report.passed)
        self.assertTrue(report.semantic_ok)
        self.assertAlmostEqual(report.semantic_similarity, 1.0)

    def test_prediction_change_fails(self):
        flipped = apply_replacement(self.base, 0, 'omega')
        report = check_constraints(self.base, flipped, self.e_b, self.e_b, self.model, TOY_STORE, self.cfg)
        self.assertFalse(report.prediction_ok)
        self.assertFalse(report.passed)

    def test_budget_is_enforced(self):
        twice = apply_replacement(apply_replacement(self.base, 1, 'zeta'), 2, 'delta')
        report = check_constraints(self.base, twice, self.e_b, self.e_b, self.model, TOY_STORE, self.cfg)
        self.assertTrue(report.prediction_ok)
        self.assertFalse(report.budget_ok)
        self.assertFalse(report.passed)

    def test_top_features_must_survive(self):
        e_p = Explanation((('beta', 0.3), ('gamma', 0.1)), target_class=1, seed=1)
        report = check_constraints(self.base, self.base, self.e_b, e_p, self.model, TOY_STORE, self.cfg)
        self.assertFalse(report.topk_ok)
        relaxed = check_constraints(
            self.base, self.base, self.e_b, e_p, self.model, TOY_STORE, toy_config(k=0),
        )
        self.assertTrue(relaxed.topk_ok)

    def test_semantic_similarity_only_vetoes_in_strict_mode(self):
        empty_store = EmbeddingStore.from_mapping({'omega': [1.0, 0.0]})
        report = check_constraints(self.base, self.base, self.e_b, self.e_b, self.model, empty_store, self.cfg)
        self.assertIsNone(report.semantic_similarity)
        self.assertFalse(report.semantic_ok)
        self.assertTrue(report.passed)

        strict = check_constraints(
            self.base, self.base, self.e_b, self.e_b, self.model, empty_store,
            toy_config(strict_semantic=True),
        )
        self.assertFalse(strict.passed)
        self.assertEqual(strict.as_dict()['passed'], False)


class AttackContextTests(SimpleTestCase):
    def setUp(self):
        self.context = AttackContext(LinearToyModel(), TOY_STORE, tokenize(TOY_TEXT), toy_config())

    def test_base_explanation_and_protection(self):
        self.assertEqual(self.context.base_explanation.words, ('alpha', 'beta'))
        self.assertEqual(self.context.protected, frozenset({'alpha'}))
        self.assertEqual(self.context.base_evaluation.similarity, 1.0)
        self.assertEqual(self.context.budget, 1)
        self.assertEqual(self.context.perturbable_indices(), [1, 2])

    def test_evaluations_are_cached(self):
        self.assertEqual(self.context.explain_calls, 1)
        candidate = apply_replacement(self.context.base, 2, 'delta')
        first = self.context.evaluate(candidate)
        self.assertEqual(self.context.explain_calls, 2)
        self.assertIs(self.context.evaluate(candidate), first)
        self.context.evaluate(self.context.base)
        self.assertEqual(self.context.explain_calls, 2)

    def test_interchangeable_word_keeps_the_explanation(self):
        candidate = apply_replacement(self.context.base, 2, 'delta')
        self.assertEqual(evaluate_candidate(candidate, self.context).similarity, 1.0)

    def test_dropping_a_feature_lowers_similarity(self):
        # rbo over [alpha, beta] and [alpha, x]: (1 + 0.5 * 1/2) / 1.5
        candidate = apply_replacement(self.context.base, 1, 'zeta')
        self.assertAlmostEqual(self.context.evaluate(candidate).similarity, 1.25 / 1.5)


class GreedyToyTests(SimpleTestCase):
    def test_single_replacement_reaches_tau(self):
        outcome = greedy_attack(LinearToyModel(), TOY_STORE, tokenize(TOY_TEXT), toy_config())
        self.assertTrue(outcome.success)
        self.assertEqual(outcome.perturbation_count, 1)
        self.assertEqual(outcome.final_doc.tokens, ('alpha', 'zeta', 'gamma'))
        self.assertEqual(outcome.surface(), 'alpha **zeta** gamma')
        self.assertAlmostEqual(outcome.final_similarity, 1.25 / 1.5)
        self.assertTrue(outcome.report.passed)
        # gamma has the lowest importance and is tried first
        self.assertEqual(
            [(s.event, s.old, s.detail) for s in outcome.transcript],
            [('reject', 'gamma', 'no similarity decrease'), ('accept', 'beta', '')],
        )

    def test_no_neighbours_leaves_the_document_unchanged(self):
        store = EmbeddingStore.from_mapping({'omega': [1.0, 0.0]})
        outcome = greedy_attack(LinearToyModel(), store, tokenize(TOY_TEXT), toy_config())
        self.assertFalse(outcome.success)
        self.assertEqual(outcome.perturbation_count, 0)
        self.assertEqual(outcome.final_similarity, 1.0)
        self.assertEqual({s.detail for s in outcome.transcript}, {'no valid neighbour'})

    def test_no_perturbable_indices(self):
        outcome = greedy_attack(LinearToyModel(), TOY_STORE, tokenize('the alpha'), toy_config())
        self.assertFalse(outcome.success)
        self.assertEqual(outcome.final_doc, outcome.base_doc)
        self.assertEqual(outcome.transcript[0].detail, 'no perturbable indices')

    def test_strict_semantic_rejects_distant_replacements(self):
        cfg = toy_config(strict_semantic=True, delta=0.99)
        outcome = greedy_attack(LinearToyModel(), TOY_STORE, tokenize(TOY_TEXT), cfg)
        self.assertFalse(outcome.success)
        self.assertEqual(outcome.perturbation_count, 0)

    def test_deterministic(self):
        first = greedy_attack(LinearToyModel(), TOY_STORE, tokenize(TOY_TEXT), toy_config(seed=4))
        second = greedy_attack(LinearToyModel(), TOY_STORE, tokenize(TOY_TEXT), toy_config(seed=4))
        self.assertEqual(first, second)


class GeneticToyTests(SimpleTestCase):
    def test_stops_when_an_initial_mutant_reaches_tau(self):
        outcome = genetic_attack(LinearToyModel(), TOY_STORE, tokenize(TOY_TEXT), toy_config())
        self.assertTrue(outcome.success)
        self.assertEqual(len(outcome.generations), 1)
        self.assertAlmostEqual(outcome.generations[0], 1.25 / 1.5)
        self.assertEqual(outcome.final_doc.tokens, ('alpha', 'zeta', 'gamma'))
        self.assertEqual(outcome.transcript[0].detail, 'population 10')
        self.assertEqual([s.event for s in outcome.transcript], ['generation', 'accept'])

    def test_runs_every_generation_when_tau_is_out_of_reach(self):
        cfg = toy_config(tau=0.5, ga_population=4, ga_generations=5)
        outcome = genetic_attack(LinearToyModel(), TOY_STORE, tokenize(TOY_TEXT), cfg)
        self.assertFalse(outcome.success)
        self.assertEqual(len(outcome.generations), 6)
        generations = [s for s in outcome.transcript if s.event == 'generation']
        self.assertEqual({s.detail for s in generations}, {'population 4'})
        self.assertEqual(outcome.perturbation_count, 1)

    def test_no_perturbable_indices(self):
        outcome = genetic_attack(LinearToyModel(), TOY_STORE, tokenize('the alpha'), toy_config())
        self.assertEqual(outcome.generations, (1.0,))
        self.assertEqual(outcome.transcript[0].detail, 'no perturbable indices')

    def test_deterministic(self):
        cfg = toy_config(tau=0.5, ga_population=4, ga_generations=3, seed=9)
        self.assertEqual(
            genetic_attack(LinearToyModel(), TOY_STORE, tokenize(TOY_TEXT), cfg),
            genetic_attack(LinearToyModel(), TOY_STORE, tokenize(TOY_TEXT), cfg),
        )


class GeneticOperatorTests(SimpleTestCase):
    def setUp(self):
        self.context = AttackContext(LinearToyModel(), TOY_STORE, tokenize(TOY_TEXT), toy_config())
        self.base = Chromosome.evaluated(self.context.base, self.context)
        self.rng = np.random.default_rng(0)

    def test_mutation_improves_on_the_parent(self):
        child = mutate(self.base, self.context, self.rng)
        self.assertLess(child.similarity, self.base.similarity)
        self.assertEqual(child.doc.tokens, ('alpha', 'zeta', 'gamma'))
        self.assertEqual(child.history, ((1, child.similarity),))

    def test_mutation_returns_the_parent_when_the_budget_is_spent(self):
        child = mutate(self.base, self.context, self.rng)
        self.assertIs(mutate(child, self.context, self.rng), child)

    def test_crossover_of_identical_parents(self):
        child = mutate(self.base, self.context, self.rng)
        offspring = crossover(child, child, self.context, self.rng)
        self.assertEqual(offspring.doc.tokens, child.doc.tokens)
        self.assertEqual(offspring.doc.replaced, child.doc.replaced)

    def test_crossover_rejects_mismatched_lineage(self):
        other = Chromosome(tokenize('alpha beta'), None, 1.0, None)
        with self.assertRaises(LineageError):
            crossover(self.base, other, self.context, self.rng)


class CorpusAttackTests(SimpleTestCase):
    """Attacks on bundled short documents with the trained classifier"""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.model = train_bow(build_corpus('short'), TrainingSettings(epochs=200))
        cls.store = build_embeddings()
        cls.documents = select_examples(build_corpus('short'), 3)

    def config(self, **changes):
        values = {'measure': 'kendall', 'tau': 0.1, 'explainer': ExplainerParams(n=100)}
        values.update(changes)
        return AttackConfig(**values)

    def test_greedy_accepts_the_best_valid_neighbour(self):
        cfg = self.config()
        for doc in self.documents:
            outcome = greedy_attack(self.model, self.store, doc, cfg)
            context = AttackContext(self.model, self.store, doc, cfg)
            current, previous = doc, 1.0
            for record in outcome.perturbations:
                valid = [
                    evaluation.similarity
                    for evaluation in (
                        context.evaluate(apply_replacement(current, record.index, word))
                        for word, _ in context.neighbors(record.old)
                    )
                    if evaluation.report.passed
                ]
                self.assertEqual(min(valid), record.similarity_after)
                self.assertLess(record.similarity_after, previous)
                previous = record.similarity_after
                current = apply_replacement(current, record.index, record.new)
            self.assertEqual(current, outcome.final_doc)
            self.assertLessEqual(outcome.perturbation_count, context.budget)

    def test_genetic_best_similarity_never_increases(self):
        cfg = self.config(ga_population=4, ga_generations=3)
        for doc in self.documents:
            outcome = genetic_attack(self.model, self.store, doc, cfg)
            history = outcome.generations
            for earlier, later in zip(history, history[1:]):
                self.assertLessEqual(later, earlier)
            generations = [s for s in outcome.transcript if s.event == 'generation']
            self.assertEqual(len(history), max(1, len(generations)))
            self.assertTrue(all(s.detail == 'population 4' for s in generations))
            self.assertEqual(outcome.final_similarity, history[-1])

    def test_successful_outcomes_satisfy_the_constraints(self):
        cfg = self.config(measure='rbo05', tau=0.6)
        for doc in self.documents:
            for search in (greedy_attack, genetic_attack):
                outcome = search(self.model, self.store, doc, cfg.evolve(ga_population=4, ga_generations=2))
                if outcome.success:
                    self.assertLessEqual(outcome.final_similarity, cfg.tau)
                    self.assertTrue(outcome.report.passed)
                    self.assertLessEqual(outcome.perturbation_count, max_perturbations(doc, cfg.epsilon))
                    self.assertTrue(set(outcome.base_explanation.top(cfg.k)) <= set(outcome.final_explanation.words))


class AttackCommandTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.tmp = tempfile.TemporaryDirectory()
        cls.model_path = os.path.join(cls.tmp.name, 'short.model')
        cls.embeddings_path = os.path.join(cls.tmp.name, 'embeddings.txt')
        save_model(train_bow(build_corpus('short'), TrainingSettings(epochs=100)), cls.model_path)
        save_embeddings(build_embeddings(), cls.embeddings_path)
        cls.text = build_corpus('short')[0][0]

    @classmethod
    def tearDownClass(cls):
        cls.tmp.cleanup()
        super().tearDownClass()

    def test_prints_both_explanations(self):
        stdout = StringIO()
        call_command(
            'attack', model=self.model_path, embeddings=self.embeddings_path, text=self.text,
            search='ga', population=2, generations=1, samples=100, stdout=stdout,
        )
        output = stdout.getvalue()
        self.assertIn('Original', output)
        self.assertIn('Perturbed:', output)
        self.assertIn('Similarity (rbo05)', output)

    def test_unknown_measure_exits_with_one(self):
        with self.assertRaises(CommandError) as ctx:
            call_command('attack', text=self.text, measure='cosine', stdout=StringIO())
        self.assertEqual(ctx.exception.returncode, 1)

    def test_unknown_search_exits_with_one(self):
        with self.assertRaises(CommandError) as ctx:
            call_command('attack', text=self.text, search='beam', stdout=StringIO())
        self.assertEqual(ctx.exception.returncode, 1)

    def test_missing_embeddings_exit_with_two(self):
        with self.assertRaises(CommandError) as ctx:
            call_command('attack', model=self.model_path, embeddings=os.path.join(self.tmp.name, 'absent.txt'),
                         text=self.text, stdout=StringIO())
        self.assertEqual(ctx.exception.returncode, 2)


class AttackAPITests(APISimpleTestCase):
    url = '/api/v1/attack/'

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.tmp = tempfile.TemporaryDirectory()
        cls.model_path = os.path.join(cls.tmp.name, 'short.model')
        cls.embeddings_path = os.path.join(cls.tmp.name, 'embeddings.txt')
        save_model(train_bow(build_corpus('short'), TrainingSettings(epochs=100)), cls.model_path)
        save_embeddings(build_embeddings(), cls.embeddings_path)
        cls.text = build_corpus('short')[0][0]

    @classmethod
    def tearDownClass(cls):
        cls.tmp.cleanup()
        super().tearDownClass()

    def configured(self, **paths):
        values = {
            'STABILITY_MODEL_PATH': self.model_path,
            'STABILITY_EMBEDDINGS_PATH': self.embeddings_path,
            'EXPLAINER_DEFAULTS': {'n': 100, 'mask_rate': 0.3, 'm': 10, 'kernel_width': 0.25},
        }
        values.update(paths)
        return override_settings(**values)

    def test_attacks_posted_text(self):
        with self.configured():
            response = self.client.post(
                self.url,
                {'text': self.text, 'search': 'ga', 'population': 2, 'generations': 1, 'tau': 0.5},
                format='json',
            )
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(response.data['search'], 'genetic')
        self.assertEqual(response.data['original_text'], tokenize(self.text).text)
        self.assertIn('passed', response.data['constraints'])
        self.assertEqual(response.data['perturbation_count'], len(response.data['perturbations']))
        self.assertTrue(response.data['original_explanation'])

    def test_invalid_population_is_rejected(self):
        with self.configured():
            response = self.client.post(self.url, {'text': self.text, 'population': 3}, format='json')
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)

    def test_unknown_measure_is_rejected(self):
        with self.configured():
            response = self.client.post(self.url, {'text': self.text, 'measure': 'cosine'}, format='json')
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertIn('measure', response.data)

    def test_missing_embeddings_is_unavailable(self):
        with self.configured(STABILITY_EMBEDDINGS_PATH=os.path.join(self.tmp.name, 'absent.txt')):
            response = self.client.post(self.url, {'text': self.text}, format='json')
        self.assertEqual(response.status_code, status.HTTP_503_SERVICE_UNAVAILABLE)
