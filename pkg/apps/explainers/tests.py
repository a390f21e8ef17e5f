import os
import tempfile
from io import StringIO

import numpy as np
from django.core.management import CommandError, call_command
from django.test import SimpleTestCase, override_settings
from rest_framework import status
from rest_framework.test import APISimpleTestCase

from apps.classifiers.bow import TrainingSettings, save_model, train_bow
from apps.exceptions import ParameterError
from apps.experiments.runner import select_examples
from apps.explainers.lime import (
    DegenerateDocumentError, ExplainerParams, distinct_words, explain, sample_masked,
)
from apps.texts.corpora import build_corpus
from apps.texts.documents import tokenize


class LinearToyModel:
    """P(high) = 0.2 + 0.6 [alpha present] + 0.2 [beta present]"""
    classes = ('low', 'high')

    def predict_proba(self, batch):
        high = np.array([0.2 + 0.6 * ('alpha' in t) + 0.2 * ('beta' in t) for t in batch])
        return np.column_stack([1 - high, high])


def short_model():
    return train_bow(build_corpus('short'), TrainingSettings(epochs=500))


class SampleMaskedTests(SimpleTestCase):
    def setUp(self):
        self.doc = tokenize('a b a c !')
        self.params = ExplainerParams(n=50)

    def test_first_sample_is_the_document(self):
        samples = sample_masked(self.doc, self.params, np.random.default_rng(0))
        self.assertEqual(len(samples), 50)
        mask, tokens = samples[0]
        self.assertEqual(list(mask), [1, 1, 1])
        self.assertEqual(tokens, self.doc.tokens)

    def test_masking_removes_every_occurrence(self):
        words = distinct_words(self.doc)
        self.assertEqual(words, ['a', 'b', 'c'])
        for mask, tokens in sample_masked(self.doc, self.params, np.random.default_rng(1)):
            for word, present in zip(words, mask):
                self.assertEqual(word in tokens, bool(present))
            self.assertIn('!', tokens)

    def test_same_rng_state_same_samples(self):
        first = sample_masked(self.doc, self.params, np.random.default_rng(7))
        second = sample_masked(self.doc, self.params, np.random.default_rng(7))
        self.assertEqual([t for _, t in first], [t for _, t in second])

    def test_single_word_document_is_degenerate(self):
        with self.assertRaises(DegenerateDocumentError):
            sample_masked(tokenize('dog dog !'), self.params, np.random.default_rng(0))

    def test_parameter_ranges(self):
        with self.assertRaises(ParameterError):
            ExplainerParams(n=5)
        with self.assertRaises(ParameterError):
            ExplainerParams(mask_rate=1.0)
        with self.assertRaises(ParameterError):
            ExplainerParams(m=0)


class ExplainTests(SimpleTestCase):
    def test_recovers_the_linear_toy_model(self):
        explanation = explain(LinearToyModel(), tokenize('gamma beta alpha'), ExplainerParams(), seed=3)
        self.assertEqual(explanation.target_class, 1)
        self.assertEqual(explanation.words, ('alpha', 'beta', 'gamma'))
        weights = dict(explanation.features)
        self.assertAlmostEqual(weights['alpha'], 0.6, delta=0.05)
        self.assertAlmostEqual(weights['beta'], 0.2, delta=0.05)
        self.assertAlmostEqual(weights['gamma'], 0.0, delta=0.05)

    def test_same_seed_same_explanation(self):
        model = LinearToyModel()
        doc = tokenize('alpha delta beta epsilon gamma')
        self.assertEqual(
            explain(model, doc, ExplainerParams(), seed=11),
            explain(model, doc, ExplainerParams(), seed=11),
        )

    def test_weights_are_ordered_by_magnitude(self):
        model = short_model()
        for doc in select_examples(build_corpus('short'), 10):
            explanation = explain(model, doc, ExplainerParams(), seed=0)
            magnitudes = [abs(w) for _, w in explanation.features]
            self.assertEqual(magnitudes, sorted(magnitudes, reverse=True))
            self.assertEqual(len(set(explanation.words)), len(explanation))

    def test_truncates_to_m_features(self):
        doc = tokenize('alpha beta gamma delta epsilon zeta')
        explanation = explain(LinearToyModel(), doc, ExplainerParams(m=2), seed=0)
        self.assertEqual(explanation.top(5), ('alpha', 'beta'))

    def test_top_feature_matches_leave_one_out(self):
        model = short_model()
        params = ExplainerParams(n=1000)
        documents = select_examples(build_corpus('short'), 20)
        agreements = 0
        for doc in documents:
            explanation = explain(model, doc, params, seed=0)
            target = explanation.target_class
            full = model.predict_proba([doc.tokens])[0, target]

            def change(word):
                reduced = [t for t in doc.tokens if t != word]
                return abs(full - model.predict_proba([reduced])[0, target])

            strongest = max(distinct_words(doc), key=change)
            agreements += explanation.words[0] == strongest
        self.assertGreaterEqual(agreements, 18)


class ExplainCommandTests(SimpleTestCase):
    def test_prints_the_ranked_features(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'short.model')
            save_model(train_bow(build_corpus('short'), TrainingSettings(epochs=50)), path)
            stdout = StringIO()
            call_command('explain', model=path, text='the dog was really good .', samples=200,
                         stdout=stdout)
        output = stdout.getvalue()
        self.assertIn('Prediction: positive', output)
        self.assertIn('rank', output)
        self.assertIn('good', output)

    def test_missing_model_exits_with_two(self):
        with self.assertRaises(CommandError) as ctx:
            call_command('explain', model='/nonexistent/x.model', text='good dog', stdout=StringIO())
        self.assertEqual(ctx.exception.returncode, 2)


class ExplainAPITests(APISimpleTestCase):
    url = '/api/v1/explain/'

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.tmp = tempfile.TemporaryDirectory()
        cls.model_path = os.path.join(cls.tmp.name, 'short.model')
        save_model(train_bow(build_corpus('short'), TrainingSettings(epochs=50)), cls.model_path)

    @classmethod
    def tearDownClass(cls):
        cls.tmp.cleanup()
        super().tearDownClass()

    def test_explains_posted_text(self):
        with override_settings(STABILITY_MODEL_PATH=self.model_path):
            response = self.client.post(
                self.url, {'text': 'the dog was really good .', 'samples': 200, 'features': 3},
                format='json',
            )
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(response.data['label'], 'positive')
        self.assertEqual(len(response.data['features']), 3)
        self.assertEqual(response.data['seed'], 0)
        self.assertAlmostEqual(sum(response.data['probabilities'].values()), 1.0)

    def test_degenerate_text_is_rejected(self):
        with override_settings(STABILITY_MODEL_PATH=self.model_path):
            response = self.client.post(self.url, {'text': 'dog dog'}, format='json')
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertIn('error', response.data)

    def test_invalid_parameters_are_rejected(self):
        with override_settings(STABILITY_MODEL_PATH=self.model_path):
            response = self.client.post(self.url, {'text': 'good dog', 'mask_rate': 1.5}, format='json')
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertIn('mask_rate', response.data)

    def test_missing_model_is_unavailable(self):
        with override_settings(STABILITY_MODEL_PATH=os.path.join(self.tmp.name, 'absent.model')):
            response = self.client.post(self.url, {'text': 'good dog'}, format='json')
        self.assertEqual(response.status_code, status.HTTP_503_SERVICE_UNAVAILABLE)

    def test_get_is_not_allowed(self):
        response = self.client.get(self.url)
        self.assertIn(response.status_code, (status.HTTP_404_NOT_FOUND, status.HTTP_405_METHOD_NOT_ALLOWED))
