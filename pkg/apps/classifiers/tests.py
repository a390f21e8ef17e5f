import os
import tempfile
from io import StringIO

import numpy as np
from django.core.management import CommandError, call_command
from django.test import SimpleTestCase

from apps.classifiers.bow import (
    CountingModel, DegenerateCorpusError, EmptyInputError, TrainingSettings, accuracy,
    load_model, predict, save_model, train_bow, word_importance,
)
from apps.exceptions import FormatError, IngestionError, ParameterError
from apps.texts.documents import TokenRangeError, tokenize

TOY_CORPUS = [
    ('good good movie', 'positive'),
    ('good fun', 'positive'),
    ('great movie', 'positive'),
    ('bad bad movie', 'negative'),
    ('bad film', 'negative'),
    ('awful film', 'negative'),
]


class TrainingTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.model = train_bow(TOY_CORPUS, TrainingSettings(epochs=300, step_size=0.5))

    def test_separates_the_toy_corpus(self):
        self.assertEqual(self.model.classes, ('negative', 'positive'))
        self.assertEqual(accuracy(self.model, TOY_CORPUS), 1.0)
        self.assertEqual(predict(self.model, tokenize('good movie')).label, 1)
        self.assertEqual(predict(self.model, tokenize('bad movie')).label, 0)

    def test_loss_does_not_increase(self):
        history = self.model.loss_history
        self.assertEqual(len(history), 300)
        for earlier, later in zip(history, history[1:]):
            self.assertLessEqual(later, earlier + 1e-12)

    def test_probabilities_sum_to_one(self):
        distribution = predict(self.model, tokenize('good bad film'))
        self.assertAlmostEqual(sum(distribution.probabilities), 1.0)

    def test_out_of_vocabulary_document_uses_bias_only(self):
        unknown = predict(self.model, tokenize('zebra xylophone'))
        empty = predict(self.model, tokenize(''))
        np.testing.assert_allclose(unknown.probabilities, empty.probabilities)

    def test_repeated_word_keeps_the_label(self):
        once = predict(self.model, tokenize('good'))
        twice = predict(self.model, tokenize('good good'))
        self.assertEqual(once.label, twice.label)
        self.assertGreater(twice[1], once[1])

    def test_token_order_is_ignored(self):
        np.testing.assert_allclose(
            predict(self.model, tokenize('good bad movie')).probabilities,
            predict(self.model, tokenize('movie bad good')).probabilities,
        )

    def test_punctuation_is_not_in_the_vocabulary(self):
        model = train_bow([('good !', 'positive'), ('bad .', 'negative')], TrainingSettings(epochs=5))
        self.assertEqual(set(model.vocabulary), {'bad', 'good'})

    def test_empty_corpus(self):
        with self.assertRaises(EmptyInputError):
            train_bow([])

    def test_single_label_corpus(self):
        with self.assertRaises(DegenerateCorpusError):
            train_bow([('good', 'positive'), ('great', 'positive')])

    def test_invalid_settings(self):
        with self.assertRaises(ParameterError):
            TrainingSettings(epochs=0)
        with self.assertRaises(ParameterError):
            TrainingSettings(step_size=0)


class WordImportanceTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.model = train_bow(TOY_CORPUS, TrainingSettings(epochs=300, step_size=0.5))

    def test_polar_word_supports_the_prediction(self):
        doc = tokenize('good movie')
        self.assertGreater(word_importance(self.model, doc, 0), 0)

    def test_unknown_word_has_no_importance(self):
        doc = tokenize('good zebra')
        self.assertAlmostEqual(word_importance(self.model, doc, 1), 0.0)

    def test_opposing_word_is_negative(self):
        doc = tokenize('good good good bad')
        self.assertLess(word_importance(self.model, doc, 3), 0)

    def test_index_out_of_range(self):
        with self.assertRaises(TokenRangeError):
            word_importance(self.model, tokenize('good movie'), 2)


class CountingModelTests(SimpleTestCase):
    def test_counts_documents_not_batches(self):
        model = CountingModel(train_bow(TOY_CORPUS, TrainingSettings(epochs=5)))
        model.predict_proba([('good',), ('bad',), ('film',)])
        model.predict_proba([('good',)])
        self.assertEqual(model.queries, 4)
        self.assertEqual(model.classes, ('negative', 'positive'))


class ModelFileTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.path = os.path.join(self.tmp.name, 'toy.model')

    def tearDown(self):
        self.tmp.cleanup()

    def write(self, content):
        with open(self.path, 'w', encoding='utf-8') as handle:
            handle.write(content)

    def test_saved_model_predicts_identically(self):
        model = train_bow(TOY_CORPUS, TrainingSettings(epochs=50))
        save_model(model, self.path)
        loaded = load_model(self.path)

        self.assertEqual(loaded.classes, model.classes)
        self.assertEqual(loaded.vocabulary, model.vocabulary)
        batch = [tokenize('good bad film').tokens, tokenize('great').tokens]
        np.testing.assert_array_equal(loaded.predict_proba(batch), model.predict_proba(batch))

    def test_missing_file(self):
        with self.assertRaises(IngestionError):
            load_model(os.path.join(self.tmp.name, 'absent.model'))

    def test_truncated_file(self):
        self.write('negative\tpositive\ngood\tbad\n')
        with self.assertRaises(FormatError):
            load_model(self.path)

    def test_non_numeric_coefficient(self):
        self.write('negative\tpositive\ngood\tbad\n0.1 abc\n0.2 0.3\n0 0\n')
        with self.assertRaises(FormatError) as ctx:
            load_model(self.path)
        self.assertEqual(ctx.exception.line, 3)

    def test_wrong_coefficient_count(self):
        self.write('negative\tpositive\ngood\tbad\n0.1 0.2\n0.3\n0 0\n')
        with self.assertRaises(FormatError) as ctx:
            load_model(self.path)
        self.assertEqual(ctx.exception.line, 4)


class TrainCommandTests(SimpleTestCase):
    def test_trains_and_writes_a_model(self):
        with tempfile.TemporaryDirectory() as tmp:
            out = os.path.join(tmp, 'short.model')
            stdout = StringIO()
            call_command('train', corpus='short', out=out, epochs=20, stdout=stdout)
            self.assertIn('Model written', stdout.getvalue())
            self.assertEqual(load_model(out).classes, ('negative', 'positive'))

    def test_missing_corpus_file_exits_with_two(self):
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(CommandError) as ctx:
                call_command('train', corpus=os.path.join(tmp, 'absent.csv'),
                             out=os.path.join(tmp, 'x.model'), stdout=StringIO())
        self.assertEqual(ctx.exception.returncode, 2)

    def test_missing_argument_exits_with_one(self):
        with self.assertRaises(CommandError) as ctx:
            call_command('train', '--out', 'x.model', stdout=StringIO())
        self.assertEqual(ctx.exception.returncode, 1)

    def test_invalid_hyper_parameter_exits_with_one(self):
        with self.assertRaises(CommandError) as ctx:
            call_command('train', corpus='short', out='x.model', epochs=0, stdout=StringIO())
        self.assertEqual(ctx.exception.returncode, 1)
