import os
import tempfile
from io import StringIO

from django.core.management import call_command
from django.test import SimpleTestCase, override_settings

from apps.exceptions import FormatError, IngestionError
from apps.texts.corpora import (
    NEGATIVE, POSITIVE, build_corpus, load_dataset, read_corpus, write_corpus,
)
from apps.texts.documents import (
    DoublePerturbationError, LineageError, NoOpReplacementError, TokenRangeError,
    apply_replacement, content_indices, derive, is_punctuation, perturbation_count, tokenize,
)

DOG_TEXT = 'i love dogs ! though i wish mine was more helpful while i play tennis . fetching balls . . .'


class TokenizeTests(SimpleTestCase):
    def test_splits_standalone_punctuation(self):
        self.assertEqual(tokenize('i love dogs !').tokens, ('i', 'love', 'dogs', '!'))

    def test_empty_text(self):
        doc = tokenize('')
        self.assertEqual(doc.tokens, ())
        self.assertEqual(doc.text, '')

    def test_lowercases_and_detaches_attached_punctuation(self):
        self.assertEqual(tokenize('Hello, world').tokens, ('hello', ',', 'world'))

    def test_leading_and_trailing_marks(self):
        self.assertEqual(tokenize('"Great!"').tokens, ('"', 'great', '!', '"'))

    def test_punctuation_detection(self):
        self.assertTrue(is_punctuation('...'))
        self.assertTrue(is_punctuation('$'))
        self.assertFalse(is_punctuation('dogs'))
        self.assertFalse(is_punctuation(''))

    def test_content_indices_skip_punctuation(self):
        self.assertEqual(content_indices(tokenize('i love dogs !')), [0, 1, 2])


class ReplacementTests(SimpleTestCase):
    def setUp(self):
        self.doc = tokenize(DOG_TEXT)

    def test_replacement_changes_one_token(self):
        perturbed = apply_replacement(self.doc, 13, 'toy')
        self.assertIn('while i toy tennis', perturbed.text)
        self.assertEqual(self.doc.tokens[13], 'play')
        self.assertEqual(perturbation_count(self.doc, perturbed), 1)

    def test_replacement_is_pure(self):
        self.assertEqual(apply_replacement(self.doc, 13, 'toy'), apply_replacement(self.doc, 13, 'toy'))

    def test_no_op_replacement(self):
        with self.assertRaises(NoOpReplacementError):
            apply_replacement(self.doc, 13, 'play')

    def test_index_out_of_range(self):
        with self.assertRaises(TokenRangeError):
            apply_replacement(self.doc, len(self.doc.tokens), 'toy')

    def test_double_perturbation(self):
        once = apply_replacement(self.doc, 13, 'toy')
        with self.assertRaises(DoublePerturbationError):
            apply_replacement(once, 13, 'game')

    def test_four_replacements_count_and_revert(self):
        perturbed = self.doc
        for index, word in [(1, 'adore'), (10, 'useful'), (13, 'toy'), (16, 'fetches')]:
            perturbed = apply_replacement(perturbed, index, word)

        self.assertEqual(perturbation_count(self.doc, perturbed), 4)
        self.assertEqual(perturbation_count(self.doc, self.doc), 0)
        self.assertEqual(perturbed.revert(), self.doc.tokens)
        self.assertEqual(
            perturbed.surface(),
            'i **adore** dogs ! though i wish mine was more **useful** while i **toy** tennis . '
            '**fetches** balls . . .',
        )
        differing = sum(a != b for a, b in zip(self.doc.tokens, perturbed.tokens))
        self.assertEqual(differing, perturbation_count(self.doc, perturbed))

    def test_derive_recomputes_records(self):
        tokens = list(self.doc.tokens)
        tokens[13], tokens[1] = 'toy', 'adore'
        derived = derive(self.doc, tokens)
        self.assertEqual(derived.replaced_indices, frozenset({1, 13}))
        self.assertEqual(derived.revert(), self.doc.tokens)

    def test_lineage_errors(self):
        shorter = tokenize('i love dogs')
        with self.assertRaises(LineageError):
            perturbation_count(self.doc, shorter)
        with self.assertRaises(LineageError):
            derive(self.doc, shorter.tokens)


class CorpusTests(SimpleTestCase):
    def test_bundled_corpora_are_deterministic(self):
        self.assertEqual(build_corpus('short'), build_corpus('short'))
        self.assertNotEqual(build_corpus('short', seed=1), build_corpus('short', seed=2))

    def test_length_regimes(self):
        def mean_words(corpus):
            return sum(len(content_indices(tokenize(text))) for text, _ in corpus) / len(corpus)

        self.assertTrue(9 <= mean_words(build_corpus('short')) <= 13)
        self.assertTrue(25 <= mean_words(build_corpus('medium')) <= 33)

    def test_labels_are_balanced(self):
        labels = [label for _, label in build_corpus('short', size=10)]
        self.assertEqual(labels.count(POSITIVE), 5)
        self.assertEqual(labels.count(NEGATIVE), 5)

    def test_unknown_bundled_corpus(self):
        with self.assertRaises(FormatError):
            build_corpus('long')

    def test_csv_corpus(self):
        corpus = [('i love my dog, really', POSITIVE), ('"awful" movie', NEGATIVE)]
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'corpus.csv')
            write_corpus(corpus, path)
            self.assertEqual(read_corpus(path), corpus)
            self.assertEqual(load_dataset(path), corpus)

    def test_bad_header_names_line_one(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'corpus.csv')
            with open(path, 'w', encoding='utf-8') as handle:
                handle.write('sentence,label\nhello,positive\n')
            with self.assertRaises(FormatError) as ctx:
                read_corpus(path)
        self.assertIn(':1:', str(ctx.exception))

    def test_bad_row_names_its_line(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'corpus.csv')
            with open(path, 'w', encoding='utf-8') as handle:
                handle.write('text,label\nhello,positive\nhello,positive,extra\n')
            with self.assertRaises(FormatError) as ctx:
                read_corpus(path)
        self.assertEqual(ctx.exception.line, 3)

    def test_missing_file(self):
        with self.assertRaises(IngestionError):
            read_corpus('/nonexistent/corpus.csv')


class SeedDataCommandTests(SimpleTestCase):
    def test_writes_corpora_models_and_embeddings(self):
        with tempfile.TemporaryDirectory() as tmp:
            with override_settings(STABILITY_DATA_DIR=tmp):
                call_command('seed_data', epochs=20, stdout=StringIO())
                call_command('seed_data', clear=True, epochs=20, stdout=StringIO())
            self.assertEqual(
                sorted(os.listdir(tmp)),
                ['embeddings.txt', 'medium.csv', 'medium.model', 'short.csv', 'short.model'],
            )
            self.assertEqual(read_corpus(os.path.join(tmp, 'short.csv')), build_corpus('short'))
