import os
import tempfile

import numpy as np
from django.test import SimpleTestCase

from apps.embeddings.bundled import build_embeddings
from apps.embeddings.store import (
    CoverageError, EmbeddingStore, doc_similarity, load_embeddings, nearest_neighbors, save_embeddings,
)
from apps.exceptions import FormatError, IngestionError
from apps.texts.corpora import SYNONYM_GROUPS
from apps.texts.documents import tokenize


class LoadEmbeddingsTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.path = os.path.join(self.tmp.name, 'vectors.txt')

    def tearDown(self):
        self.tmp.cleanup()

    def load(self, content):
        with open(self.path, 'w', encoding='utf-8') as handle:
            handle.write(content)
        return load_embeddings(self.path)

    def test_reads_and_normalises_vectors(self):
        store = self.load('dog 3 4 0\ncat 0 0 2\n')
        self.assertEqual(store.words, ('dog', 'cat'))
        self.assertEqual(store.dimension, 3)
        np.testing.assert_allclose(store.vector('dog'), [0.6, 0.8, 0.0])
        np.testing.assert_allclose(store.vector('cat'), [0.0, 0.0, 1.0])

    def test_skips_a_count_header(self):
        store = self.load('2 3\ndog 3 4 0\ncat 0 0 2\n')
        self.assertEqual(len(store), 2)
        self.assertNotIn('2', store)

    def test_wrong_arity_names_the_line(self):
        with self.assertRaises(FormatError) as ctx:
            self.load('dog 3 4 0\ncat 0 2\n')
        self.assertEqual(ctx.exception.line, 2)

    def test_non_numeric_field(self):
        with self.assertRaises(FormatError) as ctx:
            self.load('dog 3 4 0\ncat 0 x 2\n')
        self.assertEqual(ctx.exception.line, 2)

    def test_zero_vector(self):
        with self.assertRaises(FormatError):
            self.load('dog 0 0 0\n')

    def test_duplicates_keep_the_last_vector(self):
        with self.assertLogs('apps.embeddings.store', level='WARNING'):
            store = self.load('dog 1 0\ncat 0 1\ndog 0 1\n')
        self.assertEqual(store.duplicates, 1)
        self.assertEqual(len(store), 2)
        np.testing.assert_allclose(store.vector('dog'), [0.0, 1.0])

    def test_missing_file(self):
        with self.assertRaises(IngestionError):
            load_embeddings(os.path.join(self.tmp.name, 'absent.txt'))

    def test_saved_table_loads_back(self):
        store = build_embeddings()
        save_embeddings(store, self.path)
        loaded = load_embeddings(self.path)
        self.assertEqual(loaded.words, store.words)
        np.testing.assert_allclose(loaded.vectors, store.vectors, atol=1e-5)


class NeighborTests(SimpleTestCase):
    def setUp(self):
        self.store = EmbeddingStore.from_mapping({
            'dog': [1.0, 0.0],
            'puppy': [0.9, np.sqrt(1 - 0.81)],
            'hound': [0.1, np.sqrt(1 - 0.01)],
            'cat': [-1.0, 0.0],
        })

    def test_closest_first_above_min_cos(self):
        neighbors = nearest_neighbors(self.store, 'dog', j=5, min_cos=0.05)
        self.assertEqual([w for w, _ in neighbors], ['puppy', 'hound'])
        self.assertAlmostEqual(neighbors[0][1], 0.9)
        self.assertAlmostEqual(neighbors[1][1], 0.1)

    def test_min_cos_filters(self):
        self.assertEqual([w for w, _ in nearest_neighbors(self.store, 'dog', 5, 0.5)], ['puppy'])

    def test_truncates_to_j(self):
        self.assertEqual(len(nearest_neighbors(self.store, 'dog', 1, -1.0)), 1)

    def test_no_neighbors(self):
        self.assertEqual(nearest_neighbors(self.store, 'dog', 0, 0.0), [])
        self.assertEqual(nearest_neighbors(self.store, 'zebra', 5, 0.0), [])

    def test_never_returns_the_word_itself(self):
        self.assertNotIn('dog', [w for w, _ in nearest_neighbors(self.store, 'dog', 10, -1.0)])


class DocSimilarityTests(SimpleTestCase):
    def setUp(self):
        self.store = EmbeddingStore.from_mapping({'good': [1.0, 0.0], 'bad': [0.0, 1.0], 'dog': [1.0, 0.0]})

    def test_identical_documents(self):
        doc = tokenize('good dog !')
        self.assertAlmostEqual(doc_similarity(self.store, doc, doc), 1.0)

    def test_orthogonal_documents(self):
        self.assertAlmostEqual(doc_similarity(self.store, tokenize('good'), tokenize('bad')), 0.0)

    def test_unknown_words_are_ignored(self):
        self.assertAlmostEqual(doc_similarity(self.store, tokenize('good zebra'), tokenize('dog')), 1.0)

    def test_no_known_word(self):
        with self.assertRaises(CoverageError):
            doc_similarity(self.store, tokenize('zebra'), tokenize('good'))


class BundledEmbeddingTests(SimpleTestCase):
    def test_synonyms_are_neighbours(self):
        store = build_embeddings()
        neighbors = [w for w, _ in nearest_neighbors(store, 'dog', 2, 0.5)]
        self.assertEqual(sorted(neighbors), ['hound', 'puppy'])

    def test_covers_the_corpus_vocabulary(self):
        store = build_embeddings()
        for group in SYNONYM_GROUPS.values():
            for word in group:
                self.assertIn(word, store)

    def test_deterministic(self):
        np.testing.assert_array_equal(build_embeddings().vectors, build_embeddings().vectors)
