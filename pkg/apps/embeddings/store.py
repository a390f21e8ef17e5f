import logging
from dataclasses import dataclass, field

import numpy as np

from apps.exceptions import FormatError, IngestionError, StabilityError
from apps.texts.documents import is_punctuation

logger = logging.getLogger(__name__)


class CoverageError(StabilityError, ValueError):
    """A document has no word the embedding table knows"""


@dataclass(frozen=True, eq=False)
class EmbeddingStore:
    words: tuple
    vectors: np.ndarray
    index: dict = field(repr=False)
    duplicates: int = 0

    @classmethod
    def from_mapping(cls, table, duplicates=0):
        words = tuple(table)
        if not words:
            return cls((), np.zeros((0, 0)), {}, duplicates)
        vectors = np.array([np.asarray(table[w], dtype=float) for w in words])
        norms = np.linalg.norm(vectors, axis=1, keepdims=True)
        if np.any(norms == 0):
            raise FormatError('zero vector cannot be normalised')
        return cls(words, vectors / norms, {w: i for i, w in enumerate(words)}, duplicates)

    @property
    def dimension(self):
        return self.vectors.shape[1]

    def __len__(self):
        return len(self.words)

    def __contains__(self, word):
        return word in self.index

    def vector(self, word):
        return self.vectors[self.index[word]]


def _is_header(fields):
    return len(fields) == 2 and all(f.isdigit() for f in fields)


def load_embeddings(path):
    """Read ``word v1 ... vD`` lines; an optional ``COUNT DIM`` first line is skipped."""
    try:
        handle = open(path, encoding='utf-8')
    except OSError as exc:
        raise IngestionError(f'cannot open embeddings: {exc.strerror}', path=path) from exc

    table = {}
    duplicates = 0
    dimension = None
    with handle:
        try:
            for number, line in enumerate(handle, start=1):
                fields = line.split()
                if not fields:
                    continue
                if number == 1 and _is_header(fields):
                    continue
                word, values = fields[0], fields[1:]
                if dimension is None:
                    dimension = len(values)
                    if dimension == 0:
                        raise FormatError(f'no vector for {word!r}', path=path, line=number)
                if len(values) != dimension:
                    raise FormatError(
                        f'expected {dimension} values for {word!r}, found {len(values)}',
                        path=path, line=number,
                    )
                try:
                    vector = [float(v) for v in values]
                except ValueError as exc:
                    raise FormatError(f'non-numeric field ({exc})', path=path, line=number) from exc
                if not np.any(vector):
                    raise FormatError(f'zero vector for {word!r}', path=path, line=number)
                if word in table:
                    duplicates += 1
                    del table[word]
                table[word] = vector
        except UnicodeDecodeError as exc:
            raise FormatError('embedding file is not UTF-8', path=path) from exc

    if duplicates:
        logger.warning('%d duplicate words in %s; last occurrence kept', duplicates, path)
    logger.debug('Loaded %d vectors from %s', len(table), path)
    return EmbeddingStore.from_mapping(table, duplicates)


def save_embeddings(store, path):
    with open(path, 'w', encoding='utf-8') as handle:
        handle.write(f'{len(store)} {store.dimension}\n')
        for word, vector in zip(store.words, store.vectors):
            handle.write(word + ' ' + ' '.join(f'{v:.6f}' for v in vector) + '\n')


def nearest_neighbors(store, word, j, min_cos):
    """Up to ``j`` other words with cosine >= ``min_cos``, closest first, ties by word"""
    if j <= 0 or word not in store:
        return []
    cosines = np.clip(store.vectors @ store.vector(word), -1.0, 1.0)
    candidates = [
        (other, float(cos))
        for other, cos in zip(store.words, cosines)
        if other != word and cos >= min_cos
    ]
    candidates.sort(key=lambda pair: (-pair[1], pair[0]))
    return candidates[:j]


def _mean_vector(store, doc):
    rows = [
        store.index[t] for t in doc.tokens
        if not is_punctuation(t) and t in store.index
    ]
    if not rows:
        raise CoverageError(f'no in-vocabulary words in {doc.text!r}')
    return store.vectors[rows].mean(axis=0)


def doc_similarity(store, a, b):
    """Cosine between the mean word vectors of two documents"""
    u, v = _mean_vector(store, a), _mean_vector(store, b)
    norm = np.linalg.norm(u) * np.linalg.norm(v)
    if norm == 0:
        return 0.0
    return float(np.clip(u @ v / norm, -1.0, 1.0))
