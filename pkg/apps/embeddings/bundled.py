import numpy as np

from apps.embeddings.store import EmbeddingStore
from apps.texts.corpora import vocabulary_groups

DIMENSION = 32
NOISE = 0.35


def build_embeddings(groups=None, dimension=DIMENSION, seed=0, noise=NOISE):
    """Vectors for the bundled vocabulary: one random centre per synonym group plus noise"""
    groups = vocabulary_groups() if groups is None else groups
    rng = np.random.default_rng(seed)
    table = {}
    for name in sorted(groups):
        centre = rng.standard_normal(dimension)
        centre /= np.linalg.norm(centre)
        for word in groups[name]:
            offset = rng.standard_normal(dimension)
            table[word] = centre + noise * offset / np.linalg.norm(offset)
    return EmbeddingStore.from_mapping(table)
