"""Local surrogate explanations for text predictions.

Words are masked out of the document at random, the black box is queried on every
masked copy, and a kernel-weighted ridge regression from word presence to the
probability of the predicted class is fitted. Its coefficients are the explanation.
"""
import logging
from dataclasses import dataclass

import numpy as np
from django.conf import settings
from sklearn.linear_model import Ridge
from sklearn.metrics import pairwise_distances

from apps.exceptions import ParameterError, StabilityError
from apps.similarity.measures import RankedList
from apps.texts.documents import is_punctuation

logger = logging.getLogger(__name__)

RIDGE_ALPHA = 1.0


class DegenerateDocumentError(StabilityError, ValueError):
    pass


@dataclass(frozen=True)
class ExplainerParams:
    n: int = 500
    mask_rate: float = 0.3
    m: int = 10
    kernel_width: float = 0.25

    def __post_init__(self):
        if self.n < 10:
            raise ParameterError('explainer needs at least 10 samples')
        if not 0 < self.mask_rate < 1:
            raise ParameterError('mask_rate must lie strictly between 0 and 1')
        if self.m < 1:
            raise ParameterError('explanations need at least one feature')
        if self.kernel_width <= 0:
            raise ParameterError('kernel_width must be positive')

    @classmethod
    def from_settings(cls, **overrides):
        values = dict(settings.EXPLAINER_DEFAULTS)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


@dataclass(frozen=True)
class Explanation:
    features: tuple
    target_class: int
    seed: int

    @property
    def words(self):
        return tuple(word for word, _ in self.features)

    def top(self, k):
        return self.words[:k]

    def ranked_list(self):
        return RankedList.from_explanation(self)

    def __len__(self):
        return len(self.features)


def distinct_words(doc):
    seen = {}
    for token in doc.tokens:
        if not is_punctuation(token):
            seen.setdefault(token, None)
    return list(seen)


def sample_masked(doc, params, rng, words=None):
    """Draw ``params.n`` masked copies of ``doc``; sample 0 keeps every word.

    Returns (mask, tokens) pairs; ``mask[w]`` is 1 when distinct word ``w`` is present.
    Removing a word removes all of its occurrences.
    """
    words = distinct_words(doc) if words is None else words
    if len(words) < 2:
        raise DegenerateDocumentError(
            f'need at least 2 distinct words to explain, found {len(words)}'
        )
    position = {word: i for i, word in enumerate(words)}
    masks = np.ones((params.n, len(words)), dtype=int)
    masks[1:] = (rng.random((params.n - 1, len(words))) >= params.mask_rate).astype(int)

    samples = []
    for mask in masks:
        tokens = tuple(
            t for t in doc.tokens
            if t not in position or mask[position[t]]
        )
        samples.append((mask, tokens))
    return samples


def explain(model, doc, params, seed):
    words = distinct_words(doc)
    samples = sample_masked(doc, params, np.random.default_rng(seed), words)
    masks = np.array([mask for mask, _ in samples])
    probs = model.predict_proba([tokens for _, tokens in samples])
    target = int(np.argmax(probs[0]))

    distances = pairwise_distances(masks, np.ones((1, len(words))), metric='cosine').ravel()
    kernel = np.exp(-(distances ** 2) / params.kernel_width ** 2)
    surrogate = Ridge(alpha=RIDGE_ALPHA, fit_intercept=True)
    surrogate.fit(masks, probs[:, target], sample_weight=kernel)

    ranked = sorted(
        ((word, float(weight)) for word, weight in zip(words, surrogate.coef_)),
        key=lambda feature: (-abs(feature[1]), feature[0]),
    )
    return Explanation(features=tuple(ranked[:params.m]), target_class=target, seed=seed)
