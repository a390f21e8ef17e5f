"""Black-box target models.

Any object with a ``classes`` sequence and ``predict_proba(batch)`` (a batch being a
sequence of token lists) can be explained and attacked. ``BowClassifier`` is the
built-in target: multinomial logistic regression over raw token counts.
"""
import logging
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np
from django.conf import settings
from scipy.special import softmax

from apps.exceptions import FormatError, IngestionError, ParameterError, StabilityError
from apps.texts.documents import TokenRangeError, is_punctuation, tokenize

logger = logging.getLogger(__name__)


class EmptyInputError(StabilityError, ValueError):
    pass


class DegenerateCorpusError(StabilityError, ValueError):
    pass


class BlackBoxModel(Protocol):
    classes: Sequence[str]

    def predict_proba(self, batch: Sequence[Sequence[str]]) -> np.ndarray:
        ...


@dataclass(frozen=True)
class LabelDistribution:
    probabilities: tuple

    @property
    def label(self):
        # np.argmax returns the lowest index on ties
        return int(np.argmax(self.probabilities))

    def __getitem__(self, index):
        return self.probabilities[index]


@dataclass(frozen=True)
class TrainingSettings:
    epochs: int = 500
    step_size: float = 0.1
    l2: float = 1e-4
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ParameterError('epochs must be at least 1')
        if self.step_size <= 0:
            raise ParameterError('step_size must be positive')
        if self.l2 < 0:
            raise ParameterError('l2 must be non-negative')

    @classmethod
    def from_settings(cls, **overrides):
        values = dict(settings.TRAINING_DEFAULTS)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


@dataclass(frozen=True, eq=False)
class BowClassifier:
    classes: tuple
    vocabulary: dict
    coef: np.ndarray
    bias: np.ndarray
    loss_history: tuple = field(default=())

    def featurize(self, batch):
        counts = np.zeros((len(batch), len(self.vocabulary)))
        for row, tokens in enumerate(batch):
            columns = [self.vocabulary[t] for t in tokens if t in self.vocabulary]
            np.add.at(counts[row], columns, 1.0)
        return counts

    def logits(self, batch):
        return self.featurize(batch) @ self.coef.T + self.bias

    def predict_proba(self, batch):
        return softmax(self.logits(batch), axis=1)


class CountingModel:
    """Wraps a black-box model and counts how many documents it was asked about"""

    def __init__(self, model):
        self.model = model
        self.classes = model.classes
        self.queries = 0

    def predict_proba(self, batch):
        self.queries += len(batch)
        return self.model.predict_proba(batch)


def _cross_entropy(probs, targets):
    picked = probs[np.arange(len(targets)), targets]
    return float(-np.mean(np.log(np.clip(picked, 1e-300, None))))


def train_bow(corpus, hyper=None):
    """Fit multinomial logistic regression on token counts by full-batch gradient descent."""
    hyper = hyper or TrainingSettings()
    if not corpus:
        raise EmptyInputError('cannot train on an empty corpus')
    classes = tuple(sorted({label for _, label in corpus}))
    if len(classes) < 2:
        raise DegenerateCorpusError(f'corpus has a single label {classes[0]!r}')

    documents = [tokenize(text).tokens for text, _ in corpus]
    words = sorted({t for tokens in documents for t in tokens if not is_punctuation(t)})
    vocabulary = {word: i for i, word in enumerate(words)}
    class_index = {label: i for i, label in enumerate(classes)}
    targets = np.array([class_index[label] for _, label in corpus])

    # Zero initialisation makes the fit independent of the seed
    model = BowClassifier(
        classes=classes,
        vocabulary=vocabulary,
        coef=np.zeros((len(classes), len(vocabulary))),
        bias=np.zeros(len(classes)),
    )
    features = model.featurize(documents)
    onehot = np.eye(len(classes))[targets]
    n = len(corpus)
    coef, bias = model.coef, model.bias

    history = []
    for _ in range(hyper.epochs):
        probs = softmax(features @ coef.T + bias, axis=1)
        loss = _cross_entropy(probs, targets) + 0.5 * hyper.l2 * float(np.sum(coef ** 2))
        history.append(loss)
        residual = probs - onehot
        coef = coef - hyper.step_size * (residual.T @ features / n + hyper.l2 * coef)
        bias = bias - hyper.step_size * residual.mean(axis=0)

    logger.info(
        'Trained bag-of-words classifier: %d documents, %d words, %d classes, final loss %.4f',
        n, len(vocabulary), len(classes), history[-1],
    )
    return BowClassifier(classes, vocabulary, coef, bias, tuple(history))


def predict(model, doc):
    probs = model.predict_proba([doc.tokens])[0]
    return LabelDistribution(tuple(float(p) for p in probs))


def word_importance(model, doc, index):
    """Probability drop of the predicted class when the token at ``index`` is deleted"""
    if not 0 <= index < len(doc.tokens):
        raise TokenRangeError(f'index {index} out of range for {len(doc.tokens)} tokens')
    reduced = doc.tokens[:index] + doc.tokens[index + 1:]
    probs = model.predict_proba([doc.tokens, reduced])
    label = int(np.argmax(probs[0]))
    return float(probs[0, label] - probs[1, label])


def accuracy(model, corpus):
    if not corpus:
        raise EmptyInputError('cannot score an empty corpus')
    probs = model.predict_proba([tokenize(text).tokens for text, _ in corpus])
    predicted = [model.classes[i] for i in np.argmax(probs, axis=1)]
    return sum(p == label for p, (_, label) in zip(predicted, corpus)) / len(corpus)


def save_model(model, path):
    """Flat text format: classes, vocabulary, one coefficient line per class, biases."""
    words = sorted(model.vocabulary, key=model.vocabulary.get)
    with open(path, 'w', encoding='utf-8') as handle:
        handle.write('\t'.join(model.classes) + '\n')
        handle.write('\t'.join(words) + '\n')
        for row in model.coef:
            handle.write(' '.join(repr(float(v)) for v in row) + '\n')
        handle.write(' '.join(repr(float(v)) for v in model.bias) + '\n')


def _parse_floats(line, expected, path, number):
    try:
        values = [float(v) for v in line.split()]
    except ValueError as exc:
        raise FormatError(f'non-numeric coefficient ({exc})', path=path, line=number) from exc
    if len(values) != expected:
        raise FormatError(f'expected {expected} values, found {len(values)}', path=path, line=number)
    return values


def load_model(path):
    try:
        with open(path, encoding='utf-8') as handle:
            lines = handle.read().split('\n')
    except OSError as exc:
        raise IngestionError(f'cannot open model: {exc.strerror}', path=path) from exc
    except UnicodeDecodeError as exc:
        raise FormatError('model file is not UTF-8', path=path) from exc

    if lines and lines[-1] == '':
        lines.pop()
    if len(lines) < 4:
        raise FormatError('truncated model file', path=path)
    classes = tuple(lines[0].split('\t'))
    words = lines[1].split('\t') if lines[1] else []
    if len(lines) != len(classes) + 3:
        raise FormatError(
            f'expected {len(classes) + 3} lines for {len(classes)} classes, found {len(lines)}',
            path=path,
        )
    coef = np.array([
        _parse_floats(lines[2 + c], len(words), path, 3 + c) for c in range(len(classes))
    ]).reshape(len(classes), len(words))
    bias = np.array(_parse_floats(lines[-1], len(classes), path, len(lines)))
    vocabulary = {word: i for i, word in enumerate(words)}
    if len(vocabulary) != len(words):
        raise FormatError('duplicate vocabulary entries', path=path, line=2)
    return BowClassifier(classes, vocabulary, coef, bias)
