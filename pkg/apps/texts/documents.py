import logging
import unicodedata
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

from apps.exceptions import StabilityError

logger = logging.getLogger(__name__)


class TokenRangeError(StabilityError, IndexError):
    pass


class DoublePerturbationError(StabilityError, ValueError):
    pass


class NoOpReplacementError(StabilityError, ValueError):
    pass


class LineageError(StabilityError, ValueError):
    """Two documents do not descend from the same base document"""


def is_punctuation(token):
    """True when every character of ``token`` is a punctuation or symbol mark"""
    return bool(token) and all(unicodedata.category(ch)[0] in 'PS' for ch in token)


def _split_chunk(chunk):
    start, end = 0, len(chunk)
    while start < end and is_punctuation(chunk[start]):
        start += 1
    while end > start and is_punctuation(chunk[end - 1]):
        end -= 1
    leading = list(chunk[:start])
    trailing = list(chunk[end:])
    core = [chunk[start:end]] if start < end else []
    return leading + core + trailing


class Replacement(NamedTuple):
    index: int
    old: str
    new: str


class PerturbationRecord(NamedTuple):
    """One accepted replacement and the explanation similarity right after it"""
    index: int
    old: str
    new: str
    similarity_after: float


@dataclass(frozen=True)
class Document:
    raw: str
    tokens: tuple
    replaced: tuple = field(default=())

    def __post_init__(self):
        seen = set()
        for record in self.replaced:
            if not 0 <= record.index < len(self.tokens):
                raise TokenRangeError(f'replacement index {record.index} out of range')
            if record.index in seen:
                raise DoublePerturbationError(f'index {record.index} replaced twice')
            if record.old == record.new:
                raise NoOpReplacementError(f'index {record.index} replaced by itself')
            seen.add(record.index)

    def __len__(self):
        return len(self.tokens)

    @property
    def text(self):
        return ' '.join(self.tokens)

    @property
    def replaced_indices(self):
        return frozenset(record.index for record in self.replaced)

    def revert(self):
        """Token list of the base document this one was derived from"""
        tokens = list(self.tokens)
        for record in self.replaced:
            tokens[record.index] = record.old
        return tuple(tokens)

    def surface(self, mark='**'):
        indices = self.replaced_indices
        return ' '.join(
            f'{mark}{token}{mark}' if i in indices else token
            for i, token in enumerate(self.tokens)
        )


def tokenize(text):
    """Lowercase, split on whitespace and detach leading/trailing punctuation."""
    tokens = []
    for chunk in text.lower().split():
        tokens.extend(_split_chunk(chunk))
    return Document(raw=text, tokens=tuple(tokens))


def from_tokens(tokens: Sequence[str]):
    tokens = tuple(tokens)
    return Document(raw=' '.join(tokens), tokens=tokens)


def content_indices(doc):
    return [i for i, token in enumerate(doc.tokens) if not is_punctuation(token)]


def apply_replacement(doc, index, word):
    if not 0 <= index < len(doc.tokens):
        raise TokenRangeError(f'index {index} out of range for {len(doc.tokens)} tokens')
    if index in doc.replaced_indices:
        raise DoublePerturbationError(f'index {index} was already perturbed')
    current = doc.tokens[index]
    if word == current:
        raise NoOpReplacementError(f'replacement of {current!r} by itself')
    tokens = doc.tokens[:index] + (word,) + doc.tokens[index + 1:]
    replaced = tuple(sorted(doc.replaced + (Replacement(index, current, word),)))
    return Document(raw=doc.raw, tokens=tokens, replaced=replaced)


def derive(base, tokens):
    """Document over ``tokens`` with its replacement records recomputed against ``base``."""
    tokens = tuple(tokens)
    if len(tokens) != len(base.tokens):
        raise LineageError(
            f'token lists differ in length ({len(base.tokens)} vs {len(tokens)})'
        )
    replaced = tuple(
        Replacement(i, old, new)
        for i, (old, new) in enumerate(zip(base.tokens, tokens))
        if old != new
    )
    return Document(raw=base.raw, tokens=tokens, replaced=replaced)


def perturbation_count(d_b, d_p):
    if len(d_b.tokens) != len(d_p.tokens):
        raise LineageError(
            f'token lists differ in length ({len(d_b.tokens)} vs {len(d_p.tokens)})'
        )
    return len(d_p.replaced)
