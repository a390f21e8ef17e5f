"""Labelled corpora: CSV ingestion and the two bundled synthetic corpora.

The bundled corpora mimic two document-length regimes, ``short`` (about 11 words)
and ``medium`` (about 29 words). Documents are assembled from clause templates whose
slots are filled from synonym groups, so the bundled embedding table
(see ``apps.embeddings.bundled``) has meaningful neighbours for every content word.
"""
import csv
import logging

import numpy as np

from apps.exceptions import FormatError, IngestionError

logger = logging.getLogger(__name__)

POSITIVE = 'positive'
NEGATIVE = 'negative'

# Synonym groups. Words in one group are embedding neighbours of each other.
SYNONYM_GROUPS = {
    'good': ['good', 'nice', 'great', 'fine'],
    'helpful': ['helpful', 'useful', 'handy'],
    'happy': ['happy', 'glad', 'cheerful'],
    'lovely': ['lovely', 'charming', 'pleasant'],
    'bad': ['bad', 'poor', 'awful', 'terrible'],
    'useless': ['useless', 'pointless', 'worthless'],
    'sad': ['sad', 'unhappy', 'gloomy'],
    'rude': ['rude', 'nasty', 'mean'],
    'love': ['love', 'adore', 'like', 'enjoy'],
    'hate': ['hate', 'dislike', 'despise', 'loathe'],
    'dog': ['dog', 'puppy', 'hound'],
    'cat': ['cat', 'kitten', 'kitty'],
    'ball': ['ball', 'toy', 'frisbee'],
    'park': ['park', 'garden', 'yard'],
    'coffee': ['coffee', 'tea', 'cocoa'],
    'movie': ['movie', 'film', 'show'],
    'book': ['book', 'novel', 'story'],
    'meal': ['meal', 'dinner', 'lunch'],
    'friend': ['friend', 'buddy', 'pal'],
    'tennis': ['tennis', 'golf', 'soccer'],
    'today': ['today', 'tonight', 'yesterday'],
    'morning': ['morning', 'evening', 'afternoon'],
    'really': ['really', 'truly', 'very'],
    'always': ['always', 'often', 'usually'],
    'walk': ['walk', 'stroll', 'wander'],
    'watch': ['watch', 'view', 'see'],
    'read': ['read', 'study', 'browse'],
    'eat': ['eat', 'dine', 'snack'],
    'play': ['play', 'practice', 'train'],
}

FUNCTION_WORDS = ['i', 'my', 'the', 'was', 'we', 'in', 'it', 'a', 'with', 'and', 'said', 'felt', 'our']

POLAR = {
    POSITIVE: {'adjective': ['good', 'helpful', 'happy', 'lovely'], 'verb': ['love']},
    NEGATIVE: {'adjective': ['bad', 'useless', 'sad', 'rude'], 'verb': ['hate']},
}
NOUNS = ['dog', 'cat', 'ball', 'coffee', 'movie', 'book', 'meal', 'tennis']
PLACES = ['park']
PEOPLE = ['friend']
TIMES = ['today', 'morning']
ADVERBS = ['really', 'always']
ACTIVITIES = ['walk', 'watch', 'read', 'eat', 'play']

CLAUSES = [
    'i {verb} my {noun} !',
    'the {noun} was {adverb} {adjective} .',
    'we {activity} in the {place} {time} .',
    'my {person} said it was {adjective} .',
    '{time} i {activity} a {noun} with my {person} .',
    'our {noun} felt {adjective} and {adjective} .',
]

CORPUS_SHAPES = {
    'short': {'clauses': 2, 'size': 200, 'seed': 11},
    'medium': {'clauses': 5, 'size': 200, 'seed': 29},
}


def vocabulary_groups():
    """Synonym groups plus one singleton group per function word"""
    groups = dict(SYNONYM_GROUPS)
    for word in FUNCTION_WORDS:
        groups.setdefault(word, [word])
    return groups


def _pick(rng, options):
    return options[int(rng.integers(len(options)))]


def _fill(template, label, rng, flip_rate):
    words = []
    for piece in template.split():
        if not (piece.startswith('{') and piece.endswith('}')):
            words.append(piece)
            continue
        slot = piece[1:-1]
        if slot in ('adjective', 'verb'):
            polarity = label
            if rng.random() < flip_rate:
                polarity = NEGATIVE if label == POSITIVE else POSITIVE
            group = _pick(rng, POLAR[polarity][slot])
        else:
            group = _pick(rng, {
                'noun': NOUNS, 'place': PLACES, 'person': PEOPLE,
                'time': TIMES, 'adverb': ADVERBS, 'activity': ACTIVITIES,
            }[slot])
        words.append(_pick(rng, SYNONYM_GROUPS[group]))
    return words


def build_corpus(name, size=None, seed=None, flip_rate=0.15):
    """Deterministically generate a bundled corpus as a list of (text, label)."""
    try:
        shape = CORPUS_SHAPES[name]
    except KeyError:
        raise FormatError(f'unknown bundled corpus {name!r}') from None
    size = shape['size'] if size is None else size
    rng = np.random.default_rng(shape['seed'] if seed is None else seed)
    polar_clauses = [c for c in CLAUSES if '{adjective}' in c or '{verb}' in c]

    corpus = []
    for i in range(size):
        label = POSITIVE if i % 2 == 0 else NEGATIVE
        # At least one clause carries the label's sentiment
        templates = [_pick(rng, polar_clauses)]
        templates += [_pick(rng, CLAUSES) for _ in range(shape['clauses'] - 1)]
        order = rng.permutation(len(templates))
        words = []
        for position in order:
            flip = 0.0 if position == 0 else flip_rate
            words.extend(_fill(templates[position], label, rng, flip))
        corpus.append((' '.join(words), label))
    return corpus


def read_corpus(path):
    """Read a ``text,label`` CSV file into a list of (text, label)."""
    try:
        handle = open(path, newline='', encoding='utf-8')
    except OSError as exc:
        raise IngestionError(f'cannot open corpus: {exc.strerror}', path=path) from exc

    corpus = []
    with handle:
        reader = csv.reader(handle)
        try:
            header = next(reader, None)
            if header is None or [h.strip() for h in header] != ['text', 'label']:
                raise FormatError('expected header "text,label"', path=path, line=1)
            for row in reader:
                if not row:
                    continue
                if len(row) != 2:
                    raise FormatError(
                        f'expected 2 fields, found {len(row)}', path=path, line=reader.line_num
                    )
                corpus.append((row[0], row[1].strip()))
        except (csv.Error, UnicodeDecodeError) as exc:
            raise FormatError(str(exc), path=path, line=reader.line_num) from exc

    logger.debug('Read %d documents from %s', len(corpus), path)
    return corpus


def write_corpus(corpus, path):
    with open(path, 'w', newline='', encoding='utf-8') as handle:
        writer = csv.writer(handle)
        writer.writerow(['text', 'label'])
        writer.writerows(corpus)


def load_dataset(source):
    """Resolve a dataset name (``short``/``medium``) or a CSV path to a corpus"""
    if source in CORPUS_SHAPES:
        return build_corpus(source)
    return read_corpus(source)
