"""Experiment definitions: the run matrix and the ``key = value`` config file."""
import logging
from dataclasses import dataclass, field
from typing import Optional

from decouple import Csv

from apps.attacks.config import GENETIC, GREEDY, SEARCHES, AttackConfig
from apps.exceptions import FormatError, IngestionError, ParameterError
from apps.explainers.lime import ExplainerParams
from apps.similarity.measures import MEASURES, get_measure

logger = logging.getLogger(__name__)

SEARCH_ALIASES = {'gs': GREEDY, 'ga': GENETIC, GREEDY: GREEDY, GENETIC: GENETIC}
DEFAULT_THRESHOLDS = (0.3, 0.4, 0.5, 0.6)


class ConfigurationError(FormatError):
    pass


def normalize_search(name):
    try:
        return SEARCH_ALIASES[name.strip().lower()]
    except KeyError:
        raise ParameterError(f'unknown search {name!r}; choose from {", ".join(SEARCHES)}') from None


@dataclass(frozen=True)
class RunMatrix:
    datasets: tuple = ('short', 'medium')
    measures: tuple = tuple(MEASURES)
    thresholds: tuple = DEFAULT_THRESHOLDS
    searches: tuple = (GREEDY, GENETIC)
    examples_per_cell: int = 20
    master_seed: int = 0

    def __post_init__(self):
        for measure in self.measures:
            get_measure(measure)
        for search in self.searches:
            if search not in SEARCHES:
                raise ParameterError(f'unknown search {search!r}')
        if not self.datasets or not self.measures or not self.thresholds or not self.searches:
            raise ParameterError('every run matrix axis needs at least one value')
        if any(not 0 < tau < 1 for tau in self.thresholds):
            raise ParameterError('thresholds must lie in (0, 1)')
        if self.examples_per_cell < 1:
            raise ParameterError('examples_per_cell must be at least 1')

    @property
    def size(self):
        return (len(self.datasets) * len(self.measures) * len(self.thresholds)
                * len(self.searches) * self.examples_per_cell)


@dataclass(frozen=True)
class Experiment:
    matrix: RunMatrix
    attack: AttackConfig
    embeddings: Optional[str] = None
    model: Optional[str] = None
    workers: int = 1
    source: dict = field(default_factory=dict)


def _boolean(value):
    lowered = value.strip().lower()
    if lowered in ('1', 'true', 'yes', 'on'):
        return True
    if lowered in ('0', 'false', 'no', 'off'):
        return False
    raise ValueError(f'not a boolean: {value!r}')


CASTS = {
    'datasets': Csv(post_process=tuple),
    'measures': Csv(post_process=tuple),
    'thresholds': Csv(cast=float, post_process=tuple),
    'searches': Csv(cast=normalize_search, post_process=tuple),
    'examples_per_cell': int,
    'master_seed': int,
    'embeddings': str,
    'model': str,
    'epsilon': float,
    'delta': float,
    'topk': int,
    'neighbors': int,
    'min_cos': float,
    'population': int,
    'generations': int,
    'samples': int,
    'mask_rate': float,
    'features': int,
    'kernel_width': float,
    'strict_semantic': _boolean,
    'workers': int,
}

MATRIX_KEYS = {'datasets', 'measures', 'thresholds', 'searches', 'examples_per_cell', 'master_seed'}
ATTACK_KEYS = {
    'epsilon': 'epsilon', 'delta': 'delta', 'topk': 'k', 'neighbors': 'j', 'min_cos': 'min_cos',
    'population': 'ga_population', 'generations': 'ga_generations',
    'strict_semantic': 'strict_semantic',
}
EXPLAINER_KEYS = {'samples': 'n', 'mask_rate': 'mask_rate', 'features': 'm', 'kernel_width': 'kernel_width'}


def parse_config(text, path='<config>'):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values, unknown = {}, []
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ConfigurationError(f'expected "key = value", found {line!r}', path=path, line=number)
        key, raw = (part.strip() for part in line.split('=', 1))
        if key not in CASTS:
            unknown.append(key)
            continue
        try:
            values[key] = CASTS[key](raw)
        except ValueError as exc:
            raise ConfigurationError(f'bad value for {key}: {exc}', path=path, line=number) from exc
    if unknown:
        raise ConfigurationError(f'unknown config keys: {", ".join(unknown)}', path=path)
    return values


def read_config(path):
    try:
        with open(path, encoding='utf-8') as handle:
            text = handle.read()
    except OSError as exc:
        raise IngestionError(f'cannot open config: {exc.strerror}', path=path) from exc
    return parse_config(text, path)


def build_experiment(values):
    matrix = RunMatrix(**{k: v for k, v in values.items() if k in MATRIX_KEYS})
    explainer = ExplainerParams.from_settings(
        **{field_: values[key] for key, field_ in EXPLAINER_KEYS.items() if key in values}
    )
    attack = AttackConfig.from_settings(
        explainer=explainer,
        seed=matrix.master_seed,
        **{field_: values[key] for key, field_ in ATTACK_KEYS.items() if key in values},
    )
    return Experiment(
        matrix=matrix,
        attack=attack,
        embeddings=values.get('embeddings'),
        model=values.get('model'),
        workers=values.get('workers', 1),
        source=values,
    )
