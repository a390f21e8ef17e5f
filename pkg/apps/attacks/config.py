from dataclasses import dataclass, field, replace

from django.conf import settings

from apps.exceptions import ParameterError
from apps.explainers.lime import ExplainerParams
from apps.similarity.measures import get_measure

GREEDY = 'greedy'
GENETIC = 'genetic'
SEARCHES = (GREEDY, GENETIC)


@dataclass(frozen=True)
class AttackConfig:
    measure: str = 'rbo05'
    tau: float = 0.5
    delta: float = 0.8
    epsilon: float = 0.3
    k: int = 1
    j: int = 20
    min_cos: float = 0.5
    seed: int = 0
    ga_population: int = 10
    ga_generations: int = 10
    strict_semantic: bool = False
    explainer: ExplainerParams = field(default_factory=ExplainerParams)

    def __post_init__(self):
        get_measure(self.measure)
        if not 0 < self.tau < 1:
            raise ParameterError(f'tau must lie in (0, 1), got {self.tau}')
        if not 0 < self.epsilon <= 1:
            raise ParameterError(f'epsilon must lie in (0, 1], got {self.epsilon}')
        if self.k < 0:
            raise ParameterError('k must be non-negative')
        if self.j < 0:
            raise ParameterError('j must be non-negative')
        if self.ga_population < 2 or self.ga_population % 2:
            raise ParameterError('ga_population must be an even number of at least 2')
        if self.ga_generations < 1:
            raise ParameterError('ga_generations must be at least 1')

    @classmethod
    def from_settings(cls, explainer=None, **overrides):
        values = dict(settings.ATTACK_DEFAULTS)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(explainer=explainer or ExplainerParams.from_settings(), **values)

    def evolve(self, **changes):
        return replace(self, **changes)
