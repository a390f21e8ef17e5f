"""Constraint checking and candidate evaluation shared by the greedy and genetic searches.

A perturbed document is a valid attack state when the target model still predicts the
original label, no more than ``ceil(epsilon * content tokens)`` words were replaced, and
the top ``k`` features of the original explanation still appear in the perturbed one.
Semantic similarity is measured as well; it only vetoes in strict mode.
"""
import hashlib
import logging
import math
import time
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from apps.classifiers.bow import CountingModel, predict
from apps.embeddings.store import CoverageError, doc_similarity, nearest_neighbors
from apps.explainers.lime import explain
from apps.similarity.measures import get_measure
from apps.texts.documents import content_indices, perturbation_count

logger = logging.getLogger(__name__)

STOP_WORDS = frozenset({
    'a', 'an', 'and', 'are', 'as', 'at', 'be', 'but', 'by', 'for', 'from', 'had', 'has',
    'have', 'he', 'her', 'his', 'i', 'in', 'is', 'it', 'its', 'me', 'mine', 'my', 'of',
    'on', 'or', 'our', 'she', 'so', 'that', 'the', 'their', 'them', 'they', 'this', 'to',
    'was', 'we', 'were', 'with', 'you', 'your',
})


def derive_seed(*parts):
    """Stable non-negative 63-bit seed from arbitrary parts"""
    payload = '\x1f'.join(str(part) for part in parts).encode('utf-8')
    digest = hashlib.blake2b(payload, digest_size=8).digest()
    return int.from_bytes(digest, 'big') >> 1


def max_perturbations(doc, epsilon):
    # rounding keeps products such as 0.3 * 10 from ceiling to 4
    return math.ceil(round(epsilon * len(content_indices(doc)), 9))


@dataclass(frozen=True)
class ConstraintReport:
    prediction_ok: bool
    budget_ok: bool
    topk_ok: bool
    semantic_ok: bool
    semantic_similarity: Optional[float] = None
    strict_semantic: bool = False

    @property
    def passed(self):
        ok = self.prediction_ok and self.budget_ok and self.topk_ok
        if self.strict_semantic:
            ok = ok and self.semantic_ok
        return ok

    def as_dict(self):
        return {
            'prediction': self.prediction_ok,
            'budget': self.budget_ok,
            'topk': self.topk_ok,
            'semantic': self.semantic_ok,
            'semantic_similarity': self.semantic_similarity,
            'passed': self.passed,
        }


def check_constraints(d_b, d_p, e_b, e_p, model, store, cfg, base_label=None):
    if base_label is None:
        base_label = predict(model, d_b).label
    prediction_ok = predict(model, d_p).label == base_label
    budget_ok = perturbation_count(d_b, d_p) <= max_perturbations(d_b, cfg.epsilon)
    features = set(e_p.words)
    topk_ok = all(word in features for word in e_b.top(cfg.k))
    try:
        semantic = doc_similarity(store, d_b, d_p)
    except CoverageError:
        semantic = None
    return ConstraintReport(
        prediction_ok=prediction_ok,
        budget_ok=budget_ok,
        topk_ok=topk_ok,
        semantic_ok=semantic is not None and semantic >= cfg.delta,
        semantic_similarity=semantic,
        strict_semantic=cfg.strict_semantic,
    )


class Evaluation(NamedTuple):
    explanation: object
    similarity: float
    report: ConstraintReport


class AttackContext:
    """Per-attack state: base document and explanation, budget, candidate cache."""

    def __init__(self, model, store, base, cfg):
        self.model = CountingModel(model)
        self.store = store
        self.base = base
        self.cfg = cfg
        self.measure = get_measure(cfg.measure)
        self.budget = max_perturbations(base, cfg.epsilon)
        self.explain_calls = 0
        self.started = time.perf_counter()
        self._cache = {}
        self._neighbors = {}

        self.base_label = predict(self.model, base).label
        self.base_explanation = self._explain(base)
        self.base_ranked = self.base_explanation.ranked_list()
        self.protected = frozenset(self.base_explanation.top(cfg.k))
        report = check_constraints(
            base, base, self.base_explanation, self.base_explanation,
            self.model, store, cfg, base_label=self.base_label,
        )
        self.base_evaluation = Evaluation(
            self.base_explanation, self.measure(self.base_ranked, self.base_ranked), report
        )
        self._cache[base.tokens] = self.base_evaluation

    def candidate_seed(self, tokens):
        return derive_seed(self.cfg.seed, *tokens)

    def _explain(self, doc):
        self.explain_calls += 1
        return explain(self.model, doc, self.cfg.explainer, self.candidate_seed(doc.tokens))

    def evaluate(self, doc):
        cached = self._cache.get(doc.tokens)
        if cached is not None:
            return cached
        explanation = self._explain(doc)
        similarity = self.measure(self.base_ranked, explanation.ranked_list())
        report = check_constraints(
            self.base, doc, self.base_explanation, explanation,
            self.model, self.store, self.cfg, base_label=self.base_label,
        )
        evaluation = Evaluation(explanation, similarity, report)
        self._cache[doc.tokens] = evaluation
        return evaluation

    def perturbable_indices(self, doc=None):
        """Content positions not yet replaced whose word is neither a stop word nor protected"""
        doc = self.base if doc is None else doc
        replaced = doc.replaced_indices
        return [
            i for i in content_indices(self.base)
            if i not in replaced
            and self.base.tokens[i] not in STOP_WORDS
            and self.base.tokens[i] not in self.protected
        ]

    def neighbors(self, word):
        if word not in self._neighbors:
            self._neighbors[word] = nearest_neighbors(
                self.store, word, self.cfg.j, self.cfg.min_cos
            )
        return self._neighbors[word]


def evaluate_candidate(d_p, context):
    return context.evaluate(d_p)


@dataclass(frozen=True)
class TranscriptStep:
    step: int
    event: str
    index: Optional[int] = None
    old: str = ''
    new: str = ''
    similarity: Optional[float] = None
    detail: str = ''


@dataclass(frozen=True)
class AttackOutcome:
    search: str
    success: bool
    base_doc: object
    final_doc: object
    final_similarity: float
    perturbations: tuple
    queries: int
    explain_calls: int
    semantic_ok: bool
    semantic_similarity: Optional[float]
    report: ConstraintReport
    base_explanation: object
    final_explanation: object
    transcript: tuple = ()
    generations: tuple = ()
    elapsed: float = field(default=0.0, compare=False)

    @property
    def perturbation_count(self):
        return len(self.perturbations)

    @property
    def base_length(self):
        return len(content_indices(self.base_doc))

    @property
    def perturbation_rate(self):
        return self.perturbation_count / self.base_length if self.base_length else 0.0

    def surface(self, mark='**'):
        return self.final_doc.surface(mark)


def finish(context, search, doc, evaluation, records, transcript, generations=()):
    success = evaluation.similarity <= context.cfg.tau and evaluation.report.passed
    outcome = AttackOutcome(
        search=search,
        success=success,
        base_doc=context.base,
        final_doc=doc,
        final_similarity=evaluation.similarity,
        perturbations=tuple(records),
        queries=context.model.queries,
        explain_calls=context.explain_calls,
        semantic_ok=evaluation.report.semantic_ok,
        semantic_similarity=evaluation.report.semantic_similarity,
        report=evaluation.report,
        base_explanation=context.base_explanation,
        final_explanation=evaluation.explanation,
        transcript=tuple(transcript),
        generations=tuple(generations),
        elapsed=time.perf_counter() - context.started,
    )
    logger.info(
        '%s attack %s: similarity %.3f with %d/%d perturbations (%d explain calls)',
        search, 'succeeded' if success else 'failed', evaluation.similarity,
        outcome.perturbation_count, context.budget, context.explain_calls,
    )
    return outcome