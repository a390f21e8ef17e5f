"""Genetic search over perturbed documents.

Chromosomes are perturbed documents. Each generation keeps the fitter half of the
population, refills it by single-point suffix crossover between random parent pairs,
and mutates every child. The best chromosome ever seen is reported.
"""
import logging
from dataclasses import dataclass

import numpy as np

from apps.attacks.config import GENETIC
from apps.attacks.engine import AttackContext, TranscriptStep, derive_seed, finish
from apps.texts.documents import LineageError, PerturbationRecord, apply_replacement, derive

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Chromosome:
    doc: object
    explanation: object
    similarity: float
    report: object
    # similarity observed when each replaced index was introduced
    history: tuple = ()

    @classmethod
    def evaluated(cls, doc, context, history=()):
        evaluation = context.evaluate(doc)
        return cls(doc, evaluation.explanation, evaluation.similarity, evaluation.report,
                   tuple(sorted(history)))

    @property
    def fitness(self):
        return (self.similarity, len(self.doc.replaced), derive_seed(*self.doc.tokens))

    def records(self):
        introduced = dict(self.history)
        return [
            PerturbationRecord(r.index, r.old, r.new, introduced.get(r.index, self.similarity))
            for r in self.doc.replaced
        ]


def mutate(parent, context, rng):
    """Try random valid indices until one has a neighbour that beats the parent."""
    if len(parent.doc.replaced) >= context.budget:
        return parent
    unvisited = context.perturbable_indices(parent.doc)
    while unvisited:
        index = unvisited.pop(int(rng.integers(len(unvisited))))
        for word, _ in context.neighbors(parent.doc.tokens[index]):
            candidate = apply_replacement(parent.doc, index, word)
            evaluation = context.evaluate(candidate)
            if evaluation.report.passed and evaluation.similarity < parent.similarity:
                return Chromosome.evaluated(
                    candidate, context, parent.history + ((index, evaluation.similarity),)
                )
    return parent


def crossover(p1, p2, context, rng):
    """Child = p1 up to a random cut, p2 after it; an invalid child falls back to a parent."""
    if len(p1.doc.tokens) != len(p2.doc.tokens):
        raise LineageError('crossover parents come from different base documents')
    length = len(p1.doc.tokens)
    if length < 2:
        return p1
    cut = int(rng.integers(1, length))
    tokens = p1.doc.tokens[:cut] + p2.doc.tokens[cut:]
    history = (
        [(i, s) for i, s in p1.history if i < cut]
        + [(i, s) for i, s in p2.history if i >= cut]
    )
    child = Chromosome.evaluated(derive(context.base, tokens), context, history)
    if child.report.passed:
        return child
    return (p1, p2)[int(rng.integers(2))]


def genetic_attack(model, store, d_b, cfg):
    context = AttackContext(model, store, d_b, cfg)
    rng = np.random.default_rng(derive_seed(cfg.seed, 'genetic', *d_b.tokens))
    base = Chromosome.evaluated(d_b, context)
    transcript = []

    if not context.perturbable_indices():
        transcript.append(TranscriptStep(0, 'stop', detail='no perturbable indices'))
        return finish(context, GENETIC, d_b, context.base_evaluation, [], transcript, [1.0])

    population = [mutate(base, context, rng) for _ in range(cfg.ga_population)]
    best = min(population + [base], key=lambda c: c.fitness)
    history = [best.similarity]
    transcript.append(TranscriptStep(0, 'generation', similarity=best.similarity,
                                     detail=f'population {len(population)}'))

    for generation in range(1, cfg.ga_generations + 1):
        if best.similarity <= cfg.tau:
            break
        ranked = sorted(population, key=lambda c: c.fitness)
        parents = ranked[:len(ranked) // 2]
        children = []
        while len(children) < cfg.ga_population:
            first, second = rng.choice(len(parents), size=2, replace=len(parents) < 2)
            children.append(crossover(parents[first], parents[second], context, rng))
        population = [mutate(child, context, rng) for child in children]

        leader = min(population, key=lambda c: c.fitness)
        if leader.fitness < best.fitness:
            best = leader
        history.append(best.similarity)
        transcript.append(TranscriptStep(generation, 'generation', similarity=best.similarity,
                                         detail=f'population {len(population)}'))
        logger.debug('Generation %d: best similarity %.4f with %d perturbations',
                     generation, best.similarity, len(best.doc.replaced))

    evaluation = context.evaluate(best.doc)
    for r in best.records():
        transcript.append(TranscriptStep(len(transcript), 'accept', r.index, r.old, r.new,
                                         r.similarity_after))
    return finish(context, GENETIC, best.doc, evaluation, best.records(), transcript, history)
