import logging

from apps.attacks.config import GREEDY
from apps.attacks.engine import AttackContext, TranscriptStep, finish
from apps.classifiers.bow import word_importance
from apps.texts.documents import PerturbationRecord, apply_replacement

logger = logging.getLogger(__name__)


def greedy_attack(model, store, d_b, cfg):
    """Perturb the least important words first, keeping each index's best replacement.

    Indices are sorted once on the base document by ascending absolute importance
    (ties by position). At each index every neighbour is evaluated and the valid one
    with the lowest similarity is accepted if it beats the current similarity.
    """
    context = AttackContext(model, store, d_b, cfg)
    current_doc, current = d_b, context.base_evaluation
    records, transcript = [], []

    indices = context.perturbable_indices()
    if not indices:
        transcript.append(TranscriptStep(0, 'stop', detail='no perturbable indices'))
        return finish(context, GREEDY, current_doc, current, records, transcript)

    order = sorted(
        indices, key=lambda i: (abs(word_importance(context.model, d_b, i)), i)
    )
    for step, index in enumerate(order, start=1):
        if current.similarity <= cfg.tau:
            break
        if len(records) >= context.budget:
            transcript.append(TranscriptStep(step, 'stop', detail='perturbation budget exhausted'))
            break

        old = d_b.tokens[index]
        best_doc, best = None, None
        for word, _ in context.neighbors(old):
            candidate = apply_replacement(current_doc, index, word)
            evaluation = context.evaluate(candidate)
            if evaluation.report.passed and (best is None or evaluation.similarity < best.similarity):
                best_doc, best = candidate, evaluation

        if best is None or best.similarity >= current.similarity:
            transcript.append(TranscriptStep(
                step, 'reject', index, old,
                similarity=current.similarity,
                detail='no valid neighbour' if best is None else 'no similarity decrease',
            ))
            continue

        new = best_doc.tokens[index]
        current_doc, current = best_doc, best
        records.append(PerturbationRecord(index, old, new, best.similarity))
        transcript.append(TranscriptStep(step, 'accept', index, old, new, best.similarity))
        logger.debug('Greedy step %d: %s -> %s at %d, similarity %.4f',
                     step, old, new, index, best.similarity)

    return finish(context, GREEDY, current_doc, current, records, transcript)
