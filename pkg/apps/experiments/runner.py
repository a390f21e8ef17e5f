"""Batch execution of the (dataset, measure, threshold, search, example) matrix."""
import logging
from concurrent.futures import ProcessPoolExecutor
from typing import NamedTuple

from apps.attacks.config import GENETIC, GREEDY
from apps.attacks.engine import derive_seed
from apps.attacks.genetic import genetic_attack
from apps.attacks.greedy import greedy_attack
from apps.classifiers.bow import TrainingSettings, train_bow
from apps.explainers.lime import distinct_words
from apps.texts.corpora import load_dataset
from apps.texts.documents import tokenize

logger = logging.getLogger(__name__)

SEARCH_FUNCTIONS = {GREEDY: greedy_attack, GENETIC: genetic_attack}


class CellKey(NamedTuple):
    dataset: str
    measure: str
    tau: float
    search: str


def select_examples(corpus, count):
    """The first ``count`` documents with at least two distinct words, reused in every cell"""
    examples = []
    for text, _ in corpus:
        doc = tokenize(text)
        if len(distinct_words(doc)) >= 2:
            examples.append(doc)
        if len(examples) == count:
            break
    if len(examples) < count:
        logger.warning('Only %d usable documents out of %d requested', len(examples), count)
    return examples


def run_seed(master_seed, key, example):
    # The search is left out so GS and GA see identical explanation seeds
    return derive_seed(master_seed, key.dataset, key.measure, key.tau, example)


def train_models(datasets, hyper=None):
    return {name: train_bow(load_dataset(name), hyper or TrainingSettings()) for name in datasets}


def _run_job(job):
    key, model, store, doc, cfg = job
    return SEARCH_FUNCTIONS[key.search](model, store, doc, cfg)


def run_matrix(matrix, model, store, attack, workers=1):
    """Run every cell of ``matrix``; returns ``[(CellKey, [AttackOutcome, ...]), ...]``.

    ``model`` is one black-box model or a mapping of dataset name to model. Outcomes are
    ordered by cell (matrix order) then example index, whatever the worker count.
    """
    models = model if isinstance(model, dict) else {name: model for name in matrix.datasets}
    examples = {
        name: select_examples(load_dataset(name), matrix.examples_per_cell)
        for name in matrix.datasets
    }

    keys, jobs = [], []
    for dataset in matrix.datasets:
        for measure in matrix.measures:
            for tau in matrix.thresholds:
                for search in matrix.searches:
                    key = CellKey(dataset, measure, tau, search)
                    keys.append(key)
                    for index, doc in enumerate(examples[dataset]):
                        cfg = attack.evolve(
                            measure=measure, tau=tau,
                            seed=run_seed(matrix.master_seed, key, index),
                        )
                        jobs.append((key, models[dataset], store, doc, cfg))

    logger.info('Running %d attacks over %d cells with %d worker(s)', len(jobs), len(keys), workers)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_job, jobs, chunksize=4))
    else:
        outcomes = [_run_job(job) for job in jobs]

    grouped = {key: [] for key in keys}
    for (key, *_), outcome in zip(jobs, outcomes):
        grouped[key].append(outcome)
    return list(grouped.items())
