"""Run directory I/O.

``runs.csv`` holds one row per attack (floats written with ``repr`` so they read back
exactly), ``steps.csv`` every transcript step, ``summary.csv`` the per-cell statistics
and ``timings.csv`` the wall time and explain calls of each attack. The statistic tables
are always derived from ``runs.csv``, the timing summary from ``timings.csv``.
"""
import csv
import logging
import os
from dataclasses import dataclass

from apps.exceptions import FormatError, IngestionError
from apps.experiments.runner import CellKey
from apps.experiments.stats import aggregate

logger = logging.getLogger(__name__)

RUN_FIELDS = [
    'dataset', 'measure', 'tau', 'search', 'example', 'success', 'final_similarity',
    'perturbations', 'base_length', 'queries', 'explain_calls', 'semantic_ok',
    'semantic_similarity', 'original', 'perturbed',
]
STEP_FIELDS = [
    'dataset', 'measure', 'tau', 'search', 'example', 'step', 'event', 'index', 'old', 'new',
    'similarity', 'detail',
]
SUMMARY_FIELDS = [
    'dataset', 'measure', 'tau', 'search', 'runs', 'successes', 'success_rate',
    'mean_similarity', 'avg_perturbation_rate', 'min_perturbations',
]
TIMING_FIELDS = ['dataset', 'measure', 'tau', 'search', 'example', 'seconds', 'explain_calls']


@dataclass(frozen=True)
class RunRow:
    key: CellKey
    example: int
    success: bool
    final_similarity: float
    perturbation_count: int
    base_length: int


@dataclass(frozen=True)
class TimingRow:
    key: CellKey
    example: int
    elapsed: float
    explain_calls: int


def _number(value):
    return '' if value is None else repr(value)


def _writer(directory, name, fields):
    handle = open(os.path.join(directory, name), 'w', newline='', encoding='utf-8')
    writer = csv.writer(handle, lineterminator='\n')
    writer.writerow(fields)
    return handle, writer


def write_runs(results, directory):
    os.makedirs(directory, exist_ok=True)
    runs, run_writer = _writer(directory, 'runs.csv', RUN_FIELDS)
    steps, step_writer = _writer(directory, 'steps.csv', STEP_FIELDS)
    timings, timing_writer = _writer(directory, 'timings.csv', TIMING_FIELDS)
    summary, summary_writer = _writer(directory, 'summary.csv', SUMMARY_FIELDS)
    with runs, steps, timings, summary:
        for key, outcomes in results:
            cell = [key.dataset, key.measure, repr(key.tau), key.search]
            for example, outcome in enumerate(outcomes):
                run_writer.writerow(cell + [
                    example, int(outcome.success), repr(outcome.final_similarity),
                    outcome.perturbation_count, outcome.base_length, outcome.queries,
                    outcome.explain_calls, int(outcome.semantic_ok),
                    _number(outcome.semantic_similarity),
                    outcome.base_doc.text, outcome.surface(),
                ])
                for step in outcome.transcript:
                    step_writer.writerow(cell + [
                        example, step.step, step.event,
                        '' if step.index is None else step.index,
                        step.old, step.new, _number(step.similarity), step.detail,
                    ])
                timing_writer.writerow(cell + [example, f'{outcome.elapsed:.6f}', outcome.explain_calls])
            stats = aggregate(outcomes)
            summary_writer.writerow(cell + [
                stats.runs, stats.successes, repr(stats.success_rate),
                _number(stats.mean_similarity), _number(stats.avg_perturbation_rate),
                _number(stats.min_perturbations),
            ])
    logger.info('Wrote run artifacts for %d cells to %s', len(results), directory)


def read_runs(directory):
    """Rows of ``runs.csv`` grouped by cell, in file order"""
    path = os.path.join(directory, 'runs.csv')
    try:
        handle = open(path, newline='', encoding='utf-8')
    except OSError as exc:
        raise IngestionError(f'cannot open runs: {exc.strerror}', path=path) from exc

    cells = {}
    with handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames != RUN_FIELDS:
            raise FormatError('unexpected runs.csv header', path=path, line=1)
        for row in reader:
            try:
                key = CellKey(row['dataset'], row['measure'], float(row['tau']), row['search'])
                cells.setdefault(key, []).append(RunRow(
                    key=key,
                    example=int(row['example']),
                    success=row['success'] == '1',
                    final_similarity=float(row['final_similarity']),
                    perturbation_count=int(row['perturbations']),
                    base_length=int(row['base_length']),
                ))
            except (TypeError, ValueError) as exc:
                raise FormatError(str(exc), path=path, line=reader.line_num) from exc
    return list(cells.items())


def read_timings(directory):
    """Rows of ``timings.csv`` grouped by cell, in file order"""
    path = os.path.join(directory, 'timings.csv')
    try:
        handle = open(path, newline='', encoding='utf-8')
    except OSError as exc:
        raise IngestionError(f'cannot open timings: {exc.strerror}', path=path) from exc

    cells = {}
    with handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames != TIMING_FIELDS:
            raise FormatError('unexpected timings.csv header', path=path, line=1)
        for row in reader:
            try:
                key = CellKey(row['dataset'], row['measure'], float(row['tau']), row['search'])
                cells.setdefault(key, []).append(TimingRow(
                    key=key,
                    example=int(row['example']),
                    elapsed=float(row['seconds']),
                    explain_calls=int(row['explain_calls']),
                ))
            except (TypeError, ValueError) as exc:
                raise FormatError(str(exc), path=path, line=reader.line_num) from exc
    return list(cells.items())


def summarize(results):
    return {key: aggregate(outcomes) for key, outcomes in results}
