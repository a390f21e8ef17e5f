import csv
import os
import tempfile
import unittest
import uuid
from functools import lru_cache
from io import StringIO
from unittest import mock

from django.core.management import CommandError, call_command
from django.test import SimpleTestCase, TestCase
from rest_framework import status
from rest_framework.test import APITestCase

from apps.attacks.config import GENETIC, GREEDY, AttackConfig
from apps.classifiers.bow import EmptyInputError, TrainingSettings, train_bow
from apps.embeddings.bundled import build_embeddings
from apps.exceptions import IngestionError, ParameterError, StabilityError
from apps.experiments.artifacts import TimingRow, read_runs, read_timings, summarize, write_runs
from apps.experiments.config import (
    ConfigurationError, Experiment, RunMatrix, build_experiment, parse_config,
)
from apps.experiments.models import AttackRecord, ExperimentRun
from apps.experiments.reports import write_report
from apps.experiments.runner import CellKey, run_matrix, train_models
from apps.experiments.stats import CellStats, SearchTiming, aggregate, aggregate_timings, time_ratio
from apps.explainers.lime import ExplainerParams
from apps.texts.corpora import build_corpus

TESTDATA = os.path.join(os.path.dirname(__file__), 'testdata')

MINIATURE_CONFIG = """\
# one dataset, two measures, both searches
datasets = short
measures = rbo05, kendall
thresholds = 0.5
searches = gs, ga
examples_per_cell = 2
master_seed = 7
samples = 50
population = 2
generations = 1
"""


def miniature_matrix():
    return RunMatrix(
        datasets=('short',), measures=('rbo05', 'kendall'), thresholds=(0.5,),
        searches=(GREEDY, GENETIC), examples_per_cell=2, master_seed=3,
    )


def miniature_attack():
    return AttackConfig(explainer=ExplainerParams(n=50), ga_population=2, ga_generations=1)


@lru_cache(maxsize=None)
def short_model():
    return train_bow(build_corpus('short'), TrainingSettings(epochs=200))


@lru_cache(maxsize=None)
def miniature_results():
    return run_matrix(miniature_matrix(), short_model(), build_embeddings(), miniature_attack())


class Outcome:
    def __init__(self, success, final_similarity, perturbation_count, base_length):
        self.success = success
        self.final_similarity = final_similarity
        self.perturbation_count = perturbation_count
        self.base_length = base_length


def golden_stats():
    def key(tau, search):
        return CellKey('short', 'rbo05', tau, search)

    return {
        key(0.5, GREEDY): CellStats(20, 9, 0.45, 0.3137, 0.18, 2),
        key(0.5, GENETIC): CellStats(20, 12, 0.6, 0.27, 0.2, 1),
        key(0.3, GREEDY): CellStats(20, 0, 0.0),
        key(0.3, GENETIC): CellStats(20, 3, 0.15, 0.25, 0.3, 3),
    }


class RunMatrixTests(SimpleTestCase):
    def test_default_matrix(self):
        matrix = RunMatrix()
        self.assertEqual(len(matrix.measures), 9)
        self.assertEqual(matrix.thresholds, (0.3, 0.4, 0.5, 0.6))
        # 720 attacks per dataset and search
        self.assertEqual(matrix.size, 2 * 2 * 720)

    def test_invalid_axes(self):
        with self.assertRaises(ParameterError):
            RunMatrix(measures=('cosine',))
        with self.assertRaises(ParameterError):
            RunMatrix(thresholds=(1.5,))
        with self.assertRaises(ParameterError):
            RunMatrix(searches=())


class ConfigTests(SimpleTestCase):
    def test_parses_the_miniature_config(self):
        values = parse_config(MINIATURE_CONFIG)
        self.assertEqual(values['measures'], ('rbo05', 'kendall'))
        self.assertEqual(values['thresholds'], (0.5,))
        self.assertEqual(values['searches'], (GREEDY, GENETIC))

        experiment = build_experiment(values)
        self.assertEqual(experiment.matrix.size, 8)
        self.assertEqual(experiment.attack.seed, 7)
        self.assertEqual(experiment.attack.explainer.n, 50)
        self.assertEqual(experiment.attack.ga_population, 2)
        self.assertIsNone(experiment.embeddings)

    def test_unknown_keys_are_listed(self):
        with self.assertRaises(ConfigurationError) as ctx:
            parse_config('colour = red\nthresholds = 0.5\nshape = round\n')
        self.assertIn('colour, shape', str(ctx.exception))

    def test_bad_value_names_its_line(self):
        with self.assertRaises(ConfigurationError) as ctx:
            parse_config('datasets = short\nexamples_per_cell = many\n', path='bad.cfg')
        self.assertEqual(ctx.exception.line, 2)
        self.assertTrue(str(ctx.exception).startswith('bad.cfg:2:'))

    def test_unknown_search(self):
        with self.assertRaises(ConfigurationError):
            parse_config('searches = beam\n')

    def test_line_without_equals(self):
        with self.assertRaises(ConfigurationError):
            parse_config('thresholds 0.5\n')


class AggregateTests(SimpleTestCase):
    def test_success_only_statistics(self):
        stats = aggregate([
            Outcome(True, 0.2, 1, 10),
            Outcome(True, 0.4, 3, 10),
            Outcome(False, 0.9, 0, 10),
            Outcome(False, 0.7, 2, 10),
        ])
        self.assertEqual(stats.runs, 4)
        self.assertEqual(stats.successes, 2)
        self.assertEqual(stats.success_rate, 0.5)
        self.assertAlmostEqual(stats.mean_similarity, 0.3)
        self.assertAlmostEqual(stats.avg_perturbation_rate, 0.2)
        self.assertEqual(stats.min_perturbations, 1)

    def test_no_success(self):
        self.assertEqual(aggregate([Outcome(False, 0.9, 0, 10)]), CellStats(1, 0, 0.0))

    def test_empty_cell(self):
        with self.assertRaises(EmptyInputError):
            aggregate([])

    def test_timings_pool_measures_and_thresholds(self):
        def rows(measure, tau, search, *pairs):
            key = CellKey('short', measure, tau, search)
            return key, [TimingRow(key, i, elapsed, calls) for i, (elapsed, calls) in enumerate(pairs)]

        timings = aggregate_timings([
            rows('rbo05', 0.5, GREEDY, (1.0, 30), (2.0, 50)),
            rows('kendall', 0.3, GREEDY, (3.0, 40)),
            rows('rbo05', 0.5, GENETIC, (5.0, 100), (7.0, 120)),
        ])
        self.assertEqual(set(timings), {('short', GREEDY), ('short', GENETIC)})
        self.assertEqual(timings['short', GREEDY], SearchTiming(3, 2.0, 40.0))
        self.assertEqual(timings['short', GENETIC], SearchTiming(2, 6.0, 110.0))
        self.assertEqual(time_ratio(timings, 'short'), 3.0)

    def test_time_ratio_needs_both_searches(self):
        timings = {('short', GREEDY): SearchTiming(1, 1.0, 10.0)}
        self.assertIsNone(time_ratio(timings, 'short'))
        self.assertIsNone(time_ratio(timings, 'medium'))


class RunMatrixExecutionTests(SimpleTestCase):
    def test_every_cell_holds_every_example(self):
        results = miniature_results()
        self.assertEqual([key for key, _ in results], [
            CellKey('short', 'rbo05', 0.5, GREEDY),
            CellKey('short', 'rbo05', 0.5, GENETIC),
            CellKey('short', 'kendall', 0.5, GREEDY),
            CellKey('short', 'kendall', 0.5, GENETIC),
        ])
        for key, outcomes in results:
            self.assertEqual(len(outcomes), 2)
            self.assertEqual({o.search for o in outcomes}, {key.search})

    def test_searches_share_examples_and_seeds(self):
        cells = dict(miniature_results())
        greedy = cells[CellKey('short', 'rbo05', 0.5, GREEDY)]
        genetic = cells[CellKey('short', 'rbo05', 0.5, GENETIC)]
        for a, b in zip(greedy, genetic):
            self.assertEqual(a.base_doc, b.base_doc)
            self.assertEqual(a.base_explanation, b.base_explanation)

    def test_worker_count_does_not_change_results(self):
        parallel = run_matrix(
            miniature_matrix(), short_model(), build_embeddings(), miniature_attack(), workers=2,
        )
        self.assertEqual(parallel, miniature_results())

    def test_successes_satisfy_every_constraint(self):
        for key, outcomes in miniature_results():
            for outcome in outcomes:
                if not outcome.success:
                    continue
                self.assertLessEqual(outcome.final_similarity, key.tau)
                self.assertTrue(outcome.report.prediction_ok)
                self.assertTrue(outcome.report.budget_ok)
                self.assertTrue(outcome.report.topk_ok)
                self.assertTrue(
                    set(outcome.base_explanation.top(1)) <= set(outcome.final_explanation.words)
                )

    def test_minimum_perturbations_is_witnessed(self):
        for key, stats in summarize(miniature_results()).items():
            if stats.min_perturbations is None:
                continue
            outcomes = dict(miniature_results())[key]
            self.assertIn(
                stats.min_perturbations,
                [o.perturbation_count for o in outcomes if o.success],
            )


class ArtifactTests(SimpleTestCase):
    def test_statistics_survive_the_run_directory(self):
        results = miniature_results()
        with tempfile.TemporaryDirectory() as tmp:
            write_runs(results, tmp)
            self.assertEqual(
                sorted(os.listdir(tmp)), ['runs.csv', 'steps.csv', 'summary.csv', 'timings.csv'],
            )
            rows = read_runs(tmp)
            self.assertEqual(summarize(rows), summarize(results))
            with open(os.path.join(tmp, 'summary.csv'), newline='', encoding='utf-8') as handle:
                summary = list(csv.DictReader(handle))
        self.assertEqual(len(summary), 4)
        self.assertEqual(sum(len(outcomes) for _, outcomes in rows), 8)

    def test_timings_read_back(self):
        results = miniature_results()
        with tempfile.TemporaryDirectory() as tmp:
            write_runs(results, tmp)
            rows = dict(read_timings(tmp))
        for key, outcomes in results:
            with self.subTest(key=key):
                self.assertEqual([r.explain_calls for r in rows[key]], [o.explain_calls for o in outcomes])
                for row, outcome in zip(rows[key], outcomes):
                    self.assertAlmostEqual(row.elapsed, outcome.elapsed, places=5)
        timings = aggregate_timings(rows.items())
        self.assertEqual(timings['short', GREEDY].runs, 4)
        self.assertEqual(timings['short', GENETIC].runs, 4)

    def test_missing_run_directory(self):
        with self.assertRaises(IngestionError):
            read_runs('/nonexistent/run')
        with self.assertRaises(IngestionError):
            read_timings('/nonexistent/run')


class ReportTests(SimpleTestCase):
    def test_markdown_matches_the_golden_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = write_report(golden_stats(), os.path.join(tmp, 'report.md'))
            with open(path, encoding='utf-8') as handle:
                rendered = handle.read()
        with open(os.path.join(TESTDATA, 'golden_report.md'), encoding='utf-8') as handle:
            self.assertEqual(rendered, handle.read())

    def test_markdown_appends_time_per_example(self):
        timings = {
            ('short', GENETIC): SearchTiming(4, 2.5, 110.0),
            ('short', GREEDY): SearchTiming(4, 1.0, 40.5),
        }
        with tempfile.TemporaryDirectory() as tmp:
            path = write_report(golden_stats(), os.path.join(tmp, 'report.md'), timings=timings)
            with open(path, encoding='utf-8') as handle:
                rendered = handle.read()
        with open(os.path.join(TESTDATA, 'golden_report.md'), encoding='utf-8') as handle:
            golden = handle.read()
        self.assertEqual(rendered, golden + '\n'.join([
            '',
            '## Time per Example',
            '',
            '### short',
            '',
            '| search | attacks | mean seconds | mean explain calls |',
            '|---|---|---|---|',
            '| GA | 4 | 2.500 | 110.0 |',
            '| GS | 4 | 1.000 | 40.5 |',
            '',
            'GA/GS time ratio: 2.50',
            '',
        ]))

    def test_csv_lists_one_row_per_cell(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = write_report(golden_stats(), os.path.join(tmp, 'report.csv'), fmt='csv')
            with open(path, encoding='utf-8') as handle:
                lines = handle.read().splitlines()
        self.assertEqual(lines, [
            'dataset,tau,measure,search,success_rate,mean_similarity,avg_perturbation_rate,min_perturbations',
            'short,0.30,rbo05,GA,0.15,0.25,0.30,3',
            'short,0.30,rbo05,GS,0.00,,,',
            'short,0.50,rbo05,GA,0.60,0.27,0.20,1',
            'short,0.50,rbo05,GS,0.45,0.31,0.18,2',
        ])

    def test_pdf(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = write_report(
                golden_stats(), os.path.join(tmp, 'report.pdf'), fmt='pdf',
                timings={('short', GREEDY): SearchTiming(4, 1.0, 40.5)},
            )
            with open(path, 'rb') as handle:
                self.assertTrue(handle.read().startswith(b'%PDF'))

    def test_miniature_run_layout(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = write_report(summarize(miniature_results()), os.path.join(tmp, 'report.md'))
            with open(path, encoding='utf-8') as handle:
                rendered = handle.read()
            write_runs(miniature_results(), os.path.join(tmp, 'run'))
            reread = write_report(summarize(read_runs(os.path.join(tmp, 'run'))), os.path.join(tmp, 'again.md'))
            with open(reread, encoding='utf-8') as handle:
                self.assertEqual(handle.read(), rendered)
        lines = rendered.splitlines()
        header = '| τ | RBO0.5 GA | RBO0.5 GS | Kendall GA | Kendall GS |'
        self.assertEqual(lines.count(header), 4)
        self.assertEqual(len([line for line in lines if line.startswith('## ')]), 4)
        self.assertEqual(len([line for line in lines if line.startswith('| 0.50 |')]), 4)

    def test_rejects_unknown_format_and_empty_stats(self):
        with self.assertRaises(ParameterError):
            write_report(golden_stats(), 'report.html', fmt='html')
        with self.assertRaises(ParameterError):
            write_report({}, 'report.md')


class ExperimentCommandTests(TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.config = os.path.join(self.tmp.name, 'miniature.cfg')
        with open(self.config, 'w', encoding='utf-8') as handle:
            handle.write(MINIATURE_CONFIG)

    def tearDown(self):
        self.tmp.cleanup()

    def run_experiment(self, out, *flags):
        call_command('experiment', '--config', self.config, '--out', out, *flags, stdout=StringIO())

    def read(self, *parts):
        with open(os.path.join(self.tmp.name, *parts), 'rb') as handle:
            return handle.read()

    def test_same_seed_same_summary(self):
        self.run_experiment(os.path.join(self.tmp.name, 'first'), '--no-record')
        self.run_experiment(os.path.join(self.tmp.name, 'second'), '--no-record')
        self.assertEqual(self.read('first', 'summary.csv'), self.read('second', 'summary.csv'))
        self.assertEqual(self.read('first', 'runs.csv'), self.read('second', 'runs.csv'))
        self.assertFalse(ExperimentRun.objects.exists())

    def test_records_the_run(self):
        out = os.path.join(self.tmp.name, 'run')
        self.run_experiment(out, '--name', 'miniature')
        run = ExperimentRun.objects.get()
        self.assertEqual(run.name, 'miniature')
        self.assertEqual(run.status, ExperimentRun.COMPLETED)
        self.assertEqual(run.master_seed, 7)
        self.assertEqual(run.config['measures'], ['rbo05', 'kendall'])
        self.assertEqual(run.records.count(), 8)
        self.assertEqual(run.cell_stats(), summarize(read_runs(out)))

    def test_report_command(self):
        out = os.path.join(self.tmp.name, 'run')
        self.run_experiment(out, '--no-record')
        stdout = StringIO()
        call_command('report', '--runs', out, stdout=stdout)
        call_command('report', '--runs', out, '--format', 'csv', stdout=StringIO())
        self.assertIn(b'## Attack Success Rates', self.read('run', 'report.md'))
        self.assertIn(b'## Time per Example', self.read('run', 'report.md'))
        self.assertIn(b'| GA | 4 |', self.read('run', 'report.md'))
        self.assertIn('GA/GS time ratio: ', stdout.getvalue())
        self.assertTrue(self.read('run', 'report.csv').startswith(b'dataset,tau,measure,search'))

    def test_report_without_timings(self):
        out = os.path.join(self.tmp.name, 'run')
        self.run_experiment(out, '--no-record')
        os.remove(os.path.join(out, 'timings.csv'))
        call_command('report', '--runs', out, stdout=StringIO())
        self.assertNotIn(b'## Time per Example', self.read('run', 'report.md'))

    def test_run_is_stored_before_attacks_start(self):
        def inspect_run(*args, **kwargs):
            self.assertEqual(ExperimentRun.objects.get().status, ExperimentRun.RUNNING)
            return miniature_results()

        with mock.patch('apps.experiments.management.commands.experiment.run_matrix', side_effect=inspect_run):
            self.run_experiment(os.path.join(self.tmp.name, 'run'))
        self.assertEqual(ExperimentRun.objects.get().status, ExperimentRun.COMPLETED)

    def test_failed_matrix_marks_the_run_failed(self):
        crash = StabilityError('worker crashed')
        with mock.patch('apps.experiments.management.commands.experiment.run_matrix', side_effect=crash):
            with self.assertRaises(CommandError) as ctx:
                self.run_experiment(os.path.join(self.tmp.name, 'run'), '--name', 'crashed')
        self.assertEqual(ctx.exception.returncode, 3)
        run = ExperimentRun.objects.get()
        self.assertEqual(run.name, 'crashed')
        self.assertEqual(run.status, ExperimentRun.FAILED)
        self.assertIsNone(run.completed_at)
        self.assertFalse(run.records.exists())

    def test_bad_config_exits_with_two(self):
        with open(self.config, 'w', encoding='utf-8') as handle:
            handle.write('colour = red\n')
        with self.assertRaises(CommandError) as ctx:
            self.run_experiment(os.path.join(self.tmp.name, 'run'))
        self.assertEqual(ctx.exception.returncode, 2)

    def test_missing_runs_exit_with_two(self):
        with self.assertRaises(CommandError) as ctx:
            call_command('report', '--runs', os.path.join(self.tmp.name, 'absent'), stdout=StringIO())
        self.assertEqual(ctx.exception.returncode, 2)


class ExperimentAPITests(APITestCase):
    @classmethod
    def setUpTestData(cls):
        experiment = Experiment(
            matrix=miniature_matrix(), attack=miniature_attack(),
            source={'datasets': ('short',), 'master_seed': 3},
        )
        cls.experiment_run = ExperimentRun.objects.record_results(
            experiment, miniature_results(), out_dir='runs/miniature', name='miniature',
        )
        cls.successes = sum(o.success for _, outcomes in miniature_results() for o in outcomes)

    def url(self, suffix=''):
        return f'/api/v1/experiments/{self.experiment_run.public_id}/{suffix}'

    def test_list(self):
        response = self.client.get('/api/v1/experiments/')
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(len(response.data), 1)
        self.assertEqual(response.data[0]['record_count'], 8)
        self.assertEqual(response.data[0]['success_count'], self.successes)

    def test_detail(self):
        response = self.client.get(self.url())
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(response.data['config'], {'datasets': ['short'], 'master_seed': 3})
        self.assertEqual(response.data['out_dir'], 'runs/miniature')

    def test_records_can_be_filtered(self):
        response = self.client.get(self.url('records/'), {'search': GENETIC})
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(len(response.data), 4)
        self.assertEqual({r['search'] for r in response.data}, {GENETIC})

        successful = self.client.get(self.url('records/'), {'success': 'true'})
        self.assertEqual(len(successful.data), self.successes)
        self.assertEqual(len(self.client.get(self.url('records/'), {'min_similarity': 2}).data), 0)
        self.assertEqual(
            AttackRecord.objects.filter(run=self.experiment_run, measure='kendall').count(),
            len(self.client.get(self.url('records/'), {'measure': 'kendall'}).data),
        )

    def test_stats(self):
        response = self.client.get(self.url('stats/'))
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(response.data['public_id'], str(self.experiment_run.public_id))
        expected = summarize(miniature_results())
        self.assertEqual(len(response.data['cells']), len(expected))
        for cell in response.data['cells']:
            stats = expected[CellKey(cell['dataset'], cell['measure'], cell['tau'], cell['search'])]
            self.assertEqual(cell['runs'], stats.runs)
            self.assertEqual(cell['successes'], stats.successes)
            self.assertEqual(cell['min_perturbations'], stats.min_perturbations)

    def test_unknown_run(self):
        missing = uuid.uuid4()
        for suffix in ('', 'records/', 'stats/'):
            response = self.client.get(f'/api/v1/experiments/{missing}/{suffix}')
            self.assertEqual(response.status_code, status.HTTP_404_NOT_FOUND)


@unittest.skipUnless(os.environ.get('STABILITY_SLOW_TESTS'), 'set STABILITY_SLOW_TESTS=1 to run')
class GeneticVersusGreedyTests(SimpleTestCase):
    """Default attacks on the medium corpus, GA against GS on the same examples"""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.matrix = RunMatrix(datasets=('medium',), thresholds=(0.5,), examples_per_cell=20)
        models = train_models(cls.matrix.datasets, TrainingSettings.from_settings())
        cls.results = run_matrix(
            cls.matrix, models, build_embeddings(), AttackConfig.from_settings(), workers=os.cpu_count() or 1,
        )

    def test_genetic_search_is_at_least_as_successful(self):
        matrix = self.matrix
        stats = summarize(self.results)

        def cell(measure, search):
            return stats[CellKey('medium', measure, 0.5, search)]

        at_least_as_good = [
            m for m in matrix.measures
            if cell(m, GENETIC).success_rate >= cell(m, GREEDY).success_rate
        ]
        self.assertGreaterEqual(len(at_least_as_good), 3)
        self.assertTrue(any(
            cell(m, GENETIC).min_perturbations is not None
            and cell(m, GREEDY).min_perturbations is not None
            and cell(m, GENETIC).min_perturbations <= cell(m, GREEDY).min_perturbations
            for m in matrix.measures
        ))

    def test_genetic_search_costs_a_bounded_multiple_of_greedy(self):
        timings = aggregate_timings(self.results)
        ratio = time_ratio(timings, 'medium')
        self.assertIsNotNone(ratio)
        self.assertGreaterEqual(ratio, 1.5)
        self.assertLessEqual(ratio, 4.0)
