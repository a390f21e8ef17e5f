import time

from apps.classifiers.bow import TrainingSettings, load_model
from apps.commands import StabilityCommand
from apps.embeddings.bundled import build_embeddings
from apps.embeddings.store import load_embeddings
from apps.experiments.artifacts import summarize, write_runs
from apps.experiments.config import build_experiment, read_config
from apps.experiments.models import ExperimentRun
from apps.experiments.runner import run_matrix, train_models


class Command(StabilityCommand):
    help = 'Run an attack experiment matrix and write its artifacts to a run directory'

    def add_arguments(self, parser):
        parser.add_argument('--config', required=True, help='key = value experiment file')
        parser.add_argument('--out', required=True, help='Run directory')
        parser.add_argument('--workers', type=int, help='Worker processes (overrides the config)')
        parser.add_argument('--name', default='', help='Label stored with the run')
        parser.add_argument('--no-record', action='store_true',
                            help='Skip storing the run in the database')

    def run(self, *args, **options):
        experiment = build_experiment(read_config(options['config']))
        matrix = experiment.matrix
        workers = options['workers'] or experiment.workers

        self.stdout.write(
            f'🧪 {matrix.size} attacks: {len(matrix.datasets)} datasets x '
            f'{len(matrix.measures)} measures x {len(matrix.thresholds)} thresholds x '
            f'{len(matrix.searches)} searches x {matrix.examples_per_cell} examples'
        )

        run = None
        if not options['no_record']:
            run = ExperimentRun.objects.start(experiment, out_dir=options['out'], name=options['name'])
            self.stdout.write(f'  📝 Recording as experiment {run.public_id}')

        try:
            results = self.execute_matrix(experiment, workers, options['out'])
            if run is not None:
                run.complete(results)
        except BaseException:
            if run is not None:
                run.fail()
                self.stdout.write(self.style.ERROR(f'❌ Experiment {run.public_id} failed'))
            raise

        for key, stats in summarize(results).items():
            self.stdout.write(
                f'  {key.dataset:<8} {key.measure:<10} tau={key.tau:<4} {key.search:<8} '
                f'success {stats.successes}/{stats.runs}'
            )
        self.stdout.write(self.style.SUCCESS(f'✅ Run artifacts written to {options["out"]}'))

    def execute_matrix(self, experiment, workers, out):
        matrix = experiment.matrix
        if experiment.embeddings:
            store = load_embeddings(experiment.embeddings)
        else:
            store = build_embeddings()
        if experiment.model:
            model = load_model(experiment.model)
        else:
            self.stdout.write('📂 Training one classifier per dataset...')
            model = train_models(matrix.datasets, TrainingSettings.from_settings())

        started = time.perf_counter()
        results = run_matrix(matrix, model, store, experiment.attack, workers=workers)
        write_runs(results, out)
        self.stdout.write(f'  ✅ Finished in {time.perf_counter() - started:.1f}s')
        return results
