import os

from apps.commands import StabilityCommand
from apps.experiments.artifacts import read_runs, read_timings, summarize
from apps.experiments.reports import FORMATS, ratio_text, timing_rows, write_report
from apps.experiments.stats import aggregate_timings

EXTENSIONS = {'csv': 'csv', 'markdown': 'md', 'pdf': 'pdf'}


class Command(StabilityCommand):
    help = 'Render the four statistic tables of a run directory, plus time per example'

    def add_arguments(self, parser):
        parser.add_argument('--runs', required=True, help='Run directory written by "experiment"')
        parser.add_argument('--format', choices=FORMATS, default='markdown')
        parser.add_argument('--out', help='Report file (defaults to report.<ext> in the run directory)')

    def run(self, *args, **options):
        stats = summarize(read_runs(options['runs']))
        timings = None
        if os.path.exists(os.path.join(options['runs'], 'timings.csv')):
            timings = aggregate_timings(read_timings(options['runs']))
        else:
            self.stdout.write(self.style.WARNING('⚠️ No timings.csv, skipping time per example'))

        fmt = options['format']
        path = options['out'] or os.path.join(options['runs'], f'report.{EXTENSIONS[fmt]}')
        write_report(stats, path, fmt, timings=timings)

        for dataset in dict.fromkeys(dataset for dataset, _ in timings or {}):
            self.stdout.write(f'⏱️ {dataset}')
            for search, runs, seconds, calls in timing_rows(timings, dataset):
                self.stdout.write(f'  {search} {runs} attacks, {seconds}s and {calls} explain calls per attack')
            self.stdout.write(f'  {ratio_text(timings, dataset)}')
        self.stdout.write(self.style.SUCCESS(f'✅ {fmt} report for {len(stats)} cells written to {path}'))
