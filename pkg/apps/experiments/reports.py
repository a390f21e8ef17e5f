"""Attack statistics rendered as tables: thresholds down, measures across, GA/GS paired."""
import csv
import logging
from io import BytesIO

from reportlab.lib import colors
from reportlab.lib.pagesizes import A4, landscape
from reportlab.lib.styles import ParagraphStyle, getSampleStyleSheet
from reportlab.platypus import Paragraph, SimpleDocTemplate, Spacer, Table, TableStyle

from apps.attacks.config import GENETIC, GREEDY
from apps.exceptions import ParameterError
from apps.experiments.stats import time_ratio
from apps.similarity.measures import MEASURE_LABELS, MEASURES

logger = logging.getLogger(__name__)

STATISTICS = [
    ('success_rate', 'Attack Success Rates'),
    ('mean_similarity', 'Mean Similarities'),
    ('avg_perturbation_rate', 'Average Perturbation Rate for Successful Attacks'),
    ('min_perturbations', 'Minimum Perturbations for a Successful Attack'),
]
SEARCH_LABELS = {GENETIC: 'GA', GREEDY: 'GS'}
FORMATS = ('csv', 'markdown', 'pdf')
TIMING_TITLE = 'Time per Example'
TIMING_HEADER = ['search', 'attacks', 'mean seconds', 'mean explain calls']


def render(statistic, value, missing='-'):
    if value is None:
        return missing
    if statistic == 'min_perturbations':
        return str(int(value))
    return f'{value:.2f}'


class Layout:
    """Row and column order shared by every output format"""

    def __init__(self, stats):
        keys = list(stats)
        self.stats = stats
        self.datasets = list(dict.fromkeys(k.dataset for k in keys))
        self.thresholds = sorted({k.tau for k in keys})
        present = {k.measure for k in keys}
        self.measures = [m for m in MEASURES if m in present]
        searches = {k.search for k in keys}
        self.searches = [s for s in (GENETIC, GREEDY) if s in searches]

    def columns(self):
        return [(m, s) for m in self.measures for s in self.searches]

    def header(self):
        return ['τ'] + [f'{MEASURE_LABELS[m]} {SEARCH_LABELS[s]}' for m, s in self.columns()]

    def cell(self, dataset, tau, measure, search):
        for key, value in self.stats.items():
            if key == (dataset, measure, tau, search):
                return value
        return None

    def rows(self, statistic, dataset, missing='-'):
        for tau in self.thresholds:
            row = [f'{tau:.2f}']
            for measure, search in self.columns():
                stats = self.cell(dataset, tau, measure, search)
                row.append(render(statistic, getattr(stats, statistic, None), missing))
            yield row


def timing_rows(timings, dataset):
    for search in (GENETIC, GREEDY):
        timing = timings.get((dataset, search))
        if timing is None:
            continue
        yield [
            SEARCH_LABELS[search], str(timing.runs),
            f'{timing.mean_seconds:.3f}', f'{timing.mean_explain_calls:.1f}',
        ]


def ratio_text(timings, dataset):
    ratio = time_ratio(timings, dataset)
    return 'GA/GS time ratio: ' + ('-' if ratio is None else f'{ratio:.2f}')


def _timing_datasets(timings):
    return list(dict.fromkeys(dataset for dataset, _ in timings))


def _markdown(layout, timings=None):
    lines = []
    for statistic, title in STATISTICS:
        lines.append(f'## {title}')
        lines.append('')
        for dataset in layout.datasets:
            header = layout.header()
            lines.append(f'### {dataset}')
            lines.append('')
            lines.append('| ' + ' | '.join(header) + ' |')
            lines.append('|' + '|'.join('---' for _ in header) + '|')
            for row in layout.rows(statistic, dataset):
                lines.append('| ' + ' | '.join(row) + ' |')
            lines.append('')
    if timings:
        lines.append(f'## {TIMING_TITLE}')
        lines.append('')
        for dataset in _timing_datasets(timings):
            lines.append(f'### {dataset}')
            lines.append('')
            lines.append('| ' + ' | '.join(TIMING_HEADER) + ' |')
            lines.append('|' + '|'.join('---' for _ in TIMING_HEADER) + '|')
            for row in timing_rows(timings, dataset):
                lines.append('| ' + ' | '.join(row) + ' |')
            lines.append('')
            lines.append(ratio_text(timings, dataset))
            lines.append('')
    return '\n'.join(lines)


def _csv(layout, handle):
    writer = csv.writer(handle, lineterminator='\n')
    writer.writerow(['dataset', 'tau', 'measure', 'search'] + [s for s, _ in STATISTICS])
    for dataset in layout.datasets:
        for tau in layout.thresholds:
            for measure, search in layout.columns():
                stats = layout.cell(dataset, tau, measure, search)
                if stats is None:
                    continue
                writer.writerow([dataset, f'{tau:.2f}', measure, SEARCH_LABELS[search]] + [
                    render(s, getattr(stats, s), missing='') for s, _ in STATISTICS
                ])


def _table(data):
    table = Table(data, repeatRows=1)
    table.setStyle(TableStyle([
        ('BACKGROUND', (0, 0), (-1, 0), colors.HexColor('#ecf0f1')),
        ('TEXTCOLOR', (0, 0), (-1, -1), colors.HexColor('#2c3e50')),
        ('FONTNAME', (0, 0), (-1, 0), 'Helvetica-Bold'),
        ('FONTNAME', (0, 1), (-1, -1), 'Helvetica'),
        ('FONTSIZE', (0, 0), (-1, -1), 7),
        ('ALIGN', (1, 0), (-1, -1), 'CENTER'),
        ('GRID', (0, 0), (-1, -1), 0.5, colors.HexColor('#bdc3c7')),
    ]))
    return table


def _pdf(layout, timings=None):
    buffer = BytesIO()
    doc = SimpleDocTemplate(
        buffer, pagesize=landscape(A4),
        rightMargin=36, leftMargin=36, topMargin=36, bottomMargin=18,
    )
    styles = getSampleStyleSheet()
    title_style = ParagraphStyle(
        'ReportTitle', parent=styles['Heading1'], fontSize=18, spaceAfter=18,
        textColor=colors.HexColor('#2c3e50'), alignment=1,
    )
    header_style = ParagraphStyle(
        'ReportHeader', parent=styles['Heading2'], fontSize=13, spaceAfter=8,
        textColor=colors.HexColor('#34495e'),
    )

    story = [Paragraph('EXPLANATION STABILITY REPORT', title_style)]
    for statistic, title in STATISTICS:
        for dataset in layout.datasets:
            story.append(Paragraph(f'{title} ({dataset})', header_style))
            # reportlab's built-in fonts lack the Greek tau
            data = [['tau'] + layout.header()[1:]] + list(layout.rows(statistic, dataset))
            story.append(_table(data))
            story.append(Spacer(1, 14))
    for dataset in _timing_datasets(timings or {}):
        story.append(Paragraph(f'{TIMING_TITLE} ({dataset})', header_style))
        story.append(_table([TIMING_HEADER] + list(timing_rows(timings, dataset))))
        story.append(Paragraph(ratio_text(timings, dataset), styles['Normal']))
        story.append(Spacer(1, 14))
    doc.build(story)
    return buffer.getvalue()


def write_report(stats, path, fmt='markdown', timings=None):
    """Write the four statistic tables for ``{CellKey: CellStats}`` to ``path``.

    ``timings`` (``{(dataset, search): SearchTiming}``) adds a time-per-example section to
    markdown and PDF reports. The CSV report keeps one row per cell and leaves it out.
    """
    if fmt not in FORMATS:
        raise ParameterError(f'unknown report format {fmt!r}; choose from {", ".join(FORMATS)}')
    if not stats:
        raise ParameterError('nothing to report')
    layout = Layout(stats)
    if fmt == 'pdf':
        with open(path, 'wb') as handle:
            handle.write(_pdf(layout, timings))
    elif fmt == 'csv':
        with open(path, 'w', newline='', encoding='utf-8') as handle:
            _csv(layout, handle)
    else:
        with open(path, 'w', encoding='utf-8') as handle:
            handle.write(_markdown(layout, timings))
    logger.info('Wrote %s report to %s', fmt, path)
    return path
