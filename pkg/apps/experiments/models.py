import uuid

from django.core.exceptions import ObjectDoesNotExist, ValidationError
from django.db import models, transaction
from django.http import Http404
from django.utils import timezone

from apps.attacks.config import GENETIC, GREEDY
from apps.experiments.runner import CellKey
from apps.experiments.stats import aggregate


class ExperimentRunManager(models.Manager):
    def get_public_id(self, public_id):
        try:
            instance = self.get(public_id=public_id)
            return instance
        except (ObjectDoesNotExist, ValidationError, ValueError, TypeError):
            raise Http404

    def start(self, experiment, out_dir='', name=''):
        """Create the run row before any attack executes"""
        return self.create(
            name=name or f'seed {experiment.matrix.master_seed}',
            master_seed=experiment.matrix.master_seed,
            config={key: list(value) if isinstance(value, tuple) else value
                    for key, value in experiment.source.items()},
            out_dir=str(out_dir),
            status=ExperimentRun.RUNNING,
        )

    @transaction.atomic
    def record_results(self, experiment, results, out_dir='', name=''):
        """Store a finished matrix run and one AttackRecord per outcome"""
        run = self.start(experiment, out_dir=out_dir, name=name)
        run.complete(results)
        return run


class ExperimentRun(models.Model):
    """One execution of an experiment config"""
    RUNNING = 'running'
    COMPLETED = 'completed'
    FAILED = 'failed'

    STATUS_CHOICES = [
        (RUNNING, 'Running'),
        (COMPLETED, 'Completed'),
        (FAILED, 'Failed'),
    ]

    public_id = models.UUIDField(default=uuid.uuid4, unique=True, editable=False)
    name = models.CharField(max_length=200, blank=True)
    master_seed = models.BigIntegerField(default=0)
    config = models.JSONField(default=dict, blank=True)
    out_dir = models.CharField(max_length=500, blank=True, help_text="Run directory holding the CSV artifacts")
    status = models.CharField(max_length=20, choices=STATUS_CHOICES, default=RUNNING)

    created_at = models.DateTimeField(auto_now_add=True)
    completed_at = models.DateTimeField(null=True, blank=True)

    objects = ExperimentRunManager()

    class Meta:
        ordering = ['-created_at']
        indexes = [
            models.Index(fields=['status'], name='experiment_status_idx'),
        ]

    def __str__(self):
        return f"{self.name or self.public_id} ({self.status})"

    @transaction.atomic
    def complete(self, results):
        """Store one AttackRecord per outcome and mark the run completed"""
        records = []
        for key, outcomes in results:
            for example, outcome in enumerate(outcomes):
                records.append(AttackRecord(
                    run=self,
                    dataset=key.dataset,
                    measure=key.measure,
                    tau=key.tau,
                    search=key.search,
                    example_index=example,
                    success=outcome.success,
                    final_similarity=outcome.final_similarity,
                    perturbation_count=outcome.perturbation_count,
                    base_length=outcome.base_length,
                    queries=outcome.queries,
                    explain_calls=outcome.explain_calls,
                    semantic_ok=outcome.semantic_ok,
                    semantic_similarity=outcome.semantic_similarity,
                    original_text=outcome.base_doc.text,
                    perturbed_text=outcome.surface(),
                ))
        AttackRecord.objects.bulk_create(records)
        self.status = self.COMPLETED
        self.completed_at = timezone.now()
        self.save(update_fields=['status', 'completed_at'])

    def fail(self):
        self.status = self.FAILED
        self.save(update_fields=['status'])

    def cell_stats(self):
        """CellStats per cell, computed from the stored records"""
        cells = {}
        for record in self.records.all():
            cells.setdefault(record.cell_key, []).append(record)
        return {key: aggregate(rows) for key, rows in cells.items()}


class AttackRecord(models.Model):
    """A single attack outcome inside an experiment run"""
    SEARCH_CHOICES = [
        (GREEDY, 'Greedy search'),
        (GENETIC, 'Genetic algorithm'),
    ]

    run = models.ForeignKey(ExperimentRun, on_delete=models.CASCADE, related_name='records')
    dataset = models.CharField(max_length=200)
    measure = models.CharField(max_length=20)
    tau = models.FloatField()
    search = models.CharField(max_length=10, choices=SEARCH_CHOICES)
    example_index = models.PositiveIntegerField()

    success = models.BooleanField(default=False)
    final_similarity = models.FloatField()
    perturbation_count = models.PositiveIntegerField(default=0)
    base_length = models.PositiveIntegerField(help_text="Non-punctuation tokens of the base document")
    queries = models.PositiveIntegerField(default=0)
    explain_calls = models.PositiveIntegerField(default=0)
    semantic_ok = models.BooleanField(default=False)
    semantic_similarity = models.FloatField(null=True, blank=True)

    original_text = models.TextField()
    perturbed_text = models.TextField(help_text="Replaced words wrapped in **")

    class Meta:
        ordering = ['dataset', 'measure', 'tau', 'search', 'example_index']
        unique_together = ['run', 'dataset', 'measure', 'tau', 'search', 'example_index']
        indexes = [
            models.Index(fields=['run', 'success'], name='record_run_success_idx'),
            models.Index(fields=['measure', 'tau'], name='record_measure_tau_idx'),
        ]

    def __str__(self):
        return f"{self.dataset}/{self.measure}/{self.tau}/{self.search} #{self.example_index}"

    @property
    def cell_key(self):
        return CellKey(self.dataset, self.measure, self.tau, self.search)
