import uuid

import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name='ExperimentRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('public_id', models.UUIDField(default=uuid.uuid4, editable=False, unique=True)),
                ('name', models.CharField(blank=True, max_length=200)),
                ('master_seed', models.BigIntegerField(default=0)),
                ('config', models.JSONField(blank=True, default=dict)),
                ('out_dir', models.CharField(blank=True, help_text='Run directory holding the CSV artifacts', max_length=500)),
                ('status', models.CharField(choices=[('running', 'Running'), ('completed', 'Completed'), ('failed', 'Failed')], default='running', max_length=20)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('completed_at', models.DateTimeField(blank=True, null=True)),
            ],
            options={
                'ordering': ['-created_at'],
                'indexes': [models.Index(fields=['status'], name='experiment_status_idx')],
            },
        ),
        migrations.CreateModel(
            name='AttackRecord',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('dataset', models.CharField(max_length=200)),
                ('measure', models.CharField(max_length=20)),
                ('tau', models.FloatField()),
                ('search', models.CharField(choices=[('greedy', 'Greedy search'), ('genetic', 'Genetic algorithm')], max_length=10)),
                ('example_index', models.PositiveIntegerField()),
                ('success', models.BooleanField(default=False)),
                ('final_similarity', models.FloatField()),
                ('perturbation_count', models.PositiveIntegerField(default=0)),
                ('base_length', models.PositiveIntegerField(help_text='Non-punctuation tokens of the base document')),
                ('queries', models.PositiveIntegerField(default=0)),
                ('explain_calls', models.PositiveIntegerField(default=0)),
                ('semantic_ok', models.BooleanField(default=False)),
                ('semantic_similarity', models.FloatField(blank=True, null=True)),
                ('original_text', models.TextField()),
                ('perturbed_text', models.TextField(help_text='Replaced words wrapped in **')),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='records', to='apps_experiments.experimentrun')),
            ],
            options={
                'ordering': ['dataset', 'measure', 'tau', 'search', 'example_index'],
                'indexes': [
                    models.Index(fields=['run', 'success'], name='record_run_success_idx'),
                    models.Index(fields=['measure', 'tau'], name='record_measure_tau_idx'),
                ],
                'unique_together': {('run', 'dataset', 'measure', 'tau', 'search', 'example_index')},
            },
        ),
    ]
