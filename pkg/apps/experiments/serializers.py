from dataclasses import asdict

from rest_framework import serializers

from .models import AttackRecord, ExperimentRun


class ExperimentRunSerializer(serializers.ModelSerializer):
    """Serializer for experiment list view"""
    record_count = serializers.IntegerField(read_only=True)
    success_count = serializers.IntegerField(read_only=True)

    class Meta:
        model = ExperimentRun
        fields = [
            'public_id', 'name', 'master_seed', 'status', 'record_count',
            'success_count', 'created_at', 'completed_at'
        ]


class ExperimentRunDetailSerializer(ExperimentRunSerializer):
    class Meta(ExperimentRunSerializer.Meta):
        fields = ExperimentRunSerializer.Meta.fields + ['config', 'out_dir']


class AttackRecordSerializer(serializers.ModelSerializer):
    class Meta:
        model = AttackRecord
        fields = [
            'id', 'dataset', 'measure', 'tau', 'search', 'example_index', 'success',
            'final_similarity', 'perturbation_count', 'base_length', 'queries',
            'explain_calls', 'semantic_ok', 'semantic_similarity', 'original_text',
            'perturbed_text'
        ]


def cell_stats_payload(stats):
    """Flatten ``{CellKey: CellStats}`` into JSON rows"""
    return [
        {**key._asdict(), **asdict(cell)}
        for key, cell in sorted(stats.items())
    ]
