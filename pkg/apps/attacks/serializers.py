from rest_framework import serializers

from apps.attacks.config import GENETIC, GREEDY
from apps.explainers.serializers import FeatureSerializer
from apps.similarity.measures import MEASURES


class AttackRequestSerializer(serializers.Serializer):
    text = serializers.CharField(max_length=5000, trim_whitespace=True)
    measure = serializers.ChoiceField(choices=list(MEASURES), required=False)
    tau = serializers.FloatField(required=False)
    search = serializers.ChoiceField(
        choices=[GREEDY, GENETIC, 'gs', 'ga'], required=False, default=GREEDY
    )
    epsilon = serializers.FloatField(required=False)
    delta = serializers.FloatField(required=False)
    topk = serializers.IntegerField(min_value=0, required=False)
    neighbors = serializers.IntegerField(min_value=0, max_value=200, required=False)
    seed = serializers.IntegerField(min_value=0, required=False)
    population = serializers.IntegerField(min_value=2, max_value=100, required=False)
    generations = serializers.IntegerField(min_value=1, max_value=100, required=False)
    strict_semantic = serializers.BooleanField(required=False, allow_null=True, default=None)

    def validate_search(self, value):
        return {'gs': GREEDY, 'ga': GENETIC}.get(value, value)


class PerturbationSerializer(serializers.Serializer):
    index = serializers.IntegerField()
    old = serializers.CharField()
    new = serializers.CharField()
    similarity_after = serializers.FloatField()


class AttackOutcomeSerializer(serializers.Serializer):
    search = serializers.CharField()
    success = serializers.BooleanField()
    original_text = serializers.CharField(source='base_doc.text')
    perturbed_text = serializers.SerializerMethodField()
    final_similarity = serializers.FloatField()
    perturbation_count = serializers.IntegerField()
    perturbation_rate = serializers.FloatField()
    perturbations = PerturbationSerializer(many=True)
    queries = serializers.IntegerField()
    explain_calls = serializers.IntegerField()
    semantic_ok = serializers.BooleanField()
    semantic_similarity = serializers.FloatField(allow_null=True)
    constraints = serializers.SerializerMethodField()
    original_explanation = serializers.SerializerMethodField()
    perturbed_explanation = serializers.SerializerMethodField()
    generations = serializers.ListField(child=serializers.FloatField())

    def get_perturbed_text(self, obj):
        return obj.surface()

    def get_constraints(self, obj):
        return obj.report.as_dict()

    def _features(self, explanation):
        return FeatureSerializer(
            [{'word': w, 'weight': v} for w, v in explanation.features], many=True
        ).data

    def get_original_explanation(self, obj):
        return self._features(obj.base_explanation)

    def get_perturbed_explanation(self, obj):
        return self._features(obj.final_explanation)
