from rest_framework import serializers


class ExplainRequestSerializer(serializers.Serializer):
    text = serializers.CharField(max_length=5000, trim_whitespace=True)
    seed = serializers.IntegerField(min_value=0, required=False, default=0)
    samples = serializers.IntegerField(min_value=10, max_value=20000, required=False)
    features = serializers.IntegerField(min_value=1, max_value=100, required=False)
    mask_rate = serializers.FloatField(required=False)
    kernel_width = serializers.FloatField(required=False)

    def validate_mask_rate(self, value):
        if not 0 < value < 1:
            raise serializers.ValidationError("mask_rate must lie strictly between 0 and 1.")
        return value

    def validate_kernel_width(self, value):
        if value <= 0:
            raise serializers.ValidationError("kernel_width must be positive.")
        return value


class FeatureSerializer(serializers.Serializer):
    word = serializers.CharField()
    weight = serializers.FloatField()


def explanation_payload(model, doc, explanation, distribution):
    """JSON body shared by the explain and attack endpoints"""
    return {
        'text': doc.text,
        'label': model.classes[distribution.label],
        'probabilities': {
            name: p for name, p in zip(model.classes, distribution.probabilities)
        },
        'target_class': model.classes[explanation.target_class],
        'seed': explanation.seed,
        'features': FeatureSerializer(
            [{'word': w, 'weight': v} for w, v in explanation.features], many=True
        ).data,
    }
