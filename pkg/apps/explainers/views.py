import logging

from rest_framework import status
from rest_framework.permissions import AllowAny
from rest_framework.response import Response
from rest_framework.viewsets import ViewSet

from apps.classifiers.bow import predict
from apps.exceptions import IngestionError, StabilityError
from apps.explainers.lime import ExplainerParams, explain
from apps.explainers.serializers import ExplainRequestSerializer, explanation_payload
from apps.resources import configured_model
from apps.texts.documents import tokenize

logger = logging.getLogger(__name__)


class ExplainViewSet(ViewSet):
    """Explain the configured classifier's prediction for posted text"""
    serializer_class = ExplainRequestSerializer
    permission_classes = (AllowAny,)
    http_method_names = ['post']

    def create(self, request, *args, **kwargs):
        serializer = self.serializer_class(data=request.data)
        serializer.is_valid(raise_exception=True)
        data = serializer.validated_data

        try:
            model = configured_model()
        except IngestionError as e:
            logger.error('Explain request without a usable model: %s', e)
            return Response({'error': str(e)}, status=status.HTTP_503_SERVICE_UNAVAILABLE)

        try:
            params = ExplainerParams.from_settings(
                n=data.get('samples'),
                m=data.get('features'),
                mask_rate=data.get('mask_rate'),
                kernel_width=data.get('kernel_width'),
            )
            doc = tokenize(data['text'])
            explanation = explain(model, doc, params, data['seed'])
        except StabilityError as e:
            return Response({'error': str(e)}, status=status.HTTP_400_BAD_REQUEST)

        return Response(explanation_payload(model, doc, explanation, predict(model, doc)))
