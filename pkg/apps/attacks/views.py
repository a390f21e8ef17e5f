import logging

from rest_framework import status
from rest_framework.permissions import AllowAny
from rest_framework.response import Response
from rest_framework.viewsets import ViewSet

from apps.attacks.config import GENETIC, AttackConfig
from apps.attacks.genetic import genetic_attack
from apps.attacks.greedy import greedy_attack
from apps.attacks.serializers import AttackOutcomeSerializer, AttackRequestSerializer
from apps.exceptions import IngestionError, StabilityError
from apps.resources import configured_model, configured_store
from apps.texts.documents import tokenize

logger = logging.getLogger(__name__)


class AttackViewSet(ViewSet):
    """Search for a minimal perturbation of posted text that destabilises its explanation"""
    serializer_class = AttackRequestSerializer
    permission_classes = (AllowAny,)
    http_method_names = ['post']

    def create(self, request, *args, **kwargs):
        serializer = self.serializer_class(data=request.data)
        serializer.is_valid(raise_exception=True)
        data = serializer.validated_data

        try:
            model, store = configured_model(), configured_store()
        except IngestionError as e:
            logger.error('Attack request without model or embeddings: %s', e)
            return Response({'error': str(e)}, status=status.HTTP_503_SERVICE_UNAVAILABLE)

        try:
            cfg = AttackConfig.from_settings(
                measure=data.get('measure'),
                tau=data.get('tau'),
                epsilon=data.get('epsilon'),
                delta=data.get('delta'),
                k=data.get('topk'),
                j=data.get('neighbors'),
                seed=data.get('seed'),
                ga_population=data.get('population'),
                ga_generations=data.get('generations'),
                strict_semantic=data.get('strict_semantic'),
            )
            search = genetic_attack if data['search'] == GENETIC else greedy_attack
            outcome = search(model, store, tokenize(data['text']), cfg)
        except StabilityError as e:
            return Response({'error': str(e)}, status=status.HTTP_400_BAD_REQUEST)

        return Response(AttackOutcomeSerializer(outcome).data)
