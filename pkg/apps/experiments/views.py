from django.db.models import Count, Q
from django_filters.rest_framework import DjangoFilterBackend
from rest_framework import filters, generics, permissions
from rest_framework.decorators import api_view, permission_classes
from rest_framework.response import Response

from .filters import AttackRecordFilter
from .models import ExperimentRun
from .serializers import (
    AttackRecordSerializer, ExperimentRunDetailSerializer, ExperimentRunSerializer,
    cell_stats_payload,
)


def _with_counts(queryset):
    return queryset.annotate(
        record_count=Count('records'),
        success_count=Count('records', filter=Q(records__success=True)),
    )


class ExperimentRunListView(generics.ListAPIView):
    """List recorded experiment runs, newest first"""
    queryset = _with_counts(ExperimentRun.objects.all())
    serializer_class = ExperimentRunSerializer
    filter_backends = [DjangoFilterBackend, filters.OrderingFilter]
    filterset_fields = ['status', 'master_seed']
    ordering_fields = ['created_at', 'completed_at']
    ordering = ['-created_at']


class ExperimentRunDetailView(generics.RetrieveAPIView):
    queryset = _with_counts(ExperimentRun.objects.all())
    serializer_class = ExperimentRunDetailSerializer
    lookup_field = 'public_id'


class AttackRecordListView(generics.ListAPIView):
    """Attack outcomes of one run, filterable by cell and result"""
    serializer_class = AttackRecordSerializer
    filter_backends = [DjangoFilterBackend, filters.OrderingFilter]
    filterset_class = AttackRecordFilter
    ordering_fields = ['final_similarity', 'perturbation_count', 'example_index']

    def get_queryset(self):
        run = ExperimentRun.objects.get_public_id(self.kwargs['public_id'])
        return run.records.all()


@api_view(['GET'])
@permission_classes([permissions.AllowAny])
def experiment_stats(request, public_id):
    """Per-cell statistics computed from the stored records"""
    run = ExperimentRun.objects.get_public_id(public_id)
    return Response({
        'public_id': str(run.public_id),
        'cells': cell_stats_payload(run.cell_stats()),
    })
