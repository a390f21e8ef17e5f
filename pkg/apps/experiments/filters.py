import django_filters

from .models import AttackRecord


class AttackRecordFilter(django_filters.FilterSet):
    tau = django_filters.NumberFilter(field_name='tau')
    min_similarity = django_filters.NumberFilter(field_name='final_similarity', lookup_expr='gte')
    max_similarity = django_filters.NumberFilter(field_name='final_similarity', lookup_expr='lte')

    class Meta:
        model = AttackRecord
        fields = ['dataset', 'measure', 'tau', 'search', 'success', 'semantic_ok']
