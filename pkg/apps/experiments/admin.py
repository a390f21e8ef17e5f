from django.contrib import admin

from .models import AttackRecord, ExperimentRun


class AttackRecordInline(admin.TabularInline):
    model = AttackRecord
    extra = 0
    fields = ['dataset', 'measure', 'tau', 'search', 'example_index', 'success', 'final_similarity',
              'perturbation_count']
    readonly_fields = fields
    can_delete = False
    show_change_link = True


@admin.register(ExperimentRun)
class ExperimentRunAdmin(admin.ModelAdmin):
    list_display = ['name', 'public_id', 'master_seed', 'status', 'created_at', 'completed_at']
    list_filter = ['status']
    search_fields = ['name', 'public_id']
    readonly_fields = ['public_id', 'created_at', 'completed_at']
    inlines = [AttackRecordInline]


@admin.register(AttackRecord)
class AttackRecordAdmin(admin.ModelAdmin):
    list_display = ['run', 'dataset', 'measure', 'tau', 'search', 'example_index', 'success',
                    'final_similarity', 'perturbation_count']
    list_filter = ['dataset', 'measure', 'search', 'success']
    search_fields = ['original_text', 'perturbed_text']
