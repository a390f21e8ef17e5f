from rest_framework import routers
from django.urls import path

from apps.attacks.views import AttackViewSet
from apps.experiments import views
from apps.explainers.views import ExplainViewSet

router = routers.SimpleRouter()

#EXPLAIN
router.register(r'explain', ExplainViewSet, basename='explain')

#ATTACK
router.register(r'attack', AttackViewSet, basename='attack')


urlpatterns = [
    *router.urls,
    path('experiments/', views.ExperimentRunListView.as_view(), name='experiment-list'),
    path('experiments/<uuid:public_id>/', views.ExperimentRunDetailView.as_view(), name='experiment-detail'),
    path('experiments/<uuid:public_id>/records/', views.AttackRecordListView.as_view(), name='experiment-records'),
    path('experiments/<uuid:public_id>/stats/', views.experiment_stats, name='experiment-stats'),
]
