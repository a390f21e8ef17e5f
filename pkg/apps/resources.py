"""The model and embedding table named in settings, loaded once per file version."""
import logging
import os
from functools import lru_cache

from django.conf import settings

from apps.classifiers.bow import load_model
from apps.embeddings.store import load_embeddings
from apps.exceptions import IngestionError

logger = logging.getLogger(__name__)


def _stamp(path):
    try:
        return os.stat(path).st_mtime_ns
    except OSError as exc:
        raise IngestionError(
            f'{exc.strerror}; run "manage.py seed_data" or set the path in settings', path=path
        ) from exc


@lru_cache(maxsize=4)
def _model(path, stamp):
    logger.info('Loading classifier from %s', path)
    return load_model(path)


@lru_cache(maxsize=4)
def _store(path, stamp):
    logger.info('Loading embeddings from %s', path)
    return load_embeddings(path)


def configured_model():
    path = str(settings.STABILITY_MODEL_PATH)
    return _model(path, _stamp(path))


def configured_store():
    path = str(settings.STABILITY_EMBEDDINGS_PATH)
    return _store(path, _stamp(path))
