"""Shared test setup: no disk cache, single-threaded BLAS."""

import os

for variable in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(variable, "1")

import pytest  # noqa: E402

from dpflow.config import settings  # noqa: E402


@pytest.fixture(autouse=True)
def _no_disk_cache(monkeypatch):
    """Keep oracle results out of the working directory."""
    monkeypatch.setattr(settings, "cache_enabled", False)
    monkeypatch.setattr(settings, "num_threads", 1)
