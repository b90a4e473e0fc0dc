"""Simple caching layer using diskcache."""

import functools
import hashlib
import logging
import os
from typing import Any, Callable, Optional

import diskcache as dc

from .config import settings

logger = logging.getLogger(__name__)


class Cache:
    """Simple disk-based cache."""

    def __init__(self, cache_dir: Optional[str] = None):
        """Initialize cache with optional custom directory."""
        self.cache_dir = cache_dir or settings.cache_dir
        self._cache: Optional[dc.Cache] = None

    def _store(self) -> dc.Cache:
        if self._cache is None:
            os.makedirs(self.cache_dir, exist_ok=True)
            self._cache = dc.Cache(self.cache_dir)
        return self._cache

    def get(self, key: str) -> Any:
        """Get value from cache."""
        return self._store().get(key)

    def set(self, key: str, value: Any) -> None:
        """Store a value; failures to pickle are logged and skipped."""
        try:
            self._store().set(key, value)
        except Exception as e:
            logger.warning(f"Could not cache {key}: {e}")

    def clear(self) -> None:
        """Clear all cached values."""
        self._store().clear()


# Global cache instance, opened lazily
cache = Cache()


def cached(func: Callable) -> Callable:
    """Memoise a pure function on disk, keyed by the repr of its arguments."""

    @functools.wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        if not settings.cache_enabled:
            return func(*args, **kwargs)

        key_parts = [func.__module__, func.__qualname__]
        key_parts.extend(repr(arg) for arg in args)
        key_parts.extend(f"{k}={v!r}" for k, v in sorted(kwargs.items()))
        key = hashlib.md5("|".join(key_parts).encode()).hexdigest()

        cached_result = cache.get(key)
        if cached_result is not None:
            logger.debug(f"Cache hit for {func.__qualname__}")
            return cached_result

        result = func(*args, **kwargs)
        cache.set(key, result)
        return result

    return wrapper
