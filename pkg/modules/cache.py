"""
Persistent cache for oracle censuses.
Component censuses of small FS instances are deterministic and expensive
at n = 7 and above, so verification runs keep them in a two-level
(memory + JSON file) cache keyed by the instance.
"""

import os
import json
import time
import hashlib
import logging
import threading
from collections import OrderedDict
from functools import wraps
from typing import Any, Callable, Dict, Optional

# Configure logging
logger = logging.getLogger(__name__)

# Bumped whenever the stored census layout changes
CACHE_SCHEMA = 1

# Censuses never go stale; the TTL only bounds disk growth
DEFAULT_FILE_TTL = 30 * 24 * 3600


class CensusCache:
    """
    Census store with a bounded in-memory LRU tier and an optional
    directory of JSON files shared between runs.

    Memory entries live until evicted. File entries carry the schema
    version and an expiry time; stale, foreign or unreadable files are
    deleted on read.
    """

    def __init__(self,
                cache_dir: Optional[str] = None,
                file_ttl: int = DEFAULT_FILE_TTL,
                max_memory_items: int = 4096):
        """
        Args:
            cache_dir: Directory for census files (None keeps memory only)
            file_ttl: Lifetime of a census file in seconds
            max_memory_items: Census count kept in memory
        """
        self.cache_dir = cache_dir
        self.file_ttl = file_ttl
        self.max_memory_items = max_memory_items

        self._memory: 'OrderedDict[str, Any]' = OrderedDict()
        self._lock = threading.RLock()
        self.hits = 0
        self.misses = 0

        if cache_dir:
            os.makedirs(cache_dir, exist_ok=True)
            logger.debug(f"Census cache directory: {cache_dir}")

    def generate_key(self, prefix: str, *args, **kwargs) -> str:
        """
        Key for a census request.

        Args:
            prefix: Kind of record, e.g. "census"
            *args, **kwargs: JSON-serializable request parameters (graph6
                strings for the oracle)

        Returns:
            str: Hex digest naming the record
        """
        payload = json.dumps([CACHE_SCHEMA, prefix, list(args), sorted(kwargs.items())], separators=(',', ':'))
        return hashlib.sha256(payload.encode('utf-8')).hexdigest()

    def get(self, key: str) -> Optional[Any]:
        """
        Look a census up in memory, then on disk; disk hits are promoted to memory.

        Returns:
            The stored value, or None on a miss
        """
        with self._lock:
            if key in self._memory:
                self._memory.move_to_end(key)
                self.hits += 1
                return self._memory[key]

        value = self._get_from_file(key)
        with self._lock:
            if value is None:
                self.misses += 1
                return None
            self.hits += 1
            self._remember(key, value)
        return value

    def set(self, key: str, value: Any) -> None:
        with self._lock:
            self._remember(key, value)
        self._set_in_file(key, value)

    def _remember(self, key: str, value: Any) -> None:
        self._memory[key] = value
        self._memory.move_to_end(key)
        while len(self._memory) > self.max_memory_items:
            self._memory.popitem(last=False)

    def _file_path(self, key: str) -> Optional[str]:
        if not self.cache_dir:
            return None
        return os.path.join(self.cache_dir, f"{key}.json")

    def _discard_file(self, path: str) -> None:
        try:
            os.remove(path)
        except OSError:
            pass

    def _get_from_file(self, key: str) -> Optional[Any]:
        path = self._file_path(key)
        if path is None or not os.path.exists(path):
            return None
        try:
            with open(path, 'r', encoding='utf-8') as f:
                record = json.load(f)
            fresh = record.get('schema') == CACHE_SCHEMA and time.time() <= record['expires_at']
        except (json.JSONDecodeError, KeyError, AttributeError, OSError) as e:
            logger.warning(f"Dropping unreadable census file {path}: {str(e)}")
            self._discard_file(path)
            return None
        if not fresh:
            self._discard_file(path)
            return None
        return record['value']

    def _set_in_file(self, key: str, value: Any) -> None:
        path = self._file_path(key)
        if path is None:
            return
        now = time.time()
        record = {'schema': CACHE_SCHEMA, 'value': value, 'created_at': now, 'expires_at': now + self.file_ttl}
        tmp_path = f"{path}.{os.getpid()}.{threading.get_ident()}.tmp"
        try:
            with open(tmp_path, 'w', encoding='utf-8') as f:
                json.dump(record, f)
            os.replace(tmp_path, path)
        except OSError as e:
            logger.warning(f"Could not write census file {path}: {str(e)}")
            self._discard_file(tmp_path)

    def invalidate(self, key: str) -> None:
        with self._lock:
            self._memory.pop(key, None)
        path = self._file_path(key)
        if path:
            self._discard_file(path)

    def clear(self) -> None:
        """Drop every census from memory and from the cache directory."""
        with self._lock:
            self._memory.clear()
        if not self.cache_dir:
            return
        for name in os.listdir(self.cache_dir):
            if name.endswith('.json'):
                self._discard_file(os.path.join(self.cache_dir, name))
        logger.info(f"Cleared census cache {self.cache_dir}")

    def stats(self) -> Dict[str, int]:
        with self._lock:
            return {'hits': self.hits, 'misses': self.misses, 'memory_items': len(self._memory)}


def cache_census(cache: Optional[CensusCache], prefix: str):
    """
    Decorator storing a function's JSON result under its arguments.

    With no cache the function runs every time. Callers may pass
    force_refresh=True to recompute and overwrite the stored record.

    Args:
        cache: CensusCache instance or None
        prefix: Kind of record, passed to generate_key
    """
    def decorator(func: Callable[..., Any]) -> Callable[..., Any]:
        @wraps(func)
        def wrapper(*args, **kwargs):
            force_refresh = kwargs.pop('force_refresh', False)
            if cache is None:
                return func(*args, **kwargs)

            key = cache.generate_key(prefix, *args, **kwargs)
            if not force_refresh:
                stored = cache.get(key)
                if stored is not None:
                    return stored
            else:
                logger.debug(f"Recomputing {prefix} record {key[:12]}")

            result = func(*args, **kwargs)
            cache.set(key, result)
            return result
        return wrapper
    return decorator
