"""
Tests for the two-level census cache.
"""

import os
import json
import logging

from modules.cache import CensusCache, cache_census

# Configure logging
logger = logging.getLogger(__name__)


def test_memory_only_cache():
    cache = CensusCache()
    key = cache.generate_key('census', 'a', 'b')
    assert cache.get(key) is None
    cache.set(key, {'component_count': 2})
    assert cache.get(key) == {'component_count': 2}
    assert cache.stats() == {'hits': 1, 'misses': 1, 'memory_items': 1}


def test_keys_depend_on_arguments():
    cache = CensusCache()
    assert cache.generate_key('census', 'x', 'y') == cache.generate_key('census', 'x', 'y')
    assert cache.generate_key('census', 'x', 'y') != cache.generate_key('census', 'y', 'x')
    assert cache.generate_key('census', 'x') != cache.generate_key('other', 'x')


def test_file_tier_survives_a_new_instance(tmp_path):
    first = CensusCache(str(tmp_path))
    key = first.generate_key('census', 'g')
    first.set(key, {'sizes': [60, 60]})
    assert os.path.exists(tmp_path / f"{key}.json")

    second = CensusCache(str(tmp_path))
    assert second.get(key) == {'sizes': [60, 60]}
    assert second.stats()['memory_items'] == 1


def test_expired_and_corrupt_files_are_dropped(tmp_path):
    cache = CensusCache(str(tmp_path), file_ttl=-1)
    key = cache.generate_key('census', 'old')
    cache._set_in_file(key, {'n': 5})
    assert cache._get_from_file(key) is None
    assert not os.path.exists(tmp_path / f"{key}.json")

    bad = tmp_path / 'broken.json'
    bad.write_text('{not json')
    assert cache._get_from_file('broken') is None
    assert not bad.exists()


def test_lru_eviction():
    cache = CensusCache(max_memory_items=2)
    for key in ('a', 'b', 'c'):
        cache.set(key, key)
    assert cache.stats()['memory_items'] == 2
    assert cache.get('a') is None
    assert cache.get('c') == 'c'


def test_invalidate_and_clear(tmp_path):
    cache = CensusCache(str(tmp_path))
    cache.set('k1', 1)
    cache.set('k2', 2)
    cache.invalidate('k1')
    assert cache.get('k1') is None
    cache.clear()
    assert cache.get('k2') is None
    assert not [f for f in os.listdir(tmp_path) if f.endswith('.json')]


def test_cache_census_decorator(tmp_path):
    calls = []
    cache = CensusCache(str(tmp_path))

    @cache_census(cache, 'census')
    def census(x_key, y_key):
        calls.append((x_key, y_key))
        return {'component_count': len(calls)}

    assert census('x', 'y') == {'component_count': 1}
    assert census('x', 'y') == {'component_count': 1}
    assert census('x', 'y', force_refresh=True) == {'component_count': 2}
    assert len(calls) == 2
    files = [f for f in os.listdir(tmp_path) if f.endswith('.json')]
    assert len(files) == 1
    with open(tmp_path / files[0]) as f:
        assert json.load(f)['value'] == {'component_count': 2}


def test_cache_census_without_cache():
    calls = []

    @cache_census(None, 'census')
    def census(x_key):
        calls.append(x_key)
        return len(calls)

    assert census('x') == 1
    assert census('x', force_refresh=True) == 2
