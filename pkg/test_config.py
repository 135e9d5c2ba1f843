"""
Tests for configuration loading and precedence.
"""

import logging

import pytest

from modules.config import ENV_VARS, HARD_MAX_N, LabConfig, load_config
from modules.errors import InvalidInputError

# Configure logging
logger = logging.getLogger(__name__)


@pytest.fixture(autouse=True)
def clean_env(monkeypatch, tmp_path):
    # setenv first so values a .env file injects are rolled back too
    for name in list(ENV_VARS.values()) + ['CI']:
        monkeypatch.setenv(name, '')
        monkeypatch.delenv(name)
    monkeypatch.chdir(tmp_path)


def test_defaults():
    config = load_config(dotenv_path=None)
    assert config == LabConfig()
    assert config.max_n == 10
    assert config.threads == 1
    assert not config.ci_mode


def test_environment_overrides_defaults(monkeypatch):
    monkeypatch.setenv('FS_MAX_N', '8')
    monkeypatch.setenv('FS_MEMORY_BUDGET_MB', '2.5')
    monkeypatch.setenv('FS_THREADS', '3')
    monkeypatch.setenv('CI', 'true')
    config = load_config()
    assert (config.max_n, config.memory_budget_mb, config.threads) == (8, 2.5, 3)
    assert config.memory_budget_bytes == int(2.5 * 1024 * 1024)
    assert config.ci_mode


def test_explicit_overrides_win(monkeypatch):
    monkeypatch.setenv('FS_THREADS', '3')
    config = load_config(threads=5, max_n=None)
    assert config.threads == 5
    assert config.max_n == 10


def test_dotenv_file(tmp_path, monkeypatch):
    env = tmp_path / 'lab.env'
    env.write_text("FS_CHUNK_SIZE=128\nFS_LOG_LEVEL=DEBUG\n")
    config = load_config(dotenv_path=str(env))
    assert config.chunk_size == 128
    assert config.log_level == 'DEBUG'


def test_environment_beats_dotenv(tmp_path, monkeypatch):
    env = tmp_path / 'lab.env'
    env.write_text("FS_CHUNK_SIZE=128\n")
    monkeypatch.setenv('FS_CHUNK_SIZE', '256')
    assert load_config(dotenv_path=str(env)).chunk_size == 256


def test_bad_environment_value(monkeypatch):
    monkeypatch.setenv('FS_MAX_N', 'ten')
    with pytest.raises(InvalidInputError):
        load_config()


@pytest.mark.parametrize('kwargs', [
    dict(max_n=0),
    dict(max_n=HARD_MAX_N + 1),
    dict(memory_budget_mb=0),
    dict(threads=0),
    dict(chunk_size=0),
])
def test_config_validation(kwargs):
    with pytest.raises(InvalidInputError):
        LabConfig(**kwargs)


def test_with_overrides_ignores_none():
    base = LabConfig()
    assert base.with_overrides(threads=None) is base
    assert base.with_overrides(threads=2).threads == 2
    assert set(base.to_dict()) == {'max_n', 'memory_budget_mb', 'threads', 'chunk_size', 'cache_dir',
                                   'log_level', 'ci_mode'}
