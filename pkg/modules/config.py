"""
Centralized configuration for the FS lab.
Values are resolved from built-in defaults, then a .env file, then the
process environment, then explicit overrides passed by the caller.
"""

import os
import logging
from dataclasses import dataclass, field, fields, replace
from typing import Any, Dict, Optional

from dotenv import load_dotenv

from modules.errors import InvalidInputError

# Configure logging
logger = logging.getLogger(__name__)

# No configuration may push the oracle past this order
HARD_MAX_N = 12

ENV_VARS = {
    'max_n': 'FS_MAX_N',
    'memory_budget_mb': 'FS_MEMORY_BUDGET_MB',
    'threads': 'FS_THREADS',
    'chunk_size': 'FS_CHUNK_SIZE',
    'cache_dir': 'FS_CACHE_DIR',
    'log_level': 'FS_LOG_LEVEL',
}


@dataclass(frozen=True)
class LabConfig:
    """
    Runtime settings shared by the engines and the command-line front end.
    """
    max_n: int = 10
    memory_budget_mb: float = 16.0
    threads: int = 1
    chunk_size: int = 65536
    cache_dir: Optional[str] = None
    log_level: str = 'WARNING'
    ci_mode: bool = field(default=False, compare=False)

    def __post_init__(self):
        if self.max_n < 1:
            raise InvalidInputError(f"max_n must be positive, got {self.max_n}")
        if self.max_n > HARD_MAX_N:
            raise InvalidInputError(f"max_n cannot exceed {HARD_MAX_N}, got {self.max_n}")
        if self.memory_budget_mb <= 0:
            raise InvalidInputError(f"memory budget must be positive, got {self.memory_budget_mb}")
        if self.threads < 1:
            raise InvalidInputError(f"threads must be at least 1, got {self.threads}")
        if self.chunk_size < 1:
            raise InvalidInputError(f"chunk_size must be at least 1, got {self.chunk_size}")

    @property
    def memory_budget_bytes(self) -> int:
        return int(self.memory_budget_mb * 1024 * 1024)

    def with_overrides(self, **overrides: Any) -> 'LabConfig':
        """
        Return a copy with the non-None overrides applied.
        """
        changes = {k: v for k, v in overrides.items() if v is not None}
        return replace(self, **changes) if changes else self

    def to_dict(self) -> Dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _coerce(name: str, raw: str) -> Any:
    target = LabConfig.__dataclass_fields__[name].type
    try:
        if target in (int, 'int'):
            return int(raw)
        if target in (float, 'float'):
            return float(raw)
    except ValueError:
        raise InvalidInputError(f"{ENV_VARS[name]}={raw!r} is not a valid number")
    return raw


def load_config(dotenv_path: Optional[str] = None, **overrides: Any) -> LabConfig:
    """
    Build a LabConfig from defaults, .env, environment and overrides.

    Args:
        dotenv_path: Optional explicit .env path (default: search upwards)
        **overrides: Field values taking precedence over everything else;
            None values are ignored

    Returns:
        LabConfig: Resolved configuration
    """
    load_dotenv(dotenv_path=dotenv_path, override=False)

    values: Dict[str, Any] = {}
    for name, env_name in ENV_VARS.items():
        raw = os.environ.get(env_name)
        if raw is not None and raw != '':
            values[name] = _coerce(name, raw)
            logger.debug(f"Config {name} taken from {env_name}")

    values['ci_mode'] = bool(os.environ.get('CI'))

    for name, value in overrides.items():
        if value is not None:
            values[name] = value

    return LabConfig(**values)
