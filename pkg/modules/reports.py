"""
Run reports and atomic output writers.
"""

import os
import json
import hashlib
import logging
import tempfile
from dataclasses import dataclass, field, asdict
from typing import Any, Dict, List, Optional

import pandas as pd

# Configure logging
logger = logging.getLogger(__name__)


@dataclass
class RunReport:
    """
    Self-describing record of one command invocation.
    """
    command: List[str]
    inputs: Dict[str, Any]
    results: Any
    elapsed_ms: float
    version: str
    seed: Optional[int] = None
    config: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False)


def file_digest(path: str) -> str:
    """sha256 of a file's bytes."""
    digest = hashlib.sha256()
    with open(path, 'rb') as f:
        for block in iter(lambda: f.read(1 << 16), b''):
            digest.update(block)
    return digest.hexdigest()


def _write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix='.tmp-', suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, 'w', encoding='utf-8', newline='') as f:
            f.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise
    logger.info(f"Wrote {path}")


def write_json_atomic(path: str, payload: Dict[str, Any]) -> None:
    _write_atomic(path, json.dumps(payload, indent=2) + '\n')


def write_csv_atomic(path: str, frame: pd.DataFrame) -> None:
    _write_atomic(path, frame.to_csv(index=False))
