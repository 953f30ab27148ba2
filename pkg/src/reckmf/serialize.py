"""Model checkpoints: npz container with a JSON metadata entry.

Factor arrays are stored exactly, so save -> load round-trips bit for bit,
and rewriting the same model yields byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .exceptions import DataError

_META_KEY = "__meta__"


def save_checkpoint(path, kind: str, meta: dict, arrays: dict) -> None:
    payload = dict(meta)
    payload["kind"] = kind
    blob = json.dumps(payload, sort_keys=True).encode("utf-8")
    np.savez(path, **{_META_KEY: np.frombuffer(blob, dtype=np.uint8)}, **arrays)


def load_checkpoint(path):
    path = Path(path)
    if not path.exists():
        raise DataError(f"checkpoint not found: {path}")
    with np.load(path) as bundle:
        if _META_KEY not in bundle:
            raise DataError(f"{path} is not a model checkpoint")
        meta = json.loads(bytes(bundle[_META_KEY]).decode("utf-8"))
        arrays = {k: bundle[k] for k in bundle.files if k != _META_KEY}
    kind = meta.pop("kind")
    return kind, meta, arrays
