"""Small shared helpers: error types, seeding, JSON-safe conversion."""

from __future__ import annotations

import json
from typing import Any

import numpy as np


class NumericError(RuntimeError):
    """A computation produced non-finite values."""


def derive_seed(*key: int) -> int:
    """Collapse an integer key tuple into one well-mixed 64-bit seed.

    Caveat: SeedSequence absorbs a trailing zero word, so (a,) and (a, 0)
    collide.  Callers must keep key arity fixed per use site; varying only
    the last component is safe when it never doubles as a shorter key.
    """
    state = np.random.SeedSequence([int(k) for k in key]).generate_state(1, np.uint64)
    return int(state[0])


def stream(seed: int, index: int) -> np.random.Generator:
    """Counter-style generator for item ``index`` under ``seed``.

    Each (seed, index) pair keys an independent Philox stream, so results do
    not depend on the order in which items are visited.
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(index)])))


def to_jsonable(value: Any) -> Any:
    """Recursively convert numpy scalars/arrays so json.dumps accepts them."""
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    return value


def dump_json(obj: Any, path, indent: int | None = 2) -> None:
    """Write JSON with sorted keys; float repr round-trips exactly."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(to_jsonable(obj), fh, indent=indent, sort_keys=True)
        fh.write("\n")


def load_json(path) -> Any:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)
