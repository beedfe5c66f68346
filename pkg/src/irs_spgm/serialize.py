"""JSON forms of complex arrays and channel realizations.

Complex entries are written as ``[re, im]`` pairs; nothing is string
encoded.
"""

from __future__ import annotations

import json

import numpy as np

from .channel import ChannelRealization

__all__ = [
    "complex_to_json",
    "complex_from_json",
    "realization_to_dict",
    "realization_from_dict",
    "dumps",
]


def complex_to_json(a) -> list:
    """Nested lists of ``[re, im]`` pairs mirroring the shape of ``a``."""
    a = np.asarray(a, dtype=np.complex128)
    pairs = np.stack([a.real, a.imag], axis=-1)
    return pairs.tolist()


def complex_from_json(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim < 1 or arr.shape[-1] != 2:
        raise ValueError("complex data must end in [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def realization_to_dict(real: ChannelRealization) -> dict:
    return {
        "seed": int(real.seed),
        "h_d": complex_to_json(real.h_d),
        "h_r": complex_to_json(real.h_r),
        "m": complex_to_json(real.m),
        "angles": {k: list(v) for k, v in (real.angles or {}).items()},
    }


def realization_from_dict(doc: dict) -> ChannelRealization:
    real = ChannelRealization(
        h_d=complex_from_json(doc["h_d"]),
        h_r=complex_from_json(doc["h_r"]),
        m=complex_from_json(doc["m"]),
        seed=int(doc.get("seed", 0)),
        angles={k: tuple(v) for k, v in doc.get("angles", {}).items()} or None,
    )
    real.check()
    return real


def dumps(doc) -> str:
    """Canonical JSON text: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"
