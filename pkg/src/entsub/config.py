"""Process-wide numerical tolerances.

All checks read from a single context value so callers can tighten or relax
them locally::

    with using_tolerances(structural=1e-7):
        ...
"""
from __future__ import annotations

import contextlib
import contextvars
import dataclasses


@dataclasses.dataclass(frozen=True)
class Tolerances:
    structural: float = 1e-9   # hermiticity, unitarity, normalization, trace
    spectral: float = 1e-8     # Schmidt/eigenvalue identities
    numeric_gap: float = 1e-6  # 1 - lambda1_bar needed for a numeric "entangled"
    witness: float = 1e-10     # product witness residual for "product_found"
    min_restarts: int = 200    # restarts required before a numeric "entangled"
    spair_cap: int = 10**6     # S-pair reductions before GroebnerLimitError


_current: contextvars.ContextVar[Tolerances] = contextvars.ContextVar(
    "entsub_tolerances", default=Tolerances()
)


def tolerances() -> Tolerances:
    return _current.get()


@contextlib.contextmanager
def using_tolerances(**overrides):
    token = _current.set(dataclasses.replace(_current.get(), **overrides))
    try:
        yield _current.get()
    finally:
        _current.reset(token)
