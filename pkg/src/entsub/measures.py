"""Pure-state entanglement measures and overlap-based mixed-state bounds."""
from __future__ import annotations

import dataclasses
import math
from fractions import Fraction
from typing import Sequence

import numpy as np

from .constructions import ExactSubspace, Subspace
from .tensor import (Bipartition, DensityMatrix, PureState, bipartitions, ky_fan_norm,
                     partial_transpose, schmidt_coefficients,
                     trace_norm)

MEASURES = ("concurrence", "negativity", "geometric")


def concurrence_pure(psi: PureState, cut: Bipartition) -> float:
    """``sqrt(2 (1 - Tr rho_A^2))``."""
    # 1 - sum p_i^2 written as 2 sum_{i<j} p_i p_j stays exactly 0 on product states
    p = schmidt_coefficients(psi, cut) ** 2
    p = p / p.sum()
    linear_entropy = 2.0 * float(np.dot(p[1:], np.cumsum(p)[:-1]))
    return math.sqrt(max(2.0 * linear_entropy, 0.0))


def negativity(rho: DensityMatrix | PureState, cut: Bipartition) -> float:
    """``(||rho^{T_B}||_1 - 1) / 2``, never negative."""
    if isinstance(rho, PureState):
        rho = rho.density()
    return max((trace_norm(partial_transpose(rho, cut)) - 1.0) / 2.0, 0.0)


def geometric_pure(psi: PureState, cut: Bipartition) -> float:
    """One minus the largest squared Schmidt coefficient."""
    s = schmidt_coefficients(psi, cut)
    return max(1.0 - float(s[0]) ** 2, 0.0)


_PURE = {"concurrence": concurrence_pure, "negativity": negativity,
         "geometric": geometric_pure}


def bipartite_measure(psi: PureState, cut: Bipartition, measure: str) -> float:
    if measure not in _PURE:
        raise ValueError(f"measure must be one of {MEASURES}")
    return _PURE[measure](psi, cut)


def gme_pure(psi: PureState, measure: str = "geometric") -> float:
    """Minimum of the bipartite measure over all canonical cuts."""
    return min(bipartite_measure(psi, c, measure) for c in bipartitions(psi.n))


# ---------------------------------------------------------------- bounds

def _as_subspace(w) -> Subspace:
    return w.to_subspace() if isinstance(w, ExactSubspace) else w


def overlap(rho: DensityMatrix, w) -> float:
    """``Tr(rho Pi_W)``."""
    w = _as_subspace(w)
    if tuple(rho.dims) != tuple(w.dims):
        raise ValueError(f"state dims {rho.dims} != subspace dims {w.dims}")
    m = w.matrix()
    return float(np.real(np.einsum("ik,ij,jk->", m.conj(), rho.matrix, m)))


def _check_unit_open(name, x):
    if not 0.0 < float(x) < 1.0:
        raise ValueError(f"{name} must lie in (0, 1), got {x}")


def bipartite_concurrence_lb(rho: DensityMatrix, w, lambda1_bar: float) -> float:
    """Concurrence lower bound from the overlap with a completely entangled ``W``.

    ``d`` is the smaller local dimension of the bipartite space.
    """
    _check_unit_open("lambda1_bar", lambda1_bar)
    w = _as_subspace(w)
    if w.n != 2:
        raise ValueError("bipartite bound needs a bipartite subspace")
    d = min(w.dims)
    ov = overlap(rho, w)
    return max(math.sqrt(2.0 / (d * (d - 1))) * (ov - lambda1_bar) / lambda1_bar, 0.0)


def bipartite_cren_lb(rho: DensityMatrix, w, lambda1_bar: float) -> float:
    """Convex-roof extended negativity lower bound ``(Tr rho Pi_W - l) / (2 l)``."""
    _check_unit_open("lambda1_bar", lambda1_bar)
    ov = overlap(rho, _as_subspace(w))
    return max((ov - lambda1_bar) / (2.0 * lambda1_bar), 0.0)


def concurrence_dimension(dims: Sequence[int]) -> int:
    """``d`` for the GME concurrence prefactor: the largest smaller-side dimension over cuts.

    The prefactor decreases with ``d``, so this choice is valid whichever cut
    attains the GME minimum.
    """
    return max(min(c.shape(dims)) for c in bipartitions(len(dims)))


@dataclasses.dataclass(frozen=True)
class BoundReport:
    overlap: float
    g_gme_used: float
    concurrence_lb: float
    negativity_lb: float
    robustness_white: float
    robustness_spectrum: float | None = None
    d_used: int = 0
    d_rule: str = ""
    d_flagged: bool = False


def gme_bounds(rho: DensityMatrix, w, g: float | None = None,
               noise_spectrum: Sequence[float] | None = None, d: int | None = None,
               restarts: int = 200, seed=0) -> BoundReport:
    """GME concurrence and negativity lower bounds and noise thresholds.

    ``g`` is the geometric measure of ``W`` (or a lower bound on it). When it
    is omitted it is estimated with :func:`entsub.certify.subspace_entanglement`.
    The report flags heterogeneous local dimensions, where the choice of ``d``
    for the concurrence prefactor is a convention.
    """
    w = _as_subspace(w)
    if g is None:
        from .certify import subspace_entanglement
        g = subspace_entanglement(w, restarts, seed).g_gme
    _check_unit_open("g", g)
    g = float(g)
    ov = overlap(rho, w)
    excess = max(ov + g - 1.0, 0.0)
    if d is None:
        d_used = concurrence_dimension(w.dims)
        rule = "max over cuts of the smaller side dimension"
    else:
        d_used = int(d)
        rule = "caller supplied"
    conc = math.sqrt(2.0 / (d_used * (d_used - 1))) * excess / (1.0 - g)
    neg = excess / (2.0 * (1.0 - g))
    spec = None if noise_spectrum is None else float(spectrum_robustness(w, g, noise_spectrum))
    return BoundReport(ov, g, conc, neg, float(white_noise_robustness(w, g)), spec,
                       d_used, rule, len(set(w.dims)) > 1)


def _space_dims(w) -> tuple[int, int]:
    w = _as_subspace(w) if not isinstance(w, tuple) else w
    if isinstance(w, tuple):
        return w
    return w.dim, math.prod(w.dims)


def white_noise_robustness(w, g):
    """Largest white-noise weight certified by ``g``: ``g / (1 - dim W / dim H)``, capped at 1.

    ``w`` is a subspace or a ``(dim_W, dim_H)`` pair. A ``Fraction`` ``g``
    gives an exact ``Fraction`` result.
    """
    dim_w, dim_h = _space_dims(w)
    if not 0 < dim_w < dim_h:
        raise ValueError("need 0 < dim W < dim H")
    if isinstance(g, Fraction) or isinstance(g, int):
        val = Fraction(g) * dim_h / (dim_h - dim_w)
        return min(val, Fraction(1))
    return min(float(g) * dim_h / (dim_h - dim_w), 1.0)


def spectrum_robustness(w, g, noise_spectrum: Sequence[float]) -> float:
    """``g / ||N||_(codim W)`` clamped to [0, 1]; only the noise spectrum is needed."""
    dim_w, dim_h = _space_dims(w)
    spec = np.asarray(noise_spectrum, dtype=float)
    if spec.ndim != 1 or spec.size != dim_h:
        raise ValueError(f"noise spectrum must have length dim H = {dim_h}")
    if spec.min() < -1e-12 or abs(spec.sum() - 1.0) > 1e-9:
        raise ValueError("noise spectrum must be nonnegative and sum to 1")
    if not 0 < dim_w < dim_h:
        raise ValueError("need 0 < dim W < dim H")
    k = ky_fan_norm(np.sort(spec)[::-1], dim_h - dim_w)
    return min(max(float(g) / k, 0.0), 1.0)
