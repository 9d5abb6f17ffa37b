"""Quantum channels in Kraus form and their Stinespring isometries."""
from __future__ import annotations

import dataclasses
import itertools
import math
from typing import Sequence

import numpy as np

from .config import tolerances
from .tensor import DensityMatrix, _frozen


@dataclasses.dataclass(frozen=True)
class KrausChannel:
    in_dim: int
    out_dim: int
    kraus: tuple[np.ndarray, ...]

    def __post_init__(self):
        ks = tuple(_frozen(np.asarray(k, dtype=complex)) for k in self.kraus)
        if not ks:
            raise ValueError("a channel needs at least one Kraus operator")
        for k in ks:
            if k.shape != (self.out_dim, self.in_dim):
                raise ValueError(f"Kraus shape {k.shape} != ({self.out_dim}, {self.in_dim})")
        if len(ks) > self.in_dim * self.out_dim:
            raise ValueError("more Kraus operators than in_dim * out_dim")
        gram = sum(k.conj().T @ k for k in ks)
        if np.abs(gram - np.eye(self.in_dim)).max() > tolerances().structural:
            raise ValueError("Kraus operators are not trace preserving")
        object.__setattr__(self, "kraus", ks)

    @classmethod
    def from_kraus(cls, kraus: Sequence[np.ndarray]) -> "KrausChannel":
        k0 = np.asarray(kraus[0])
        return cls(k0.shape[1], k0.shape[0], tuple(kraus))

    def __len__(self):
        return len(self.kraus)

    def apply_array(self, rho: np.ndarray) -> np.ndarray:
        return sum(k @ rho @ k.conj().T for k in self.kraus)

    def adjoint_array(self, x: np.ndarray) -> np.ndarray:
        return sum(k.conj().T @ x @ k for k in self.kraus)


@dataclasses.dataclass(frozen=True)
class Isometry:
    in_dim: int
    out_dims: tuple[int, int]
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        out = tuple(int(x) for x in self.out_dims)
        if m.shape != (out[0] * out[1], self.in_dim):
            raise ValueError(f"isometry shape {m.shape} does not match out_dims {out}")
        if np.abs(m.conj().T @ m - np.eye(self.in_dim)).max() > tolerances().structural:
            raise ValueError("matrix is not an isometry (V^dag V != I)")
        object.__setattr__(self, "out_dims", out)
        object.__setattr__(self, "matrix", _frozen(m))


def apply_channel(ch: KrausChannel, rho: DensityMatrix) -> DensityMatrix:
    if rho.matrix.shape[0] != ch.in_dim:
        raise ValueError(f"input dimension {rho.matrix.shape[0]} != channel in_dim {ch.in_dim}")
    return DensityMatrix((ch.out_dim,), ch.apply_array(rho.matrix))


def isometry_from_kraus(ch: KrausChannel) -> Isometry:
    """``V|psi> = sum_i K_i|psi> (x) |i>``, environment ordered by Kraus index."""
    n = len(ch.kraus)
    stacked = np.stack(ch.kraus, axis=1)  # (out, N, in)
    return Isometry(ch.in_dim, (ch.out_dim, n), stacked.reshape(ch.out_dim * n, ch.in_dim))


def channel_from_isometry(v: Isometry) -> KrausChannel:
    """Channel obtained by tracing out the second output factor of ``v``."""
    d_b, d_c = v.out_dims
    t = v.matrix.reshape(d_b, d_c, v.in_dim)
    return KrausChannel(v.in_dim, d_b, tuple(t[:, i, :] for i in range(d_c)))


def stinespring_apply(v: Isometry, rho: DensityMatrix) -> DensityMatrix:
    d_b, d_c = v.out_dims
    big = (v.matrix @ rho.matrix @ v.matrix.conj().T).reshape(d_b, d_c, d_b, d_c)
    return DensityMatrix((d_b,), np.einsum("iaja->ij", big))


def holevo_werner(d: int) -> KrausChannel:
    """``rho -> (I - rho^T)/(d - 1)`` with Kraus ``(|i><j| - |j><i|)/sqrt(d-1)``, i<j."""
    if d < 2:
        raise ValueError("Holevo-Werner channel needs d >= 2")
    ks = []
    for i, j in itertools.combinations(range(d), 2):
        k = np.zeros((d, d))
        k[i, j], k[j, i] = 1.0, -1.0
        ks.append(k / math.sqrt(d - 1))
    return KrausChannel(d, d, tuple(ks))


def unitary_channel(u: np.ndarray) -> KrausChannel:
    u = np.asarray(u, dtype=complex)
    return KrausChannel(u.shape[1], u.shape[0], (u,))


def kraus_norm_condition(ch: KrausChannel) -> tuple[bool, ...]:
    """Per operator: is the largest eigenvalue of ``K^dag K`` strictly below one?"""
    return tuple(bool(np.linalg.eigvalsh(k.conj().T @ k).max() < 1 - 1e-12)
                 for k in ch.kraus)


def _schatten(sigma: np.ndarray, p: float) -> float:
    w = np.clip(np.linalg.eigvalsh(sigma), 0.0, None)
    if math.isinf(p):
        return float(w.max())
    return float(np.sum(w ** p) ** (1.0 / p))


def _ascend(ch: KrausChannel, psi: np.ndarray, p: float, max_iter: int = 2000):
    """Projected gradient ascent of ``||Phi(psi psi^dag)||_p`` on the unit sphere."""

    def value(x):
        return _schatten(ch.apply_array(np.outer(x, x.conj())), p)

    def gradient(x):
        sigma = ch.apply_array(np.outer(x, x.conj()))
        w, u = np.linalg.eigh(sigma)
        if math.isinf(p):
            top = u[:, -1]
            m = np.outer(top, top.conj())
        else:
            m = (u * np.clip(w, 0.0, None) ** (p - 1)) @ u.conj().T
        g = ch.adjoint_array(m) @ x
        return g - np.real(np.vdot(x, g)) * x

    f = value(psi)
    step = 1.0
    for _ in range(max_iter):
        g = gradient(psi)
        if np.linalg.norm(g) < 1e-14:
            break
        while step > 1e-14:
            trial = psi + step * g
            trial /= np.linalg.norm(trial)
            ft = value(trial)
            if ft > f:
                break
            step *= 0.5
        else:
            break
        gain = ft - f
        psi, f = trial, ft
        step = min(2.0 * step, 1e3)
        if gain < 1e-15:
            break
    return f, psi


def max_output_norm(ch: KrausChannel, p: float = 2.0, restarts: int = 200,
                    seed: int = 0) -> float:
    """Best ``||Phi(|psi><psi|)||_p`` over seeded random restarts.

    Restart ``r`` always uses the ``r``-th child of ``SeedSequence(seed)``, so
    the result is nondecreasing in ``restarts`` for a fixed seed.
    """
    if not p > 1:
        raise ValueError("p must be > 1")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    best = 0.0
    for child in np.random.SeedSequence(seed).spawn(restarts):
        rng = np.random.default_rng(child)
        x = rng.standard_normal(ch.in_dim) + 1j * rng.standard_normal(ch.in_dim)
        f, _ = _ascend(ch, x / np.linalg.norm(x), p)
        best = max(best, f)
    return best


def output_purity(ch: KrausChannel, restarts: int = 200, seed: int = 0) -> float:
    return max_output_norm(ch, 2.0, restarts, seed) ** 2


def purity_certificate_exact(kraus) -> bool:
    """Exact test that ``K_i|phi>`` never are all pairwise proportional.

    ``kraus`` is a :class:`KrausChannel` with rational entries or a sequence of
    exact matrices (ints, ``Fraction``, rational strings). The columns
    ``K_i|phi>`` form the matricization of ``V|phi>`` across output|environment,
    so the question is the rank-1 minor system handled by ``certify``.
    """
    from .certify import minor_system_from_matrices
    from .polysys import exact_matrix, only_trivial_root

    mats = kraus.kraus if isinstance(kraus, KrausChannel) else kraus
    mats = [exact_matrix(k) for k in mats]
    in_dim = mats[0].shape[1]
    # coefficient matrix of phi_mu: column i of the pencil is K_i e_mu
    pencil = [np.stack([k[:, mu] for k in mats], axis=1) for mu in range(in_dim)]
    polys, names = minor_system_from_matrices(pencil, prefix="phi")
    return only_trivial_root(polys, names)
