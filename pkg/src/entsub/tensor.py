"""Dense tensor-product linear algebra on pure and mixed states.

Index convention: subsystem 0 is the slowest-varying tensor index, so a
state on dims ``(d0, d1, ..., dn-1)`` reshapes to ``amps.reshape(dims)``.
Every reshape in the package goes through this rule.

The ``*_array`` helpers accept any ndarray dtype, including ``object``
arrays of ``Fraction`` entries, and are shared with the exact certification
path.
"""
from __future__ import annotations

import dataclasses
import itertools
import math
from typing import Iterable, Sequence

import numpy as np

from .config import tolerances

Dims = tuple  # tuple[int, ...], every entry >= 2


def check_dims(dims: Iterable[int]) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims:
        raise ValueError("dims must be non-empty")
    if any(d < 2 for d in dims):
        raise ValueError(f"every local dimension must be >= 2, got {dims}")
    return dims


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


@dataclasses.dataclass(frozen=True)
class Bipartition:
    """Cut ``A|Ā`` stored canonically: ``side_a`` is sorted and contains 0."""

    side_a: tuple[int, ...]
    n: int

    def __post_init__(self):
        side = tuple(sorted(set(int(i) for i in self.side_a)))
        object.__setattr__(self, "side_a", side)
        if self.n < 2:
            raise ValueError("a bipartition needs at least two subsystems")
        if not side or any(i < 0 or i >= self.n for i in side):
            raise ValueError(f"invalid subsystem indices {side} for n={self.n}")
        if len(side) == self.n:
            raise ValueError("side_a must be a proper subset")
        if side[0] != 0:
            raise ValueError("canonical side_a must contain subsystem 0; use Bipartition.of")

    @classmethod
    def of(cls, indices: Iterable[int], n: int) -> "Bipartition":
        """Canonicalize an arbitrary side (swapping to the complement if needed)."""
        side = set(int(i) for i in indices)
        if any(i < 0 or i >= n for i in side):
            raise ValueError(f"invalid subsystem indices {sorted(side)} for n={n}")
        if 0 not in side:
            side = set(range(n)) - side
        return cls(tuple(sorted(side)), n)

    @property
    def side_b(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.n) if i not in self.side_a)

    def shape(self, dims: Sequence[int]) -> tuple[int, int]:
        return (math.prod(dims[i] for i in self.side_a),
                math.prod(dims[i] for i in self.side_b))

    def label(self, names: str | None = None) -> str:
        names = names or "ABCDEFGHIJ"
        return ("".join(names[i] for i in self.side_a) + "|"
                + "".join(names[i] for i in self.side_b))


def bipartitions(n: int) -> list[Bipartition]:
    """All 2**(n-1) - 1 canonical cuts, ordered by |side_a| then lexicographically."""
    out = []
    for size in range(1, n):
        for rest in itertools.combinations(range(1, n), size - 1):
            out.append(Bipartition((0,) + rest, n))
    return out


@dataclasses.dataclass(frozen=True)
class PureState:
    dims: tuple[int, ...]
    amplitudes: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        dims = check_dims(self.dims)
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != math.prod(dims):
            raise ValueError(f"{amps.size} amplitudes do not match dims {dims}")
        if self.normalized and abs(np.linalg.norm(amps) - 1.0) > tolerances().structural:
            raise ValueError(f"state is not normalized (norm {np.linalg.norm(amps)!r})")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @classmethod
    def from_vector(cls, dims, vec, normalize: bool = False) -> "PureState":
        vec = np.asarray(vec, dtype=complex).reshape(-1)
        if normalize:
            vec = vec / np.linalg.norm(vec)
        return cls(tuple(dims), vec)

    @classmethod
    def basis(cls, dims, labels: Sequence[int]) -> "PureState":
        dims = check_dims(dims)
        vec = np.zeros(math.prod(dims), dtype=complex)
        vec[np.ravel_multi_index(tuple(labels), dims)] = 1.0
        return cls(dims, vec)

    @property
    def n(self) -> int:
        return len(self.dims)

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.dims)

    def density(self) -> "DensityMatrix":
        return DensityMatrix(self.dims, np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclasses.dataclass(frozen=True)
class DensityMatrix:
    dims: tuple[int, ...]
    matrix: np.ndarray

    def __post_init__(self):
        dims = check_dims(self.dims)
        m = np.asarray(self.matrix, dtype=complex)
        side = math.prod(dims)
        if m.shape != (side, side):
            raise ValueError(f"matrix shape {m.shape} does not match dims {dims}")
        tol = tolerances().structural
        if np.abs(m - m.conj().T).max() > tol:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1.0) > tol:
            raise ValueError(f"density matrix trace {np.trace(m).real!r} != 1")
        if np.linalg.eigvalsh(m).min() < -tol:
            raise ValueError("density matrix has a negative eigenvalue")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def n(self) -> int:
        return len(self.dims)


@dataclasses.dataclass(frozen=True)
class FactorizationScheme:
    """Split one subsystem into two.

    ``basis_map[s] = (i, j)`` sends source label ``s`` to ``|i>|j>``. The
    optional ``unitary`` acts on the source subsystem first (``|s> ->
    sum_t U[t, s] |t>``).
    """

    source_subsystem: int
    new_dims: tuple[int, int]
    basis_map: tuple[tuple[int, int], ...]
    unitary: np.ndarray | None = None

    def __post_init__(self):
        a, b = (int(x) for x in self.new_dims)
        bmap = tuple((int(i), int(j)) for i, j in self.basis_map)
        if len(bmap) != a * b or len(set(bmap)) != a * b:
            raise ValueError("basis_map must be a bijection onto the product labels")
        if any(not (0 <= i < a and 0 <= j < b) for i, j in bmap):
            raise ValueError("basis_map label outside new_dims")
        object.__setattr__(self, "new_dims", (a, b))
        object.__setattr__(self, "basis_map", bmap)
        if self.unitary is not None:
            u = np.asarray(self.unitary)
            if u.shape != (a * b, a * b):
                raise ValueError("unitary shape does not match source dimension")
            uc = u.astype(complex)
            if np.abs(uc.conj().T @ uc - np.eye(a * b)).max() > tolerances().structural:
                raise ValueError("scheme unitary is not unitary")
            object.__setattr__(self, "unitary", _frozen(u))

    @property
    def source_dim(self) -> int:
        return self.new_dims[0] * self.new_dims[1]

    def permutation(self) -> np.ndarray:
        """Index array: new flat label ``i*b + j`` -> source label."""
        a, b = self.new_dims
        perm = np.empty(a * b, dtype=int)
        for s, (i, j) in enumerate(self.basis_map):
            perm[i * b + j] = s
        return perm


# ---------------------------------------------------------------- raw helpers

def _axes(dims, cut: Bipartition):
    if cut.n != len(dims):
        raise ValueError(f"cut for {cut.n} parties applied to {len(dims)}-partite dims")
    return list(cut.side_a) + list(cut.side_b)


def matricize_array(amps: np.ndarray, dims: Sequence[int], cut: Bipartition) -> np.ndarray:
    t = np.asarray(amps).reshape(tuple(dims))
    return t.transpose(_axes(dims, cut)).reshape(cut.shape(dims))


def vectorize_array(mat: np.ndarray, dims: Sequence[int], cut: Bipartition) -> np.ndarray:
    axes = _axes(dims, cut)
    t = np.asarray(mat).reshape([dims[i] for i in axes])
    return t.transpose(np.argsort(axes)).reshape(-1)


def apply_local_array(amps: np.ndarray, dims: Sequence[int], u: np.ndarray,
                      subsystem: int) -> np.ndarray:
    t = np.asarray(amps).reshape(tuple(dims))
    t = np.tensordot(np.asarray(u), t, axes=([1], [subsystem]))
    return np.moveaxis(t, 0, subsystem).reshape(-1)


def factorize_array(amps: np.ndarray, dims: Sequence[int], scheme: FactorizationScheme):
    """Return ``(new_amps, new_dims)``."""
    k = scheme.source_subsystem
    if not 0 <= k < len(dims) or dims[k] != scheme.source_dim:
        raise ValueError("factorization scheme inconsistent with dims")
    if scheme.unitary is not None:
        amps = apply_local_array(amps, dims, scheme.unitary, k)
    t = np.asarray(amps).reshape(tuple(dims))
    t = np.take(t, scheme.permutation(), axis=k)
    new_dims = tuple(dims[:k]) + scheme.new_dims + tuple(dims[k + 1:])
    return t.reshape(-1), new_dims


# ---------------------------------------------------------------- operations

def matricize(psi: PureState, cut: Bipartition) -> np.ndarray:
    return matricize_array(psi.amplitudes, psi.dims, cut)


def vectorize(mat: np.ndarray, dims, cut: Bipartition) -> np.ndarray:
    return vectorize_array(mat, dims, cut)


def schmidt_coefficients(psi: PureState, cut: Bipartition) -> np.ndarray:
    s = np.linalg.svd(matricize(psi, cut), compute_uv=False)
    # svd already returns descending order; stable sort keeps ties in place
    return s[np.argsort(-s, kind="stable")]


def _check_subset(keep, n) -> list[int]:
    keep = sorted(set(int(i) for i in keep))
    if not keep or len(keep) == n or any(i < 0 or i >= n for i in keep):
        raise ValueError(f"keep must be a nonempty proper subset of range({n}), got {keep}")
    return keep


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    keep = _check_subset(keep, rho.n)
    rest = [i for i in range(rho.n) if i not in keep]
    dims = rho.dims
    n = rho.n
    t = rho.matrix.reshape(dims + dims)
    perm = keep + rest + [n + i for i in keep] + [n + i for i in rest]
    dk = math.prod(dims[i] for i in keep)
    dr = math.prod(dims[i] for i in rest)
    t = t.transpose(perm).reshape(dk, dr, dk, dr)
    reduced = np.einsum("iaja->ij", t)
    return DensityMatrix(tuple(dims[i] for i in keep), reduced)


def reduced_density_array(amps: np.ndarray, dims, keep: Iterable[int]) -> np.ndarray:
    """Reduced state of a pure vector without forming the full projector."""
    keep = _check_subset(keep, len(dims))
    m = matricize_array(amps, dims, Bipartition.of(keep, len(dims)))
    if keep[0] != 0:
        m = m.T
    return m @ m.conj().T


def partial_transpose(rho: DensityMatrix | np.ndarray, cut: Bipartition,
                      dims: Sequence[int] | None = None) -> np.ndarray:
    """Transpose the ``side_b`` subsystems of ``rho``."""
    if isinstance(rho, DensityMatrix):
        dims, m = rho.dims, rho.matrix
    else:
        if dims is None:
            raise ValueError("dims required for a bare matrix")
        m = np.asarray(rho)
    dims = tuple(dims)
    n = len(dims)
    if cut.n != n:
        raise ValueError("cut does not match the number of subsystems")
    perm = list(range(2 * n))
    for i in cut.side_b:
        perm[i], perm[n + i] = n + i, i
    side = math.prod(dims)
    return m.reshape(dims + dims).transpose(perm).reshape(side, side)


def trace_norm(m: np.ndarray) -> float:
    return float(np.linalg.svd(np.asarray(m), compute_uv=False).sum())


def ky_fan_norm(m: np.ndarray, k: int) -> float:
    """Sum of the ``k`` largest eigenvalues of a Hermitian matrix."""
    m = np.asarray(m)
    if m.ndim == 1:
        w = np.sort(m.real)[::-1]
    else:
        w = np.linalg.eigvalsh(m)[::-1]
    if not 1 <= k <= w.size:
        raise ValueError(f"k={k} out of range 1..{w.size}")
    return float(w[:k].sum())


def is_unitary(u: np.ndarray, tol: float | None = None) -> bool:
    u = np.asarray(u, dtype=complex)
    tol = tolerances().structural if tol is None else tol
    return u.ndim == 2 and u.shape[0] == u.shape[1] and \
        np.abs(u.conj().T @ u - np.eye(u.shape[0])).max() <= tol


def apply_local_unitary(psi: PureState, u: np.ndarray, subsystem: int) -> PureState:
    u = np.asarray(u, dtype=complex)
    if not 0 <= subsystem < psi.n:
        raise ValueError(f"no subsystem {subsystem}")
    if u.shape != (psi.dims[subsystem],) * 2:
        raise ValueError(f"unitary shape {u.shape} does not match local dim {psi.dims[subsystem]}")
    if not is_unitary(u):
        raise ValueError("matrix is not unitary")
    return PureState(psi.dims, apply_local_array(psi.amplitudes, psi.dims, u, subsystem),
                     normalized=psi.normalized)


def factorize_subsystem(psi: PureState, scheme: FactorizationScheme) -> PureState:
    amps, dims = factorize_array(psi.amplitudes, psi.dims, scheme)
    return PureState(dims, amps.astype(complex), normalized=psi.normalized)


def product_state(vectors: Sequence[np.ndarray]) -> PureState:
    dims = tuple(len(v) for v in vectors)
    out = np.ones(1, dtype=complex)
    for v in vectors:
        out = np.kron(out, np.asarray(v, dtype=complex))
    return PureState(dims, out / np.linalg.norm(out))


def random_pure_state(dims, rng: np.random.Generator) -> PureState:
    dims = check_dims(dims)
    d = math.prod(dims)
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return PureState(dims, v / np.linalg.norm(v))


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))
