"""Explicit completely and genuinely entangled subspace families.

Most families are produced by one pipeline: a Kraus layout defines a channel,
its Stinespring isometry maps the computational basis of the input space onto
an orthonormal basis of a bipartite subspace, and optional local unitaries and
subsystem factorizations turn the bipartite subspace into a multipartite one.
Each basis vector carries a provenance string describing that pipeline.

Every family also has an ``*_exact`` sibling whose amplitudes are integers or
rationals. Each amplitude pair ``sqrt(lam), sqrt(1 - lam)`` is replaced by an
integer ratio ``r : s``. Rescaling a spanning vector does not change the span,
so an exact certificate for the sibling applies to the family member with
``lam = r**2 / (r**2 + s**2)`` (see :attr:`ExactSubspace.equivalent`).
"""
from __future__ import annotations

import dataclasses
import itertools
import math
from fractions import Fraction
from typing import Sequence

import numpy as np

from .channels import Isometry, KrausChannel, isometry_from_kraus
from .config import tolerances
from .polysys import exact_matrix, to_complex_array
from .tensor import (FactorizationScheme, PureState, apply_local_array, bipartitions,
                     check_dims, factorize_array)


# ---------------------------------------------------------------- containers

@dataclasses.dataclass(frozen=True)
class Subspace:
    """Orthonormal basis of a subspace of ``C^{d0} (x) ... (x) C^{dn-1}``."""

    dims: tuple[int, ...]
    basis: tuple[PureState, ...]
    provenance: tuple[str, ...] = dataclasses.field(default=(), compare=False)

    def __post_init__(self):
        dims = check_dims(self.dims)
        basis = tuple(self.basis)
        if not basis:
            raise ValueError("a subspace needs at least one basis vector")
        if any(v.dims != dims for v in basis):
            raise ValueError("all basis states must share the subspace dims")
        m = np.stack([v.amplitudes for v in basis], axis=1)
        if np.abs(m.conj().T @ m - np.eye(len(basis))).max() > tolerances().structural:
            raise ValueError("basis is not orthonormal")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "provenance", tuple(self.provenance))

    @classmethod
    def from_columns(cls, dims, columns: np.ndarray, provenance=(),
                     orthonormalize: bool = False) -> "Subspace":
        """Build from a ``prod(dims) x k`` matrix of column vectors."""
        m = np.asarray(columns, dtype=complex)
        if orthonormalize:
            q, r = np.linalg.qr(m)
            if np.abs(np.diag(r)).min() < tolerances().structural:
                raise ValueError("spanning vectors are linearly dependent")
            # fix the phase so column j keeps a positive overlap with input j
            m = q * np.sign(np.diag(r)).conj()
        dims = tuple(dims)
        return cls(dims, tuple(PureState(dims, m[:, j]) for j in range(m.shape[1])),
                   provenance)

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def n(self) -> int:
        return len(self.dims)

    def matrix(self) -> np.ndarray:
        """Columns are the basis vectors."""
        return np.stack([v.amplitudes for v in self.basis], axis=1)

    def projector(self) -> np.ndarray:
        m = self.matrix()
        return m @ m.conj().T


@dataclasses.dataclass(frozen=True)
class ExactSubspace:
    """Span of exactly known (Gaussian-rational) vectors, not normalized.

    ``equivalent`` records the parameters of the family member with the same
    span, e.g. ``{"lambdas": (Fraction(1, 2), ...)}``, and ``sibling_of`` names
    the family.
    """

    dims: tuple[int, ...]
    vectors: np.ndarray  # object array, shape (k, prod(dims))
    sibling_of: str | None = None
    equivalent: dict = dataclasses.field(default_factory=dict, compare=False)
    provenance: tuple[str, ...] = dataclasses.field(default=(), compare=False)

    def __post_init__(self):
        dims = check_dims(self.dims)
        v = exact_matrix(self.vectors)
        if v.ndim != 2 or v.shape[1] != math.prod(dims):
            raise ValueError(f"vectors of shape {v.shape} do not match dims {dims}")
        v.flags.writeable = False
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "vectors", v)
        object.__setattr__(self, "provenance", tuple(self.provenance))

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    @property
    def n(self) -> int:
        return len(self.dims)

    def to_subspace(self) -> Subspace:
        """Orthonormal basis of the same span (Householder QR)."""
        cols = to_complex_array(self.vectors).T
        return Subspace.from_columns(self.dims, cols, self.provenance, orthonormalize=True)


# ---------------------------------------------------------------- generic steps

def _open_unit(name: str, values: Sequence[float], count: int) -> tuple[float, ...]:
    values = tuple(float(x) for x in values)
    if len(values) != count:
        raise ValueError(f"{name} needs {count} parameters, got {len(values)}")
    for x in values:
        if not 0.0 < x < 1.0:
            raise ValueError(f"{name}: every lambda must lie in the open interval (0, 1), got {x}")
    return values


def _ratios(name: str, ratios, count: int) -> tuple[tuple[int, int], ...]:
    out = []
    for pair in ratios:
        r, s = (int(x) for x in pair)
        if r <= 0 or s <= 0:
            raise ValueError(f"{name}: ratios must be positive integers, got {pair}")
        out.append((r, s))
    if len(out) != count:
        raise ValueError(f"{name} needs {count} ratios, got {len(out)}")
    return tuple(out)


def _lam(r: int, s: int, weight: int = 1) -> Fraction:
    """``lam`` such that ``sqrt(lam) : sqrt(1 - lam) == sqrt(weight) * r : s``."""
    return Fraction(weight * r * r, weight * r * r + s * s)


# Placement tables. Entry k lists, for input basis vector e_k, the pairs
# (kraus index, output row) receiving sqrt(lam_k) and sqrt(1 - lam_k).
CES33_LAYOUT = (((0, 0), (2, 2)), ((0, 1), (1, 0)), ((0, 2), (2, 1)), ((1, 2), (2, 0)))
K42_LAYOUT = (((0, 0), (1, 3)), ((0, 1), (1, 0)), ((0, 2), (1, 1)))
CES44_LAYOUT = (((0, 0), (1, 2)), ((2, 1), (3, 3)), ((1, 0), (2, 3)), ((0, 3), (2, 2)),
                ((1, 1), (3, 0)), ((0, 1), (3, 2)), ((0, 2), (1, 3)))


def _layout_kraus(layout, out_dim: int, n_kraus: int, weights, dtype=complex):
    """Kraus matrices from a placement table and per-column weight pairs."""
    in_dim = len(layout)
    mats = [np.zeros((out_dim, in_dim), dtype=dtype) for _ in range(n_kraus)]
    if dtype is object:
        for m in mats:
            m.fill(Fraction(0))
    for k, ((ia, ra), (ib, rb)) in enumerate(layout):
        wa, wb = weights[k]
        mats[ia][ra, k] = wa
        mats[ib][rb, k] = wb
    return mats


def _stinespring_columns(mats) -> np.ndarray:
    """``V e_k = sum_i K_i e_k (x) |i>`` as columns, any dtype."""
    out_dim, in_dim = mats[0].shape
    stacked = np.stack(mats, axis=1)  # (out, N, in)
    return stacked.reshape(out_dim * len(mats), in_dim)


def _sqrt_weights(lams, signs=(1, 1)):
    return [(signs[0] * math.sqrt(x), signs[1] * math.sqrt(1 - x)) for x in lams]


def subspace_from_isometry(v: Isometry, provenance: str = "") -> Subspace:
    label = provenance or "isometry"
    return Subspace.from_columns(v.out_dims, v.matrix,
                                 tuple(f"{label} e{k}" for k in range(v.in_dim)))


def _pipeline(vectors: np.ndarray, dims, steps) -> tuple[np.ndarray, tuple[int, ...]]:
    """Apply ``("unitary", subsystem, u)`` / ``("split", scheme)`` steps to rows."""
    dims = tuple(dims)
    rows = [np.asarray(v) for v in vectors]
    for step in steps:
        if step[0] == "unitary":
            _, k, u = step
            rows = [apply_local_array(v, dims, u, k) for v in rows]
        else:
            scheme = step[1]
            new = [factorize_array(v, dims, scheme) for v in rows]
            rows = [a for a, _ in new]
            dims = new[0][1]
    return np.stack(rows), dims


# ---------------------------------------------------------------- 3 x 3 family

def ces_3x3_channel(lambdas: Sequence[float]) -> KrausChannel:
    """Three Kraus operators (3x4) whose isometry spans the 3x3 family."""
    lams = _open_unit("ces_3x3", lambdas, 4)
    return KrausChannel(4, 3, tuple(_layout_kraus(CES33_LAYOUT, 3, 3, _sqrt_weights(lams))))


def ces_3x3(lambdas: Sequence[float]) -> Subspace:
    """Four-dimensional completely entangled subspace of 3 (x) 3.

    ``psi_k = sqrt(lam_k)|a_k b_k> + sqrt(1 - lam_k)|c_k d_k>`` with the
    first vector ``sqrt(lam_1)|00> + sqrt(1 - lam_1)|22>``.
    """
    v = isometry_from_kraus(ces_3x3_channel(lambdas))
    return subspace_from_isometry(v, "ces_3x3 Kraus layout")


def ces_3x3_exact(ratios) -> ExactSubspace:
    ratios = _ratios("ces_3x3_exact", ratios, 4)
    mats = _layout_kraus(CES33_LAYOUT, 3, 3, [(Fraction(r), Fraction(s)) for r, s in ratios],
                         dtype=object)
    cols = _stinespring_columns(mats)
    return ExactSubspace((3, 3), cols.T, "ces_3x3",
                         {"lambdas": tuple(_lam(r, s) for r, s in ratios)},
                         ("ces_3x3 Kraus layout, integer ratios",))


# ---------------------------------------------------------------- antisymmetric

def antisymmetric_subspace(d: int) -> Subspace:
    """``(|ij> - |ji>)/sqrt(2)`` for ``i < j`` in lexicographic order."""
    if d < 2:
        raise ValueError("antisymmetric subspace needs d >= 2")
    cols = []
    for i, j in itertools.combinations(range(d), 2):
        v = np.zeros(d * d)
        v[i * d + j], v[j * d + i] = 1.0, -1.0
        cols.append(v / math.sqrt(2))
    labels = [f"antisym |{i}{j}>-|{j}{i}>" for i, j in itertools.combinations(range(d), 2)]
    return Subspace.from_columns((d, d), np.stack(cols, axis=1), labels)


def antisymmetric_exact(d: int) -> ExactSubspace:
    rows = []
    for i, j in itertools.combinations(range(d), 2):
        v = np.full(d * d, Fraction(0), dtype=object)
        v[i * d + j], v[j * d + i] = Fraction(1), Fraction(-1)
        rows.append(v)
    return ExactSubspace((d, d), np.stack(rows), "antisymmetric_subspace",
                         {"d": d}, ("antisymmetric, unnormalized",))


def antisymmetric_isometry(d: int) -> Isometry:
    """Isometry from ``C^{d(d-1)/2}`` onto the antisymmetric subspace of d (x) d."""
    w = antisymmetric_subspace(d)
    return Isometry(w.dim, (d, d), w.matrix())


# ---------------------------------------------------------------- lifting

def lift_array(amps: np.ndarray, dims, matrix: np.ndarray, out_dims, party: int):
    """Apply a ``(dB*dC) x d_party`` map on ``party``; returns ``(amps, dims)``."""
    dims = tuple(dims)
    out_dims = tuple(out_dims)
    t = np.asarray(amps).reshape(dims)
    t = np.tensordot(np.asarray(matrix), t, axes=([1], [party]))
    t = np.moveaxis(t, 0, party)
    new_dims = dims[:party] + out_dims + dims[party + 1:]
    return t.reshape(-1), new_dims


def lift_ges(ces: Subspace, v: Isometry, party: int, certify_channel: bool = False,
             restarts: int = 200, seed: int = 0) -> Subspace:
    """Apply the isometry ``v`` to subsystem ``party`` of every basis vector.

    With ``certify_channel`` the output purity of the channel of ``v`` is
    estimated numerically and the lift is rejected unless it is below
    ``1 - numeric_gap``.
    """
    if not 0 <= party < ces.n:
        raise ValueError(f"party {party} out of range for {ces.n} subsystems")
    if ces.dims[party] != v.in_dim:
        raise ValueError(f"isometry input {v.in_dim} != dims[{party}] = {ces.dims[party]}")
    if certify_channel:
        from .channels import channel_from_isometry, output_purity
        purity = output_purity(channel_from_isometry(v), restarts, seed)
        if purity > 1 - tolerances().numeric_gap:
            raise ValueError(f"channel output purity {purity:.9f} is not below one")
    rows = []
    new_dims = ces.dims
    for psi in ces.basis:
        amps, new_dims = lift_array(psi.amplitudes, ces.dims, v.matrix, v.out_dims, party)
        rows.append(amps)
    prov = tuple(f"{p} | isometry on party {party}" for p in
                 (ces.provenance or ("",) * ces.dim))
    return Subspace.from_columns(new_dims, np.stack(rows, axis=1), prov)


def hw_ges() -> Subspace:
    """Antisymmetric 3 (x) 3 subspace lifted by the Holevo-Werner isometry on party 1."""
    from .channels import holevo_werner
    return lift_ges(antisymmetric_subspace(3), isometry_from_kraus(holevo_werner(3)), 1)


def hw_ges_exact() -> ExactSubspace:
    """Same span with the normalizations dropped (entries in {0, 1, -1})."""
    base = antisymmetric_exact(3)
    kraus = []
    for i, j in itertools.combinations(range(3), 2):
        k = np.full((3, 3), Fraction(0), dtype=object)
        k[i, j], k[j, i] = Fraction(1), Fraction(-1)
        kraus.append(k)
    v = _stinespring_columns(kraus)
    rows = []
    dims = base.dims
    for vec in base.vectors:
        amps, dims = lift_array(vec, base.dims, v, (3, 3), 1)
        rows.append(amps)
    return ExactSubspace(dims, np.stack(rows), "hw_ges", {},
                         ("antisymmetric, unnormalized | Holevo-Werner isometry on party 1",))


def ces_3x3_antisym_ges(lambdas: Sequence[float]) -> Subspace:
    """The 3x3 family lifted by the antisymmetric-range isometry on party 1."""
    return lift_ges(ces_3x3(lambdas), antisymmetric_isometry(3), 1)


# ---------------------------------------------------------------- three qubits

QUBIT_PAIR_SCHEME = FactorizationScheme(0, (2, 2), ((0, 0), (0, 1), (1, 0), (1, 1)))

_S = 1 / math.sqrt(2)
U_A = np.array([[1, 0, 0, 0], [0, _S, _S, 0], [0, _S, -_S, 0], [0, 0, 0, 1]])
# U_A @ diag(1, sqrt2, sqrt2, 1): rational, used by the exact sibling
R_A = np.array([[1, 0, 0, 0], [0, 1, 1, 0], [0, 1, -1, 0], [0, 0, 0, 1]], dtype=object)


def k42_channel(lambdas: Sequence[float], orthogonal: bool = False) -> KrausChannel:
    """Two 4x3 Kraus operators; ``K_2 = W_2 Sigma_2`` with ``W_2: e1->e4, e2->e1, e3->e2``."""
    lams = _open_unit("k42_channel", lambdas, 3)
    if orthogonal:
        weights = [(math.sqrt(1 - x), -math.sqrt(x)) for x in lams]
    else:
        weights = _sqrt_weights(lams)
    return KrausChannel(3, 4, tuple(_layout_kraus(K42_LAYOUT, 4, 2, weights)))


def ces_4x2(lambdas: Sequence[float]) -> Subspace:
    return subspace_from_isometry(isometry_from_kraus(k42_channel(lambdas)), "k42 layout")


def _ges_3qubit(lambdas, orthogonal: bool) -> Subspace:
    v = isometry_from_kraus(k42_channel(lambdas, orthogonal))
    rows, dims = _pipeline(v.matrix.T, v.out_dims,
                           [("unitary", 0, U_A), ("split", QUBIT_PAIR_SCHEME)])
    tag = "orthogonal " if orthogonal else ""
    prov = tuple(f"{tag}k42 layout e{k} | U_A on A | A -> A1 A2" for k in range(3))
    return Subspace.from_columns(dims, rows.T, prov)


def ges_3qubit(lambdas: Sequence[float]) -> Subspace:
    """Three-dimensional genuinely entangled subspace of three qubits.

    ``psi_1 = sqrt(lam_1)|000> + sqrt(1 - lam_1)|111>``.
    """
    return _ges_3qubit(lambdas, False)


def ges_3qubit_orthogonal(lambdas: Sequence[float]) -> Subspace:
    """Companion family orthogonal to :func:`ges_3qubit` with the same lambdas."""
    return _ges_3qubit(lambdas, True)


def _ges_3qubit_exact(ratios, orthogonal: bool) -> ExactSubspace:
    ratios = _ratios("ges_3qubit_exact", ratios, 3)
    if orthogonal:
        # r : s stands for sqrt(1 - lam) : sqrt(lam)
        weights = [(Fraction(r), Fraction(-s)) for r, s in ratios]
    else:
        weights = [(Fraction(r), Fraction(s)) for r, s in ratios]
    mats = _layout_kraus(K42_LAYOUT, 4, 2, weights, dtype=object)
    rows, dims = _pipeline(_stinespring_columns(mats).T, (4, 2),
                           [("unitary", 0, R_A), ("split", QUBIT_PAIR_SCHEME)])
    (r1, s1), (r2, s2), (r3, s3) = ratios
    if orthogonal:
        lams = (1 - _lam(r1, s1), 1 - _lam(r2, s2, 2), 1 - _lam(r3, s3))
    else:
        lams = (_lam(r1, s1), _lam(r2, s2, 2), _lam(r3, s3))
    name = "ges_3qubit_orthogonal" if orthogonal else "ges_3qubit"
    return ExactSubspace(dims, rows, name, {"lambdas": lams},
                         (f"{name} integer ratios, rational mixing on A",))


def ges_3qubit_exact(ratios) -> ExactSubspace:
    """Exact sibling; ``equivalent["lambdas"]`` gives the family member with the same span."""
    return _ges_3qubit_exact(ratios, False)


def ges_3qubit_orthogonal_exact(ratios) -> ExactSubspace:
    return _ges_3qubit_exact(ratios, True)


# ---------------------------------------------------------------- 4 x 4 and four qubits

def ces_4x4_channel(lambdas: Sequence[float]) -> KrausChannel:
    lams = _open_unit("ces_4x4", lambdas, 7)
    return KrausChannel(7, 4, tuple(_layout_kraus(CES44_LAYOUT, 4, 4, _sqrt_weights(lams))))


def ces_4x4(lambdas: Sequence[float]) -> Subspace:
    """Seven-dimensional completely entangled subspace of 4 (x) 4."""
    return subspace_from_isometry(isometry_from_kraus(ces_4x4_channel(lambdas)),
                                  "ces_4x4 Kraus layout")


def ces_4x4_exact(ratios) -> ExactSubspace:
    ratios = _ratios("ces_4x4_exact", ratios, 7)
    mats = _layout_kraus(CES44_LAYOUT, 4, 4, [(Fraction(r), Fraction(s)) for r, s in ratios],
                         dtype=object)
    return ExactSubspace((4, 4), _stinespring_columns(mats).T, "ces_4x4",
                         {"lambdas": tuple(_lam(r, s) for r, s in ratios)},
                         ("ces_4x4 Kraus layout, integer ratios",))


Q4 = np.array([[-1, 1, 1, 1], [1, -1, 1, 1], [1, 1, -1, 1], [1, 1, 1, -1]],
              dtype=object) * Fraction(1, 2)
T4 = np.array([[-1, 2, 0, 2], [2, -1, 0, 2], [0, 0, 3, 0], [2, 2, 0, -1]],
              dtype=object) * Fraction(1, 3)
U1_4Q = Q4.dot(T4)
U2_4Q = T4


def _four_qubit_steps(u1, u2):
    split_b = FactorizationScheme(1, (2, 2), QUBIT_PAIR_SCHEME.basis_map)
    split_a = QUBIT_PAIR_SCHEME
    return [("unitary", 0, u1), ("unitary", 1, u2), ("split", split_b), ("split", split_a)]


def ges_4qubit(lambdas: Sequence[float]) -> Subspace:
    """The 4 (x) 4 family with ``U_1 = QT`` on A, ``U_2 = T`` on B, each split into qubits.

    Genuine entanglement is not asserted here; run the certifier.
    """
    ces = ces_4x4(lambdas)
    u1 = to_complex_array(U1_4Q)
    u2 = to_complex_array(U2_4Q)
    rows, dims = _pipeline(ces.matrix().T, (4, 4), _four_qubit_steps(u1, u2))
    prov = tuple(f"{p} | QT on A, T on B | A -> A1 A2, B -> B1 B2" for p in ces.provenance)
    return Subspace.from_columns(dims, rows.T, prov)


def ges_4qubit_exact(ratios) -> ExactSubspace:
    base = ces_4x4_exact(ratios)
    rows, dims = _pipeline(base.vectors, (4, 4), _four_qubit_steps(U1_4Q, U2_4Q))
    return ExactSubspace(dims, rows, "ges_4qubit", dict(base.equivalent),
                         ("ces_4x4 integer ratios | QT on A, T on B | qubit splits",))


# ---------------------------------------------------------------- three qutrits

@dataclasses.dataclass(frozen=True)
class PovmTriple:
    """``P1 = A|u><u|``, ``P2 = A|v><v|``, ``P3 = I - P1 - P2`` with ``A = 1/(1 + sin 2a)``."""

    alpha: float
    p1: np.ndarray
    p2: np.ndarray
    p3: np.ndarray

    def eigenvalues(self) -> tuple[float, float, float]:
        s = math.sin(2 * self.alpha)
        return 1 / (1 + s), 1 / (1 + s), 2 * s / (1 + s)

    def amplitudes(self) -> np.ndarray:
        """Rows ``sqrt(eig_i) * conj(top eigenvector of P_i)``; ``P_i = row^dag row``."""
        c = math.cos(self.alpha)
        s = math.sin(self.alpha)
        a = 1 / math.sqrt(1 + math.sin(2 * self.alpha))
        c3 = math.sqrt(math.sin(2 * self.alpha) / (1 + math.sin(2 * self.alpha)))
        return np.array([[a * c, a * s], [a * s, a * c], [c3, -c3]])


def povm_triple(alpha: float) -> PovmTriple:
    alpha = float(alpha)
    if not 0.0 < alpha < math.pi / 4:
        raise ValueError("alpha must lie in (0, pi/4)")
    a = 1 / (1 + math.sin(2 * alpha))
    u = np.array([math.cos(alpha), math.sin(alpha)])
    v = np.array([math.sin(alpha), math.cos(alpha)])
    p1 = a * np.outer(u, u)
    p2 = a * np.outer(v, v)
    p3 = np.eye(2) - p1 - p2
    return PovmTriple(alpha, p1, p2, p3)


INSET_LAMBDAS = (
    (Fraction(2, 3), Fraction(0), Fraction(1, 3)),
    (Fraction(0), Fraction(1, 4), Fraction(3, 4)),
    (Fraction(1, 6), Fraction(5, 6), Fraction(0)),
    (Fraction(1, 3), Fraction(0), Fraction(2, 3)),
    (Fraction(0), Fraction(3, 4), Fraction(1, 4)),
    (Fraction(5, 6), Fraction(1, 6), Fraction(0)),
)
"""Diagonal positions 11..16 (rows) by Kraus operator (columns)."""

# W_i e_r = e_{perm[r]} (0-based), transcribed from the column lists (e1 e2 ...)
WP_PERMS = (
    (0, 1, 2, 3, 6, 7, 4, 5, 8),
    (5, 3, 6, 4, 7, 0, 8, 2, 1),
    (3, 6, 7, 0, 2, 5, 1, 8, 4),
)

# BLOCK_POVM[j][i]: which POVM element (0, 1, 2) Kraus operator i uses in block j.
# This is the assignment realized by the reference 9 x 3 spanning set; any
# assignment keeps the blocks summing to the identity.
BLOCK_POVM = ((0, 1, 2), (2, 0, 1), (1, 2, 0), (0, 2, 1), (2, 1, 0))

SCH3 = FactorizationScheme(0, (3, 3), ((2, 2), (2, 0), (2, 1), (1, 0), (0, 2),
                                       (0, 1), (0, 0), (1, 2), (1, 1)))


def _u3(dtype=float):
    u = np.eye(9, dtype=object)
    u[:] = Fraction(0)
    for i in range(9):
        u[i, i] = Fraction(1)
    idx = (2, 5, 6)
    for a in idx:
        for b in idx:
            u[a, b] = Fraction(-1, 3) if a == b else Fraction(2, 3)
    return u if dtype is object else to_complex_array(u).real


U3 = _u3()


def block_layout_feasible(n_in: int, n_out: int, n_kraus: int, n_blocks: int) -> bool:
    """Counting test for a block layout of ``K_i^dag K_i``.

    Each rank-one 2x2 block uses one singular value of every ``K_i`` and covers
    two diagonal positions; each remaining position needs at least two nonzero
    diagonal entries, and every ``K_i`` has at most ``n_out`` singular values.
    """
    if n_blocks < 0 or 2 * n_blocks > n_in or n_blocks > n_out:
        return False
    free_positions = n_in - 2 * n_blocks
    return 2 * free_positions <= n_kraus * (n_out - n_blocks)


def _validate_qutrit_table(lambdas, alphas, perms):
    lams = [tuple(Fraction(x) if not isinstance(x, float) else x for x in row) for row in lambdas]
    if len(lams) != 6 or any(len(row) != 3 for row in lams):
        raise ValueError("lambda table must have 6 rows of 3 entries")
    for row in lams:
        if any(x < 0 for x in row):
            raise ValueError("lambda entries must be nonnegative")
        if abs(float(sum(row)) - 1.0) > 1e-12:
            raise ValueError(f"lambda row {row} does not add up to 1")
        if sum(1 for x in row if x > 0) < 2:
            raise ValueError(f"lambda row {row} needs at least two positive entries")
        if any(x >= 1 for x in row):
            raise ValueError("each lambda must be strictly below 1")
    for i in range(3):
        if sum(1 for row in lams if row[i] > 0) > 4:
            raise ValueError(f"Kraus operator {i + 1} would need more than 9 singular values")
    if not block_layout_feasible(16, 9, 3, 5):
        raise ValueError("block layout infeasible")
    alphas = tuple(float(a) for a in alphas)
    if len(alphas) != 5 or any(not 0 < a < math.pi / 4 for a in alphas):
        raise ValueError("need five alphas in (0, pi/4)")
    perms = tuple(tuple(int(x) for x in p) for p in perms)
    if len(perms) != 3 or any(sorted(p) != list(range(9)) for p in perms):
        raise ValueError("need three permutations of range(9)")
    return lams, alphas, perms


def qutrit_kraus(lambdas=INSET_LAMBDAS, alphas=(math.pi / 6,) * 5, perms=WP_PERMS,
                 block_amps=None, diag_amps=None, dtype=complex, block_povm=BLOCK_POVM):
    """``K_i = W_i Sigma_i V_i`` as 9x16 matrices.

    Rows 0, 2, 4, 6, 8 of ``Sigma_i V_i`` hold the five 2x2 blocks; the
    nonzero diagonal entries of column ``i`` of the lambda table fill rows
    1, 3, 5, 7 in order of position. ``block_amps[j]`` and ``diag_amps`` let
    the exact sibling substitute rational amplitudes.
    """
    if block_amps is None:
        block_amps = [povm_triple(a).amplitudes() for a in alphas]
    if diag_amps is None:
        diag_amps = [[math.sqrt(float(x)) for x in row] for row in lambdas]
    mats = []
    for i in range(3):
        sv = np.zeros((9, 16), dtype=dtype)
        if dtype is object:
            sv.fill(Fraction(0))
        for j in range(5):
            e = block_povm[j][i]
            sv[2 * j, 2 * j] = block_amps[j][e][0]
            sv[2 * j, 2 * j + 1] = block_amps[j][e][1]
        slot = 1
        for pos, row in enumerate(lambdas):
            if row[i] > 0:
                sv[slot, 10 + pos] = diag_amps[pos][i]
                slot += 2
        k = np.zeros_like(sv)
        k[list(perms[i]), :] = sv
        mats.append(k)
    return mats


def ces_9x3(lambdas=INSET_LAMBDAS, alphas=(math.pi / 6,) * 5, perms=WP_PERMS) -> Subspace:
    """16-dimensional completely entangled subspace of 9 (x) 3 (before mixing and splitting)."""
    lams, alphas, perms = _validate_qutrit_table(lambdas, alphas, perms)
    ch = KrausChannel(16, 9, tuple(qutrit_kraus(lams, alphas, perms)))
    return subspace_from_isometry(isometry_from_kraus(ch), "qutrit block layout")


def ges_3qutrit(lambdas=INSET_LAMBDAS, alphas=(math.pi / 6,) * 5,
                perms=WP_PERMS) -> Subspace:
    """16-dimensional genuinely entangled subspace of three qutrits.

    Defaults reproduce the reference parameter choice; other tables are
    validated for the sum-to-one and singular-value counting rules.
    """
    ces = ces_9x3(lambdas, alphas, perms)
    rows, dims = _pipeline(ces.matrix().T, (9, 3), [("unitary", 0, _u3()), ("split", SCH3)])
    prov = tuple(f"{p} | mix |2>,|5>,|6> | 9 -> 3 x 3" for p in ces.provenance)
    return Subspace.from_columns(dims, rows.T, prov)


def ges_3qutrit_exact(pqr=(2, 1, 2), diag_weights=None, perms=WP_PERMS) -> ExactSubspace:
    """Exact sibling with ``tan(alpha) = q/p`` and ``r**2 == 2*p*q``.

    The block amplitudes ``c1 : c2 : c3`` then equal ``p : q : r``.
    ``diag_weights`` is a 6x3 table of nonnegative integers with the zero
    pattern of the lambda table (default: the reference pattern, all ones).
    """
    p, q, r = (int(x) for x in pqr)
    if min(p, q, r) <= 0 or r * r != 2 * p * q or not q < p:
        raise ValueError("need positive integers with r**2 == 2*p*q and q < p")
    if diag_weights is None:
        diag_weights = [[1 if x > 0 else 0 for x in row] for row in INSET_LAMBDAS]
    diag_weights = [[int(x) for x in row] for row in diag_weights]
    lambdas = [[Fraction(w * w, sum(x * x for x in row)) for w in row] for row in diag_weights]
    alpha = math.atan2(q, p)
    _validate_qutrit_table(lambdas, (alpha,) * 5, perms)
    f = Fraction
    block = [[(f(p), f(q)), (f(q), f(p)), (f(r), f(-r))]] * 5
    diag = [[f(w) for w in row] for row in diag_weights]
    mats = qutrit_kraus(lambdas, (alpha,) * 5, perms, block, diag, dtype=object)
    rows, dims = _pipeline(_stinespring_columns(mats).T, (9, 3),
                           [("unitary", 0, U3), ("split", SCH3)])
    return ExactSubspace(dims, rows, "ges_3qutrit",
                         {"alpha": alpha, "lambdas": tuple(tuple(r_) for r_ in lambdas)},
                         ("qutrit block layout with integer amplitudes | U3 | sch3",))


# ---------------------------------------------------------------- dimension counts

def max_ces_dim(d1: int, d2: int) -> int:
    """Largest dimension of a completely entangled subspace of ``d1 (x) d2``."""
    if d1 < 1 or d2 < 1:
        raise ValueError("dimensions must be positive")
    return d1 * d2 - (d1 + d2) + 1


def max_ges_dim(dims) -> int:
    """Upper bound: the smallest completely entangled dimension over all cuts."""
    dims = check_dims(dims)
    if len(dims) < 2:
        raise ValueError("need at least two subsystems")
    return min(max_ces_dim(*cut.shape(dims)) for cut in bipartitions(len(dims)))
