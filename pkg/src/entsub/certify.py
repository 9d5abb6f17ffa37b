"""Complete and genuine entanglement certificates for subspaces.

Two independent routes decide whether a subspace contains a vector that is
a product across a cut:

* exact: the span contains a product vector iff some nonzero combination
  ``sum_mu beta_mu a^(mu)`` of the matricized basis has rank one, i.e. all its
  2x2 minors vanish. The minor system is homogeneous in ``beta`` and is
  decided by :func:`entsub.polysys.analyze_charts`.
* numeric: ``lambda1_bar = max ||Pi (x (x) y)||^2`` over unit product
  vectors, found by seesaw (alternating top singular vectors) from seeded
  random starts. Only a strictly positive gap ``1 - lambda1_bar`` supports an
  entangled verdict.
"""
from __future__ import annotations

import dataclasses
import itertools
from typing import Sequence

import numpy as np

from .config import tolerances
from .constructions import ExactSubspace, Subspace
from .polysys import (GroebnerLimitError, IrrationalEntryError, Polynomial, analyze_charts,
                      exact_matrix)
from .tensor import Bipartition, PureState, bipartitions, matricize_array, vectorize_array

VERDICTS = ("entangled", "product_found", "inconclusive")
MODES = ("exact", "numeric", "both")


@dataclasses.dataclass(frozen=True)
class Certificate:
    cut: Bipartition
    mode: str
    verdict: str
    lambda1: float | None = None
    restarts: int | None = None
    witness: PureState | None = dataclasses.field(default=None, compare=False)
    groebner: str | None = None
    span_sibling: bool = False
    spairs: int | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")

    @property
    def entangled(self) -> bool:
        return self.verdict == "entangled"


@dataclasses.dataclass(frozen=True)
class SubspaceEntanglement:
    per_cut_lambda1: dict
    g_gme: float
    basis_lambda1: dict = dataclasses.field(default_factory=dict)
    restarts: int = 0

    def argmax_cut(self) -> Bipartition:
        return max(self.per_cut_lambda1, key=lambda c: self.per_cut_lambda1[c])


# ---------------------------------------------------------------- minor systems

def _linear_entries(pencil: Sequence[np.ndarray]):
    """Matrix of linear forms ``{var_index: coeff}`` for ``sum_mu beta_mu pencil[mu]``."""
    rows, cols = pencil[0].shape
    out = [[{} for _ in range(cols)] for _ in range(rows)]
    for mu, a in enumerate(pencil):
        for (r, c), v in np.ndenumerate(a):
            if v:
                out[r][c][mu] = v
    return out


def _product(f: dict, g: dict, n: int) -> dict:
    out = {}
    for i, a in f.items():
        for j, b in g.items():
            mon = [0] * n
            mon[i] += 1
            mon[j] += 1
            mon = tuple(mon)
            v = out.get(mon, 0) + a * b
            if v:
                out[mon] = v
            else:
                out.pop(mon, None)
    return out


def minor_system_from_matrices(pencil: Sequence[np.ndarray], prefix: str = "b"):
    """All distinct nonzero 2x2 minors of ``sum_mu beta_mu pencil[mu]``.

    Returns ``(polys, names)`` with variables ``{prefix}1 .. {prefix}k``.
    Minors equal up to a scalar factor are kept once.
    """
    pencil = [exact_matrix(a) for a in pencil]
    k = len(pencil)
    names = tuple(f"{prefix}{i + 1}" for i in range(k))
    lin = _linear_entries(pencil)
    rows, cols = pencil[0].shape
    polys = []
    seen = set()
    for r1, r2 in itertools.combinations(range(rows), 2):
        for c1, c2 in itertools.combinations(range(cols), 2):
            if not (lin[r1][c1] or lin[r1][c2]) or not (lin[r2][c1] or lin[r2][c2]):
                continue
            t = _product(lin[r1][c1], lin[r2][c2], k)
            for mon, v in _product(lin[r1][c2], lin[r2][c1], k).items():
                w = t.get(mon, 0) - v
                if w:
                    t[mon] = w
                else:
                    t.pop(mon, None)
            if not t:
                continue
            p = Polynomial._raw(names, t).monic()
            key = frozenset(p.terms.items())
            if key not in seen:
                seen.add(key)
                polys.append(p)
    return polys, names


def _exact_vectors(subspace) -> tuple[np.ndarray, bool]:
    if isinstance(subspace, ExactSubspace):
        return subspace.vectors, subspace.sibling_of is not None
    return exact_matrix(subspace.matrix().T), False


def _pencil(vectors, dims, cut: Bipartition):
    return [matricize_array(v, dims, cut) for v in vectors]


def minor_system(subspace, cut: Bipartition) -> list[Polynomial]:
    """Homogeneous quadratic minors in ``b1 .. bk``; needs exact amplitudes."""
    vectors, _ = _exact_vectors(subspace)
    polys, _ = minor_system_from_matrices(_pencil(vectors, subspace.dims, cut))
    return polys


def certify_ces_exact(subspace, cut: Bipartition, cap: int | None = None) -> Certificate:
    """Exact verdict for one cut: entangled iff every chart has Groebner basis {1}.

    Raises :class:`GroebnerLimitError` if a chart exceeds the S-pair cap.
    """
    vectors, sibling = _exact_vectors(subspace)
    polys, names = minor_system_from_matrices(_pencil(vectors, subspace.dims, cut))
    report = analyze_charts(polys, names, cap=cap)
    if report.trivial_only:
        return Certificate(cut, "exact", "entangled", groebner=report.summary(),
                           span_sibling=sibling, spairs=report.spairs)
    text = report.summary()
    if report.failing_basis:
        text += ": " + "; ".join(report.failing_basis[:6])
    return Certificate(cut, "exact", "product_found", groebner=text,
                       span_sibling=sibling, spairs=report.spairs)


# ---------------------------------------------------------------- seesaw

@dataclasses.dataclass(frozen=True)
class SeesawRun:
    value: float
    x: np.ndarray
    y: np.ndarray
    history: np.ndarray  # objective after each half-step


def _overlap_tensor(subspace: Subspace, cut: Bipartition) -> np.ndarray:
    """``T[mu, a, b] = conj(a^(mu)_{ab})`` so that ``<v_mu|x (x) y> = x T_mu y``."""
    return np.stack([matricize_array(v.amplitudes, subspace.dims, cut).conj()
                     for v in subspace.basis])


def _top_right(r: np.ndarray):
    """Batched: unit ``y`` maximizing ``||r y||`` and the value ``||r y||^2``."""
    _, s, vh = np.linalg.svd(r, full_matrices=False)
    return vh[..., 0, :].conj(), s[..., 0] ** 2


def _seesaw_batch(t: np.ndarray, x0: np.ndarray, max_sweeps: int, tol: float):
    """Run all starts together; a start stops logging once its sweep gain < ``tol``."""
    x = x0
    hist = [[] for _ in range(x0.shape[0])]
    prev = np.full(x0.shape[0], -np.inf)
    active = np.ones(x0.shape[0], dtype=bool)
    y = vals = None
    for _ in range(max_sweeps):
        y, v1 = _top_right(np.einsum("mab,ra->rmb", t, x))
        x, vals = _top_right(np.einsum("mab,rb->rma", t, y))
        for i in np.nonzero(active)[0]:
            hist[i].extend((float(v1[i]), float(vals[i])))
        active &= vals - prev >= tol
        prev = vals
        if not active.any():
            break
    return vals, x, y, hist


def seesaw(subspace: Subspace, cut: Bipartition, x0: np.ndarray, max_sweeps: int = 2000,
           tol: float = 1e-15) -> SeesawRun:
    """Single seesaw run from side-a start ``x0`` with full objective history."""
    t = _overlap_tensor(subspace, cut)
    x0 = np.asarray(x0, dtype=complex)
    vals, x, y, hist = _seesaw_batch(t, (x0 / np.linalg.norm(x0))[None, :], max_sweeps, tol)
    return SeesawRun(float(vals[0]), x[0], y[0], np.array(hist[0]))


def _seed_sequence(seed) -> np.random.SeedSequence:
    return seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)


def random_starts(dim: int, restarts: int, seed) -> np.ndarray:
    """Restart ``r`` uses the ``r``-th child of the seed sequence (prefix-stable)."""
    rows = []
    for child in _seed_sequence(seed).spawn(restarts):
        rng = np.random.default_rng(child)
        v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        rows.append(v / np.linalg.norm(v))
    return np.array(rows)


def max_product_overlap(subspace, cut: Bipartition, restarts: int = 200, seed=0,
                        max_sweeps: int = 2000) -> tuple[float, PureState]:
    """``(lambda1_bar, witness)``: best product overlap with the subspace across ``cut``.

    The witness is the best product vector ``x (x) y`` found, as a state on the
    full dims.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    if isinstance(subspace, ExactSubspace):
        subspace = subspace.to_subspace()
    t = _overlap_tensor(subspace, cut)
    x0 = random_starts(t.shape[1], restarts, seed)
    vals, x, y, _ = _seesaw_batch(t, x0, max_sweeps, 1e-15)
    best = int(np.argmax(vals))
    lam = float(min(max(vals[best], 0.0), 1.0))
    witness = PureState(subspace.dims,
                        vectorize_array(np.outer(x[best], y[best]), subspace.dims, cut))
    return lam, witness


def basis_lambda1(subspace, cut: Bipartition) -> float:
    """Largest squared Schmidt coefficient over the basis vectors (a lower bound)."""
    if isinstance(subspace, ExactSubspace):
        subspace = subspace.to_subspace()
    return max(float(np.linalg.svd(matricize_array(v.amplitudes, subspace.dims, cut),
                                   compute_uv=False)[0] ** 2) for v in subspace.basis)


def certify_numeric(subspace, cut: Bipartition, restarts: int = 200, seed=0) -> Certificate:
    tol = tolerances()
    lam, witness = max_product_overlap(subspace, cut, restarts, seed)
    if 1 - lam >= tol.numeric_gap and restarts >= tol.min_restarts:
        verdict = "entangled"
    elif lam > 1 - tol.witness:
        verdict = "product_found"
    else:
        verdict = "inconclusive"
    sibling = isinstance(subspace, ExactSubspace) and subspace.sibling_of is not None
    return Certificate(cut, "numeric", verdict, lambda1=lam, restarts=restarts,
                       witness=witness, span_sibling=sibling)


def _combine(exact: Certificate | None, numeric: Certificate, limit: str | None) -> Certificate:
    if exact is None:
        return dataclasses.replace(numeric, mode="both", groebner=limit)
    if exact.verdict == "product_found":
        verdict = "product_found"
    elif numeric.verdict == "product_found":
        verdict = "inconclusive"  # the two routes disagree
    else:
        verdict = "entangled"
    return Certificate(exact.cut, "both", verdict, numeric.lambda1, numeric.restarts,
                       numeric.witness, exact.groebner, exact.span_sibling, exact.spairs)


def certify_cut(subspace, cut: Bipartition, mode: str = "both", restarts: int = 200,
                seed=0, cap: int | None = None) -> Certificate:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    exact = None
    limit = None
    if mode in ("exact", "both"):
        try:
            exact = certify_ces_exact(subspace, cut, cap)
        except GroebnerLimitError as err:
            if mode == "exact":
                sibling = isinstance(subspace, ExactSubspace) and subspace.sibling_of is not None
                return Certificate(cut, "exact", "inconclusive", groebner=str(err),
                                   span_sibling=sibling)
            limit = f"groebner limit: {err}"
        except IrrationalEntryError:
            if mode == "exact":
                raise
            limit = "exact route skipped: amplitudes are not rational"
        if mode == "exact":
            return exact
    numeric = certify_numeric(subspace, cut, restarts, seed)
    if mode == "numeric":
        return numeric
    return _combine(exact, numeric, limit)


def certify_ges(subspace, mode: str = "both", restarts: int = 200, seed=0,
                cap: int | None = None) -> list[Certificate]:
    """One certificate per canonical bipartition (ordered by size, then lexicographic)."""
    cuts = bipartitions(len(subspace.dims))
    seeds = _seed_sequence(seed).spawn(len(cuts))
    return [certify_cut(subspace, c, mode, restarts, s, cap) for c, s in zip(cuts, seeds)]


def is_ges(certificates: Sequence[Certificate]) -> bool:
    return all(c.entangled for c in certificates)


def subspace_entanglement(subspace, restarts: int = 200, seed=0) -> SubspaceEntanglement:
    """``lambda1_bar`` per cut and ``G_GME = 1 - max_cut lambda1_bar``."""
    if isinstance(subspace, ExactSubspace):
        subspace = subspace.to_subspace()
    cuts = bipartitions(subspace.n)
    seeds = _seed_sequence(seed).spawn(len(cuts))
    per_cut = {}
    lower = {}
    for cut, s in zip(cuts, seeds):
        lam, _ = max_product_overlap(subspace, cut, restarts, s)
        lower[cut] = basis_lambda1(subspace, cut)
        per_cut[cut] = max(lam, lower[cut])
    g = 1.0 - max(per_cut.values())
    return SubspaceEntanglement(per_cut, min(max(g, 0.0), 1.0), lower, restarts)
