import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from entsub.constructions import antisymmetric_subspace, ges_3qubit, hw_ges
from entsub.measures import (BoundReport, bipartite_concurrence_lb, bipartite_cren_lb,
                             concurrence_dimension, concurrence_pure, geometric_pure,
                             gme_bounds, gme_pure, negativity, overlap, spectrum_robustness,
                             white_noise_robustness)
from entsub.tensor import (Bipartition, DensityMatrix, PureState, apply_local_unitary,
                           bipartitions, product_state, random_pure_state, random_unitary)

CUT2 = Bipartition((0,), 2)
BELL = PureState((2, 2), np.array([1, 0, 0, 1]) / math.sqrt(2))
UNEVEN = PureState((2, 2), np.array([0.5, 0, 0, math.sqrt(3) / 2]))
PRODUCT = PureState.basis((2, 2), (0, 1))


def random_supported_state(sub, rng, rank=None):
    """Random mixed state whose support lies inside ``sub``."""
    k = sub.dim if rank is None else rank
    g = rng.standard_normal((sub.dim, k)) + 1j * rng.standard_normal((sub.dim, k))
    inner = g @ g.conj().T
    inner /= np.trace(inner)
    m = sub.matrix()
    return DensityMatrix(sub.dims, m @ inner @ m.conj().T)


def test_concurrence_examples():
    assert concurrence_pure(BELL, CUT2) == pytest.approx(1.0)
    assert concurrence_pure(PRODUCT, CUT2) == pytest.approx(0.0, abs=1e-12)
    # partial-trace oracle: rho_A = diag(1/4, 3/4), purity 5/8
    assert concurrence_pure(UNEVEN, CUT2) == pytest.approx(math.sqrt(2 * (1 - 5 / 8)))


def test_negativity_examples():
    assert negativity(BELL.density(), CUT2) == pytest.approx(0.5)
    assert negativity(PRODUCT, CUT2) == pytest.approx(0.0, abs=1e-12)
    # eigenvalues of the partial transpose: 1/4, 3/4, +-sqrt(3)/4
    assert negativity(UNEVEN, CUT2) == pytest.approx(math.sqrt(3) / 4)


def test_geometric_examples():
    assert geometric_pure(BELL, CUT2) == pytest.approx(0.5)
    assert geometric_pure(PRODUCT, CUT2) == pytest.approx(0.0, abs=1e-12)
    assert geometric_pure(UNEVEN, CUT2) == pytest.approx(0.25)


def test_gme_examples():
    ghz = PureState((2, 2, 2), np.eye(8)[0] / math.sqrt(2) + np.eye(8)[7] / math.sqrt(2))
    assert gme_pure(ghz, "geometric") == pytest.approx(0.5)
    zero_bell = PureState((2, 2, 2), np.kron([1, 0], BELL.amplitudes))
    for m in ("concurrence", "negativity", "geometric"):
        assert gme_pure(zero_bell, m) == pytest.approx(0.0, abs=1e-12)
    phi1 = hw_ges().basis[0]
    assert gme_pure(phi1, "geometric") >= 0.5 - 1e-8
    assert geometric_pure(phi1, Bipartition((0,), 3)) == pytest.approx(0.5, abs=1e-12)
    with pytest.raises(ValueError):
        gme_pure(ghz, "entropy")


@settings(max_examples=40, deadline=None)
@given(dims=st.lists(st.integers(2, 3), min_size=2, max_size=3).map(tuple),
       seed=st.integers(0, 2**32 - 1))
def test_measure_ranges_and_min_property(dims, seed):
    psi = random_pure_state(dims, np.random.default_rng(seed))
    for cut in bipartitions(len(dims)):
        d = min(cut.shape(dims))
        g = geometric_pure(psi, cut)
        c = concurrence_pure(psi, cut)
        assert -1e-12 <= g <= 1 - 1 / d + 1e-12
        assert -1e-12 <= c <= math.sqrt(2 * (d - 1) / d) + 1e-12
        for m in ("concurrence", "negativity", "geometric"):
            assert gme_pure(psi, m) <= {"concurrence": c, "geometric": g,
                                         "negativity": negativity(psi, cut)}[m] + 1e-12


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_measures_invariant_under_local_unitaries(seed):
    rng = np.random.default_rng(seed)
    dims = (2, 3, 2)
    psi = random_pure_state(dims, rng)
    phi = psi
    for k, d in enumerate(dims):
        phi = apply_local_unitary(phi, random_unitary(d, rng), k)
    for cut in bipartitions(3):
        assert concurrence_pure(psi, cut) == pytest.approx(concurrence_pure(phi, cut), abs=1e-8)
        assert geometric_pure(psi, cut) == pytest.approx(geometric_pure(phi, cut), abs=1e-8)
        assert negativity(psi, cut) == pytest.approx(negativity(phi, cut), abs=1e-8)


def test_ppt_states_have_zero_negativity(rng):
    for _ in range(10):
        x = product_state([random_pure_state((3,), rng).amplitudes,
                           random_pure_state((2,), rng).amplitudes])
        y = product_state([random_pure_state((3,), rng).amplitudes,
                           random_pure_state((2,), rng).amplitudes])
        rho = DensityMatrix((3, 2), 0.3 * x.density().matrix + 0.7 * y.density().matrix)
        assert negativity(rho, CUT2) == pytest.approx(0.0, abs=1e-12)


# ---------------------------------------------------------------- bounds

def test_bipartite_bounds_on_antisymmetric_subspace(rng):
    w = antisymmetric_subspace(3)
    rho = random_supported_state(w, rng)
    assert bipartite_cren_lb(rho, w, 0.5) == pytest.approx(0.5)
    # d = 3: sqrt(2/6) * (1 - 1/2) / (1/2)
    assert bipartite_concurrence_lb(rho, w, 0.5) == pytest.approx(math.sqrt(1 / 3))
    mixed = DensityMatrix((3, 3), np.eye(9) / 9)
    assert overlap(mixed, w) == pytest.approx(3 / 9)
    assert bipartite_cren_lb(mixed, w, 0.5) == 0.0
    assert bipartite_concurrence_lb(mixed, w, 0.5) == 0.0
    with pytest.raises(ValueError):
        bipartite_cren_lb(rho, w, 1.0)


def test_gme_negativity_bound_on_hw_ges(rng):
    s = hw_ges()
    rho = random_supported_state(s, rng)
    report = gme_bounds(rho, s, g=0.5)
    assert isinstance(report, BoundReport)
    assert report.negativity_lb == pytest.approx(0.5)
    assert report.d_used == 3 and not report.d_flagged
    assert report.concurrence_lb == pytest.approx(math.sqrt(2 / 6))
    assert report.robustness_white == pytest.approx(9 / 16)


def test_bounds_vanish_at_the_clamp_boundary(rng):
    s = hw_ges()
    rho_in = random_supported_state(s, rng).matrix
    noise = np.eye(27) / 27
    # overlap = t + (1 - t) * 3/27; choose t so that overlap = 1/2
    t = (0.5 - 3 / 27) / (1 - 3 / 27)
    rho = DensityMatrix(s.dims, t * rho_in + (1 - t) * noise)
    report = gme_bounds(rho, s, g=0.5)
    assert report.overlap == pytest.approx(0.5)
    assert report.negativity_lb == pytest.approx(0.0, abs=1e-12)
    assert report.concurrence_lb == pytest.approx(0.0, abs=1e-12)


def test_gme_bounds_never_exceed_pure_state_values(rng):
    s = hw_ges()
    for _ in range(200):
        c = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        psi = PureState(s.dims, s.matrix() @ (c / np.linalg.norm(c)))
        report = gme_bounds(psi.density(), s, g=0.5)
        assert report.negativity_lb <= gme_pure(psi, "negativity") + 1e-9
        assert report.concurrence_lb <= gme_pure(psi, "concurrence") + 1e-9


def test_gme_bounds_validation(rng):
    s = hw_ges()
    rho = random_supported_state(s, rng)
    for g in (0.0, 1.0, 1.5):
        with pytest.raises(ValueError):
            gme_bounds(rho, s, g=g)
    with pytest.raises(ValueError):
        gme_bounds(DensityMatrix((2, 2), np.eye(4) / 4), s, g=0.5)


def test_gme_bounds_estimates_g_when_missing(rng):
    s = ges_3qubit((0.5, 0.5, 0.5))
    rho = random_supported_state(s, rng)
    report = gme_bounds(rho, s, restarts=30)
    assert 0 < report.g_gme_used < 0.5
    assert report.negativity_lb == pytest.approx(report.g_gme_used / (2 * (1 - report.g_gme_used)))


def test_concurrence_dimension_rule():
    assert concurrence_dimension((3, 3, 3)) == 3
    assert concurrence_dimension((2, 2, 2, 2)) == 4
    assert concurrence_dimension((9, 3)) == 3


def test_white_noise_threshold():
    s = hw_ges()
    assert white_noise_robustness(s, Fraction(1, 2)) == Fraction(9, 16)
    assert white_noise_robustness(s, 0.5) == 0.5625
    assert white_noise_robustness((2, 4), 0.5) == 1.0
    with pytest.raises(ValueError):
        white_noise_robustness((4, 4), 0.5)


def test_spectrum_threshold():
    s = hw_ges()
    flat = np.full(27, 1 / 27)
    assert spectrum_robustness(s, 0.5, flat) == pytest.approx(white_noise_robustness(s, 0.5),
                                                               rel=1e-12)
    spike = np.zeros(27)
    spike[0] = 1.0
    assert spectrum_robustness(s, 0.5, spike) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        spectrum_robustness(s, 0.5, np.full(26, 1 / 26))
    with pytest.raises(ValueError):
        spectrum_robustness(s, 0.5, np.full(27, 1 / 20))
