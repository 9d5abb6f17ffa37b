import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from entsub.tensor import (Bipartition, DensityMatrix, FactorizationScheme, PureState,
                           apply_local_unitary, bipartitions, factorize_subsystem, ky_fan_norm,
                           matricize, partial_trace, partial_transpose, product_state,
                           random_pure_state, random_unitary, schmidt_coefficients,
                           trace_norm, vectorize)

dims_strategy = st.lists(st.integers(2, 3), min_size=2, max_size=4).map(tuple)


def bell():
    return PureState((2, 2), np.array([1, 0, 0, 1]) / math.sqrt(2))


def test_bipartition_enumeration_order():
    cuts = bipartitions(3)
    assert [c.side_a for c in cuts] == [(0,), (0, 1), (0, 2)]
    assert [c.label() for c in cuts] == ["A|BC", "AB|C", "AC|B"]


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_bipartition_count(n):
    cuts = bipartitions(n)
    assert len(cuts) == 2 ** (n - 1) - 1
    assert len(set(cuts)) == len(cuts)
    assert all(0 in c.side_a for c in cuts)


def test_bipartition_canonicalizes_complement():
    assert Bipartition.of([1, 2], 3) == Bipartition((0,), 3)
    with pytest.raises(ValueError):
        Bipartition((1,), 3)
    with pytest.raises(ValueError):
        Bipartition((0, 1, 2), 3)


def test_pure_state_validation():
    with pytest.raises(ValueError):
        PureState((2, 2), np.ones(4))
    with pytest.raises(ValueError):
        PureState((2, 2), np.ones(3) / math.sqrt(3))
    with pytest.raises(ValueError):
        PureState((1, 2), np.array([1, 0]))


def test_density_matrix_validation():
    with pytest.raises(ValueError):
        DensityMatrix((2,), np.array([[1, 1], [0, 0]]))
    with pytest.raises(ValueError):
        DensityMatrix((2,), np.diag([1.5, -0.5]))
    with pytest.raises(ValueError):
        DensityMatrix((2,), np.diag([0.5, 0.4]))


def test_schmidt_of_unequal_superposition():
    psi = PureState((2, 2), np.array([0.5, 0, 0, math.sqrt(3) / 2]))
    s = schmidt_coefficients(psi, Bipartition((0,), 2))
    assert np.allclose(s, [math.sqrt(3) / 2, 0.5], atol=1e-12)


def test_bell_reduced_state_is_maximally_mixed():
    red = partial_trace(bell().density(), [0])
    assert np.allclose(red.matrix, np.eye(2) / 2, atol=1e-12)


def test_partial_trace_matches_einsum(rng):
    psi = random_pure_state((2, 3, 2), rng)
    t = psi.tensor()
    # keep subsystems 0 and 2, trace subsystem 1
    oracle = np.einsum("abc,dbf->acdf", t, t.conj()).reshape(4, 4)
    assert np.allclose(partial_trace(psi.density(), [0, 2]).matrix, oracle, atol=1e-12)


def test_partial_transpose_of_bell_has_negative_eigenvalue():
    pt = partial_transpose(bell().density(), Bipartition((0,), 2))
    assert np.allclose(np.sort(np.linalg.eigvalsh(pt)), [-0.5, 0.5, 0.5, 0.5], atol=1e-12)
    assert trace_norm(pt) == pytest.approx(2.0, abs=1e-12)


def test_ky_fan_norm():
    assert ky_fan_norm(np.array([0.1, 0.5, 0.4]), 2) == pytest.approx(0.9)
    assert ky_fan_norm(np.diag([0.2, 0.3, 0.5]), 1) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        ky_fan_norm(np.array([1.0]), 2)


@settings(max_examples=40, deadline=None)
@given(dims=dims_strategy, seed=st.integers(0, 2**32 - 1), data=st.data())
def test_matricize_vectorize_roundtrip(dims, seed, data):
    psi = random_pure_state(dims, np.random.default_rng(seed))
    cut = data.draw(st.sampled_from(bipartitions(len(dims))))
    m = matricize(psi, cut)
    assert m.shape == cut.shape(dims)
    assert np.array_equal(vectorize(m, dims, cut), psi.amplitudes)


@settings(max_examples=40, deadline=None)
@given(dims=dims_strategy, seed=st.integers(0, 2**32 - 1))
def test_schmidt_squares_sum_to_one(dims, seed):
    psi = random_pure_state(dims, np.random.default_rng(seed))
    for cut in bipartitions(len(dims)):
        s = schmidt_coefficients(psi, cut)
        assert np.all(np.diff(s) <= 1e-15)
        assert np.sum(s ** 2) == pytest.approx(1.0, abs=1e-12)


def test_product_state_has_one_schmidt_coefficient(rng):
    vecs = [rng.standard_normal(d) + 1j * rng.standard_normal(d) for d in (2, 3, 2)]
    psi = product_state(vecs)
    for cut in bipartitions(3):
        assert schmidt_coefficients(psi, cut)[0] == pytest.approx(1.0, abs=1e-12)


def test_local_unitary_preserves_schmidt(rng):
    psi = random_pure_state((3, 2, 2), rng)
    phi = apply_local_unitary(psi, random_unitary(2, rng), 1)
    for cut in bipartitions(3):
        assert np.allclose(schmidt_coefficients(psi, cut), schmidt_coefficients(phi, cut),
                           atol=1e-12)
    with pytest.raises(ValueError):
        apply_local_unitary(psi, np.ones((2, 2)), 1)
    with pytest.raises(ValueError):
        apply_local_unitary(psi, np.eye(3), 1)


def test_factorization_relabels_amplitudes():
    scheme = FactorizationScheme(0, (2, 2), ((1, 1), (0, 0), (0, 1), (1, 0)))
    # |s> (x) |b>  ->  |i j> (x) |b> with (i, j) = basis_map[s]
    psi = PureState.basis((4, 2), (0, 1))
    out = factorize_subsystem(psi, scheme)
    assert out.dims == (2, 2, 2)
    assert out.amplitudes[np.ravel_multi_index((1, 1, 1), (2, 2, 2))] == 1


def test_factorization_scheme_validation():
    with pytest.raises(ValueError):
        FactorizationScheme(0, (2, 2), ((0, 0), (0, 0), (0, 1), (1, 0)))
    with pytest.raises(ValueError):
        FactorizationScheme(0, (2, 2), ((0, 0), (0, 1), (1, 0), (1, 2)))
