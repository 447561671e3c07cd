"""Weighted block algebras: trace, spectral calculus, ampliation, sampling."""

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from sobolev_lab import (
    ContractViolationError,
    WeightedAlgebra,
    eigh,
    inner,
    make_rng,
    matrix_function,
    pair_trace,
    random_element,
    random_positive,
    trace,
)
from sobolev_lab.algebra import (
    AlgebraElement,
    ampliate,
    element_from_json,
    element_to_json,
    p_norm,
)
from sobolev_lab.functions import power

seeds = st.integers(min_value=0, max_value=10_000)


def mixed_algebra():
    return WeightedAlgebra.build([("a", 3), ("b", 2)], weights=(0.4, 0.6))


# -- construction -------------------------------------------------------------

def test_weights_must_sum_to_one():
    with pytest.raises(ContractViolationError):
        WeightedAlgebra.build([("a", 1), ("b", 1)], weights=(0.3, 0.3))


def test_weights_must_be_positive():
    with pytest.raises(ContractViolationError):
        WeightedAlgebra.build([("a", 1), ("b", 1)], weights=(1.0, 0.0))


def test_default_weights_are_uniform():
    alg = WeightedAlgebra.block_sites(4, 2)
    assert alg.weights == (0.25, 0.25, 0.25, 0.25)
    assert alg.dims == (2, 2, 2, 2)


# -- trace and inner product ---------------------------------------------------

def test_trace_of_identity_is_one():
    assert trace(mixed_algebra().identity()) == pytest.approx(1.0, abs=1e-14)


def test_trace_single_site_block_normalized():
    # one site of dim 2: tau(diag(2, 0)) = (2 + 0)/2
    alg = WeightedAlgebra.full_matrix(2)
    x = AlgebraElement(alg, [np.diag([2.0, 0.0]).astype(complex)])
    assert trace(x) == pytest.approx(1.0, abs=1e-14)


def test_trace_weighted_two_points():
    # weights (1/4, 3/4), values (4, 0): weighted mean is 1
    alg = WeightedAlgebra.commutative(2, weights=(0.25, 0.75))
    x = alg.from_scalars([4.0, 0.0])
    assert trace(x) == pytest.approx(1.0, abs=1e-14)


@given(s1=seeds, s2=seeds)
@settings(max_examples=40, deadline=None)
def test_trace_is_tracial(s1, s2):
    alg = mixed_algebra()
    x = random_element(alg, seed=s1)
    y = random_element(alg, seed=s2)
    assert abs(pair_trace(x, y) - pair_trace(y, x)) <= 1e-12


def test_inner_of_identities():
    one = mixed_algebra().identity()
    assert inner(one, one) == pytest.approx(1.0, abs=1e-14)


def test_inner_orthogonal_matrix_units():
    alg = WeightedAlgebra.full_matrix(2)
    e01 = AlgebraElement(alg, [np.array([[0, 1], [0, 0]], dtype=complex)])
    e10 = AlgebraElement(alg, [np.array([[0, 0], [1, 0]], dtype=complex)])
    assert inner(e01, e10) == 0.0


@given(s=seeds)
@settings(max_examples=60, deadline=None)
def test_inner_is_positive(s):
    a = random_element(mixed_algebra(), seed=s)
    v = inner(a, a)
    assert v.real >= 0.0
    assert abs(v.imag) <= 1e-14 * (1.0 + v.real)


def test_vec_matches_inner():
    """The orthonormal coefficient vector reproduces the tau inner product."""
    alg = mixed_algebra()
    a = random_element(alg, seed=5)
    b = random_element(alg, seed=6)
    va, vb = alg.vec(a), alg.vec(b)
    assert np.vdot(va, vb) == pytest.approx(inner(a, b), abs=1e-13)
    back = alg.unvec(va)
    assert back.allclose(a, atol=1e-13)


# -- eigh ----------------------------------------------------------------------

def test_eigh_identity_single_cluster():
    alg = WeightedAlgebra.full_matrix(3)
    spec = eigh(alg.identity())
    np.testing.assert_allclose(spec.eigenvalues[0], [1.0, 1.0, 1.0], atol=1e-14)
    assert spec.clusters[0] == ((0, 1, 2),)


def test_eigh_diagonal_three_clusters():
    alg = WeightedAlgebra.full_matrix(3)
    h = AlgebraElement(alg, [np.diag([1.0, 2.0, 3.0]).astype(complex)])
    spec = eigh(h, cluster_tol=1e-8)
    np.testing.assert_allclose(spec.eigenvalues[0], [1.0, 2.0, 3.0], atol=1e-14)
    assert spec.clusters[0] == ((0,), (1,), (2,))


@given(s=seeds)
@settings(max_examples=30, deadline=None)
def test_eigh_reconstruction(s):
    alg = WeightedAlgebra.full_matrix(6)
    h = random_element(alg, seed=s, hermitian=True)
    spec = eigh(h)
    err = (spec.reconstruct() - h).norm()
    assert err <= 1e-10 * (1.0 + h.norm())


def test_eigh_rejects_non_hermitian():
    alg = WeightedAlgebra.full_matrix(2)
    x = AlgebraElement(alg, [np.array([[0, 1], [0, 0]], dtype=complex)])
    with pytest.raises(ContractViolationError):
        eigh(x)


# -- matrix functions -----------------------------------------------------------

def test_matrix_function_identity_map():
    rho = random_positive(mixed_algebra(), seed=3)
    out = matrix_function(power(1.0), rho)
    assert out.allclose(rho, atol=1e-12)


def test_matrix_function_square_of_diagonal():
    alg = WeightedAlgebra.full_matrix(2)
    rho = AlgebraElement(alg, [np.diag([1.0, 2.0]).astype(complex)])
    out = matrix_function(power(2.0), rho)
    np.testing.assert_allclose(out.blocks[0], np.diag([1.0, 4.0]), atol=1e-13)


def test_matrix_function_p15_against_sqrtm():
    # independent oracle: rho^(3/2) = rho @ sqrtm(rho)
    alg = WeightedAlgebra.full_matrix(4)
    rho = random_positive(alg, seed=11)
    out = matrix_function(power(1.5), rho)
    oracle = rho.blocks[0] @ scipy.linalg.sqrtm(rho.blocks[0])
    assert np.linalg.norm(out.blocks[0] - oracle) <= 1e-9


def test_matrix_function_composition():
    # x^(3/4) = (x^(1/2))^(3/2); the outer argument stays PSD
    alg = WeightedAlgebra.full_matrix(5)
    rho = random_positive(alg, seed=12)
    inner_part = matrix_function(power(0.5), rho)
    composed = matrix_function(power(1.5), inner_part.hermitian_part())
    direct = matrix_function(power(0.75), rho)
    assert (composed - direct).norm() <= 1e-9 * (1.0 + direct.norm())


def test_matrix_function_rejects_genuine_negatives():
    alg = WeightedAlgebra.full_matrix(2)
    h = AlgebraElement(alg, [np.diag([1.0, -0.5]).astype(complex)])
    with pytest.raises(ContractViolationError):
        matrix_function(power(1.5), h)


# -- ampliation ------------------------------------------------------------------

def test_ampliate_k1_is_identity():
    x = random_element(mixed_algebra(), seed=7)
    assert ampliate(x, 1) is x


def test_ampliate_preserves_trace():
    x = random_element(mixed_algebra(), seed=8)
    assert ampliate(x, 3) .algebra.dims == (9, 6)
    assert trace(ampliate(x, 3)) == pytest.approx(trace(x), abs=1e-13)


def test_ampliate_spectrum_multiplicity():
    alg = WeightedAlgebra.full_matrix(3)
    h = random_element(alg, seed=9, hermitian=True)
    base = np.linalg.eigvalsh(h.blocks[0])
    lifted = np.linalg.eigvalsh(ampliate(h, 2).blocks[0])
    np.testing.assert_allclose(lifted, np.sort(np.repeat(base, 2)), atol=1e-12)


@given(s1=seeds, s2=seeds, k=st.integers(min_value=2, max_value=3))
@settings(max_examples=25, deadline=None)
def test_ampliate_star_homomorphism(s1, s2, k):
    alg = mixed_algebra()
    x = random_element(alg, seed=s1)
    y = random_element(alg, seed=s2)
    lhs = ampliate(x @ y, k)
    rhs = ampliate(x, k) @ ampliate(y, k)
    # equal up to the rounding of the two matmul orders
    assert (lhs - rhs).norm() <= 1e-13 * (1.0 + x.norm() * y.norm())
    assert ampliate(x.adjoint(), k).allclose(ampliate(x, k).adjoint(), atol=0.0)


# -- norms ------------------------------------------------------------------------

def test_p_norm_of_identity():
    assert p_norm(mixed_algebra().identity(), 1.5) == pytest.approx(1.0, abs=1e-13)


def test_p_norm_homogeneous():
    x = random_element(mixed_algebra(), seed=21, hermitian=True)
    assert p_norm(x * 3.0, 1.5) == pytest.approx(3.0 * p_norm(x, 1.5), rel=1e-12)


# -- random states -----------------------------------------------------------------

def test_random_positive_is_psd():
    rho = random_positive(mixed_algebra(), seed=4)
    assert rho.min_eigenvalue() >= -1e-12


def test_random_positive_deterministic():
    a = random_positive(mixed_algebra(), rank_fraction=0.5, floor=1e-3, seed=42)
    b = random_positive(mixed_algebra(), rank_fraction=0.5, floor=1e-3, seed=42)
    assert a.allclose(b, atol=0.0)


def test_random_positive_mean_scale():
    """Empirical mean of tau over full-rank samples sits near the block dim."""
    alg = WeightedAlgebra.full_matrix(3)
    vals = [trace(random_positive(alg, seed=make_rng(0, 77, i))).real
            for i in range(300)]
    assert abs(np.mean(vals) - 3.0) < 0.5


def test_random_positive_rejects_bad_rank():
    with pytest.raises(ContractViolationError):
        random_positive(mixed_algebra(), rank_fraction=0.0, seed=0)


# -- serialization -------------------------------------------------------------------

def test_element_json_roundtrip():
    alg = mixed_algebra()
    x = random_element(alg, seed=13)
    back = element_from_json(element_to_json(x), alg)
    assert back.allclose(x, atol=0.0)
