import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nhspectra.errors import (
    DimensionTooLarge,
    InconsistentDimensions,
    MalformedInput,
    UnknownVariant,
)
from nhspectra.model import (
    BoseHubbard,
    Custom,
    NonBH5,
    TridiagonalOperator,
    UnconventionalBH,
    build_bose_hubbard,
    build_nonbh5,
    build_ubh,
    dense_mp,
    parse_model_spec,
    spec_from_dict,
    spec_to_dict,
)

S2, S3, S5, S6, S54 = np.sqrt([2.0, 3.0, 5.0, 6.0, 54.0])


def fock_hamiltonian(particles, epsilon, v, c):
    """Two-mode Hamiltonian assembled from truncated ladder operators.

    Independent of the band formulas: build a (cutoff x cutoff) annihilator
    per mode, form the operator on the product space and restrict to the
    fixed-particle-number sector ordered by increasing n1.
    """
    cut = particles + 1
    a = np.diag(np.sqrt(np.arange(1, cut)), 1)
    eye = np.eye(cut)
    a1, a2 = np.kron(a, eye), np.kron(eye, a)
    n1, n2 = a1.T @ a1, a2.T @ a2
    d = n1 - n2
    H = epsilon * d + v * (a1.T @ a2 + a2.T @ a1) + 0.5 * c * d @ d
    idx = [n1_ * cut + (particles - n1_) for n1_ in range(particles + 1)]
    return H[np.ix_(idx, idx)]


class TestBuilders:
    def test_single_particle_dimer(self):
        g = 0.37
        H = build_bose_hubbard(1, 1j * g, 1, 0).to_dense()
        np.testing.assert_array_equal(H, [[-1j * g, 1], [1, 1j * g]])

    def test_zero_particles(self):
        H = build_bose_hubbard(0, 0.3 + 1j, 2.0, 5.0)
        assert H.dim == 1
        np.testing.assert_array_equal(H.to_dense(), [[0]])

    def test_pure_interaction(self):
        H = build_bose_hubbard(2, 0, 0, 2)
        np.testing.assert_allclose(H.diag, [4, 0, 4])
        np.testing.assert_array_equal(H.upper, [0, 0])

    @pytest.mark.parametrize("particles", [0, 1, 2, 3, 5, 7])
    @pytest.mark.parametrize("params", [(0.3j, 1.0, 0.0), (0.7, 0.5, 0.3), (0.2 + 0.4j, 1 - 1j, 0.5j)])
    def test_matches_ladder_operator_construction(self, particles, params):
        H = build_bose_hubbard(particles, *params).to_dense()
        np.testing.assert_allclose(H, fock_hamiltonian(particles, *params), atol=1e-13)

    def test_ubh_two_particles(self):
        g = 0.6
        H = build_ubh(2, g)
        np.testing.assert_allclose(H.diag, [-2j * g, 0, 2j * g])
        np.testing.assert_allclose(H.upper, [S2, S2])

    def test_ubh_four_particles(self):
        g = 0.25
        H = build_ubh(4, g)
        np.testing.assert_allclose(H.diag, 1j * g * np.array([-4, -2, 0, 2, 4]))
        np.testing.assert_allclose(H.upper, [2, S6, S6, 2])

    def test_ubh_three_particles_printed_matrix(self):
        t = 0.4
        X = np.array([[-3j * t, S3, 0, 0], [S3, -1j * t, 2, 0],
                      [0, 2, 1j * t, S3], [0, 0, S3, 3j * t]])
        np.testing.assert_allclose(build_ubh(3, t).to_dense(), X, atol=1e-15)

    def test_ubh_three_particles_printed_product(self):
        t = 0.4
        X = build_ubh(3, t).to_dense()
        P = np.array([
            [9 * t**2 + 3, 2j * t * S3, 2 * S3, 0],
            [-2j * S3 * t, 7 + t**2, 4j * t, 2 * S3],
            [2 * S3, -4j * t, 7 + t**2, 2j * t * S3],
            [0, 2 * S3, -2j * S3 * t, 9 * t**2 + 3],
        ])
        np.testing.assert_allclose(X.conj().T @ X, P, atol=1e-13)

    def test_ubh_five_particles_printed_matrix(self):
        t = 0.8
        H = build_ubh(5, t)
        np.testing.assert_allclose(H.diag, 1j * t * np.array([-5, -3, -1, 1, 3, 5]))
        np.testing.assert_allclose(H.upper, [S5, 2 * S2, 3, 2 * S2, S5])
        assert H.is_complex_symmetric()

    def test_nonbh5(self):
        H0 = build_nonbh5(0.0)
        np.testing.assert_array_equal(H0.diag, 0)
        np.testing.assert_allclose(H0.upper, [8, 1j * S54, 1j * S54, 8])
        H1 = build_nonbh5(1.0).to_dense()
        assert H1[0, 0] == -4j
        assert H1[1, 2] == pytest.approx(1j * S54)
        assert build_nonbh5(0.42).is_complex_symmetric()

    def test_dimension_cap(self):
        with pytest.raises(DimensionTooLarge):
            build_ubh(10_001, 0.1)

    @pytest.mark.parametrize("bad", [-1, 1.5, True])
    def test_bad_particle_number(self, bad):
        with pytest.raises(ValueError):
            build_ubh(bad, 0.1)


class TestOperator:
    def test_band_lengths_checked(self):
        with pytest.raises(InconsistentDimensions):
            TridiagonalOperator([0, 0], [1], [1, 1])
        with pytest.raises(InconsistentDimensions):
            TridiagonalOperator([], [], [])

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            TridiagonalOperator([0, np.nan], [1], [1])

    def test_dense_and_norm(self):
        H = TridiagonalOperator([1, 2j, 3], [4, 5], [-6, 7])
        np.testing.assert_array_equal(H.to_dense(), [[1, 4, 0], [-6, 2j, 5], [0, 7, 3]])
        assert H.max_norm() == 7
        assert not H.is_complex_symmetric()

    def test_hermitian_flags(self):
        assert build_ubh(4, 0.0).is_hermitian()
        assert not build_ubh(4, 0.1).is_hermitian()
        assert build_bose_hubbard(3, 0.7, 1.0, 0.0).is_hermitian()


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 30), st.floats(-3, 3))
def test_ubh_symmetries(particles, gamma):
    H = build_ubh(particles, gamma)
    assert H.dim == particles + 1
    assert H.is_complex_symmetric()
    np.testing.assert_allclose(H.diag, -H.diag[::-1], atol=1e-12)
    if gamma == 0:
        assert H.is_hermitian()


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 12), st.floats(-2, 2), st.floats(-2, 2))
def test_real_epsilon_without_interaction_is_hermitian(particles, eps, v):
    assert build_bose_hubbard(particles, eps, v, 0.0).is_hermitian(tol=1e-14)


class TestParsing:
    def test_ubh_defaults(self):
        assert parse_model_spec('{"type":"ubh","particles":1,"gamma":0.5}') == UnconventionalBH(1, 0.5, 1, 0)

    def test_nonbh5(self):
        assert parse_model_spec('{"type":"nonbh5","gamma":0.3}') == NonBH5(0.3)

    def test_bh_complex_fields(self):
        spec = parse_model_spec('{"type":"bh","particles":2,"epsilon":[0,0.6],"v":1,"c":[0.5,0]}')
        assert spec == BoseHubbard(2, 0.6j, 1.0, 0.5)

    def test_custom_band_mismatch(self):
        with pytest.raises(InconsistentDimensions):
            parse_model_spec('{"type":"custom","diag":[[0,0],[0,0]],"upper":[[1,0]],"lower":[[1,0],[1,0]]}')

    def test_custom_builds(self):
        spec = parse_model_spec('{"type":"custom","diag":[[0,-1],[0,1]],"upper":[1],"lower":[1]}')
        np.testing.assert_array_equal(spec.build().to_dense(), [[-1j, 1], [1, 1j]])
        with pytest.raises(ValueError):
            spec.with_gamma(0.3)

    @pytest.mark.parametrize("text", [
        "{not json",
        "[1, 2]",
        '{"type":"ubh","gamma":0.5}',
        '{"type":"ubh","particles":-1,"gamma":0.5}',
        '{"type":"ubh","particles":1,"gamma":[0.5,1]}',
        '{"type":"nonbh5"}',
        '{"type":"bh","particles":1,"epsilon":"i"}',
        '{"type":"custom","diag":[[0,0]],"upper":[],"lower":{}}',
        '{"type":"ubh","particles":true,"gamma":0.5}',
    ])
    def test_malformed(self, text):
        with pytest.raises(MalformedInput):
            parse_model_spec(text)

    def test_unknown_variant(self):
        with pytest.raises(UnknownVariant):
            parse_model_spec('{"type":"hubbard3","particles":1}')

    @pytest.mark.parametrize("spec", [
        UnconventionalBH(3, 0.25),
        UnconventionalBH(2, -0.5, 0.8, 0.1),
        BoseHubbard(4, 0.1 + 0.2j, 1 - 0.5j, 0.3j),
        NonBH5(0.7),
        Custom((1, 2j, 3 + 1j), (0.5, -1), (2, 1j)),
    ])
    def test_round_trip(self, spec):
        assert parse_model_spec(json.dumps(spec_to_dict(spec))) == spec
        assert spec_from_dict(spec_to_dict(spec)).build() == spec.build()

    def test_with_gamma(self):
        assert UnconventionalBH(2, 0.1).with_gamma(0.9) == UnconventionalBH(2, 0.9)
        assert BoseHubbard(2, 0.3, 1, 0).with_gamma(0.5).epsilon == 0.5j
        assert NonBH5(0.1).with_gamma(0.2) == NonBH5(0.2)


@pytest.mark.parametrize("spec", [UnconventionalBH(4, 0.3), NonBH5(0.6),
                                  BoseHubbard(3, 0.2j, 0.9, 0.4), Custom((1, 2), (3j,), (4,))])
def test_extended_precision_matrix_agrees(spec):
    ctx, m = dense_mp(spec, 30)
    dense = np.array([[complex(m[i, j]) for j in range(m.cols)] for i in range(m.rows)])
    np.testing.assert_allclose(dense, spec.build().to_dense(), atol=1e-14)


def test_builders_are_pure():
    # same inputs, equal outputs, no cross-talk between calls
    pairs = list(itertools.product([0, 3], [0.0, 0.5]))
    first = [build_ubh(n, g) for n, g in pairs]
    second = [build_ubh(n, g) for n, g in reversed(pairs)][::-1]
    assert all(a == b for a, b in zip(first, second))
