import math

import numpy as np
import pytest
import sympy as sp

from conftest import catalog
from nhspectra.errors import DimensionTooLarge, NonConstantDimension
from nhspectra.model import (
    BoseHubbard,
    NonBH5,
    TridiagonalOperator,
    UnconventionalBH,
    build_nonbh5,
    build_ubh,
)
from nhspectra.spectral import (
    diagonalizability_check,
    eigenvalues_dense,
    ep_scan,
    is_all_real,
    min_gap,
    sort_eigenvalues,
    verify_pole,
)


def closed_form(particles, gamma):
    root = np.sqrt(complex(1 - gamma**2))
    return sort_eigenvalues([(2 * n - particles) * root for n in range(particles + 1)])


def nonbh5_charpoly():
    """Characteristic polynomial of the 5x5 model, exact in gamma."""
    g, x = sp.symbols("gamma x")
    s = sp.I * sp.sqrt(54)
    M = sp.Matrix([
        [-4 * sp.I * g, 8, 0, 0, 0],
        [8, -2 * sp.I * g, s, 0, 0],
        [0, s, 0, s, 0],
        [0, 0, s, 2 * sp.I * g, 8],
        [0, 0, 0, 8, 4 * sp.I * g],
    ])
    return g, x, sp.expand((M - x * sp.eye(5)).det())


class TestDenseSpectrum:
    def test_two_particles(self):
        rep = eigenvalues_dense(build_ubh(2, 0.6))
        np.testing.assert_allclose(rep.eigenvalues, [-1.6, 0, 1.6], atol=1e-12)
        assert rep.all_real
        assert len(rep.residuals) == 3

    def test_dimer_at_exceptional_point(self):
        H = build_ubh(1, 1.0)
        rep = eigenvalues_dense(H)
        np.testing.assert_allclose(rep.eigenvalues, [0, 0], atol=1e-7)
        assert rep.all_real
        assert not diagonalizability_check(H)[0]

    def test_five_particles(self):
        rep = eigenvalues_dense(build_ubh(5, 0.6))
        np.testing.assert_allclose(rep.eigenvalues, [-4, -2.4, -0.8, 0.8, 2.4, 4], atol=1e-12)

    @pytest.mark.parametrize("particles", [1, 2, 3, 5])
    @pytest.mark.parametrize("gamma", np.round(np.arange(0, 1, 0.1), 1))
    def test_closed_forms(self, particles, gamma):
        rep = eigenvalues_dense(build_ubh(particles, gamma))
        np.testing.assert_allclose(rep.eigenvalues, closed_form(particles, gamma), atol=1e-9)

    @pytest.mark.parametrize("gamma", [0.0, 0.35, 0.9, 1.0, 1.7])
    def test_nonbh5_against_exact_polynomial(self, gamma):
        g, x, poly = nonbh5_charpoly()
        # the polynomial factors as -x (x^4 + (20 g^2 - 20) x^2 + 64 g^4 + 2752 g^2 - 2816)
        assert sp.expand(poly + x * (x**4 + (20 * g**2 - 20) * x**2
                                     + 64 * g**4 + 2752 * g**2 - 2816)) == 0
        exact = sp.roots(sp.Poly(poly.subs(g, sp.Rational(str(gamma))), x))
        roots = [complex(sp.N(r, 30)) for r, mult in exact.items() for _ in range(mult)]
        assert len(roots) == 5
        ev = eigenvalues_dense(NonBH5(gamma)).eigenvalues
        np.testing.assert_allclose(ev, sort_eigenvalues(roots), atol=1e-9)

    def test_nonbh5_hermitian_limit_values(self):
        ev = eigenvalues_dense(build_nonbh5(0.0)).eigenvalues
        s44 = math.sqrt(44)
        np.testing.assert_allclose(sorted(ev, key=lambda e: (e.real, e.imag)),
                                   [-8, -1j * s44, 0, 1j * s44, 8], atol=1e-10)

    @pytest.mark.parametrize("label,H", catalog(12))
    def test_every_eigenvalue_passes_pole_check(self, label, H):
        rep = eigenvalues_dense(H)
        assert np.all(rep.residuals <= 1e-8)

    def test_dense_cap(self):
        n = 1001
        with pytest.raises(DimensionTooLarge):
            eigenvalues_dense(TridiagonalOperator(np.zeros(n), np.ones(n - 1), np.ones(n - 1)))


class TestReality:
    @pytest.mark.parametrize("particles", range(6))
    def test_transition_at_unit_gamma(self, particles):
        if particles == 0:
            pytest.skip("1x1 zero matrix is real for every gamma")
        for g in (0.0, 0.5, 0.99, 1 - 1e-6 - 1e-9):
            assert eigenvalues_dense(UnconventionalBH(particles, g)).all_real
            assert eigenvalues_dense(UnconventionalBH(particles, -g)).all_real
        for g in (1 + 1e-6 + 1e-9, 1.01, 1.5, 3.0):
            assert not eigenvalues_dense(UnconventionalBH(particles, g)).all_real

    def test_rounded_matrix_unfolds_high_order_ep(self):
        # the double-precision matrix itself is already past its (shifted) EP
        assert not eigenvalues_dense(build_ubh(5, 1 - 1e-6 - 1e-9)).all_real
        assert eigenvalues_dense(UnconventionalBH(5, 1 - 1e-6 - 1e-9)).all_real

    @pytest.mark.parametrize("particles", range(1, 6))
    @pytest.mark.parametrize("gamma", [0.2, 0.7, 1.3])
    def test_symmetries(self, particles, gamma):
        ev = eigenvalues_dense(build_ubh(particles, gamma)).eigenvalues
        ev_neg = eigenvalues_dense(build_ubh(particles, -gamma)).eigenvalues
        np.testing.assert_allclose(ev, ev_neg, atol=1e-9)
        np.testing.assert_allclose(ev, sort_eigenvalues(-ev), atol=1e-9)
        np.testing.assert_allclose(ev, sort_eigenvalues(ev.conj()), atol=1e-9)

    def test_is_all_real_tolerance(self):
        assert is_all_real([1 + 1e-9j], 0.0)
        assert not is_all_real([1 + 1e-7j], 0.0)


class TestHelpers:
    def test_pole_certificates(self):
        H = build_ubh(1, 0.5)
        assert verify_pole(H, math.sqrt(0.75)) <= 1e-10
        assert verify_pole(H, 1.0) >= 1e-2
        assert verify_pole(H, 1e3) > 1e3

    def test_diagonalizability(self):
        ok, cond = diagonalizability_check(build_ubh(1, 0.5))
        assert ok and cond < 10
        ok, cond = diagonalizability_check(build_ubh(1, 1.0))
        assert not ok and cond > 1e6
        ok, cond = diagonalizability_check(build_ubh(6, 0.0))
        assert ok and cond == pytest.approx(1.0, abs=1e-8)

    def test_min_gap(self):
        assert min_gap([0, 3, 1 + 1j])[0] == pytest.approx(math.sqrt(2))
        assert min_gap([2.0])[0] == math.inf

    def test_sorting(self):
        np.testing.assert_array_equal(sort_eigenvalues([1 + 1j, -2, 1 - 1j]), [-2, 1 - 1j, 1 + 1j])


class TestEPScan:
    @pytest.mark.parametrize("particles,order", [(1, 2), (2, 3), (4, 5)])
    def test_ubh(self, particles, order):
        rep = ep_scan(UnconventionalBH(particles, 0.0), 0, 2, 200)
        assert rep.found
        assert rep.locations == [pytest.approx(1.0, abs=1e-6)]
        assert rep.orders == [order]
        assert rep.reality_boundary
        assert rep.eigvec_condition > 1e6

    def test_nonbh5(self):
        rep = ep_scan(NonBH5(0.0), 0, 2, 400)
        assert 5 in rep.orders
        loc = rep.locations[rep.orders.index(5)]
        # regression constant: the order-5 point sits at gamma = 1 (the quartic
        # factor of the characteristic polynomial becomes x^4 exactly there)
        assert loc == pytest.approx(1.0, abs=1e-6)

    def test_accidental_crossing_is_not_ep(self):
        # gamma = 0 is a Hermitian point of a model with a degenerate pair; the
        # eigenvector basis stays orthonormal, so no EP is reported
        H = lambda g: TridiagonalOperator([g, -g, 5], [0, 0], [0, 0])  # noqa: E731
        rep = ep_scan(H, -1, 1, 41)
        assert not rep.found
        assert rep.gap_min == math.inf

    def test_interacting_model(self):
        rep = ep_scan(BoseHubbard(1, 0, 1.0, 0.5), 0, 2, 100)
        # c only shifts the dimer's diagonal equally, so the EP stays at 1
        assert rep.locations == [pytest.approx(1.0, abs=1e-6)]

    def test_callable_family(self):
        rep = ep_scan(lambda g: build_ubh(1, g), 0.5, 1.5, 50)
        assert rep.locations == [pytest.approx(1.0, abs=1e-6)]

    def test_errors(self):
        with pytest.raises(ValueError):
            ep_scan(UnconventionalBH(1, 0), 0, 2, 4)
        with pytest.raises(ValueError):
            ep_scan(UnconventionalBH(1, 0), 2, 0, 40)
        grow = lambda g: build_ubh(1 if g < 0.5 else 2, g)  # noqa: E731
        with pytest.raises(NonConstantDimension):
            ep_scan(grow, 0, 1, 20)

    def test_empty_report(self):
        rep = ep_scan(UnconventionalBH(2, 0), 0, 0.5, 20)
        assert not rep.found and not rep.reality_boundary
        assert math.isnan(rep.eigvec_condition)
