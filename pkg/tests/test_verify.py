"""Grid and shooting verification: discretization, eigensolve, detection,
and the two mismatch functions, checked against independent oracles."""

import math

import numpy as np
import pytest

from oracles import clamped_beam_eigenvalues, power_deflation_extremes
from quarteig.construct import build_embedded_potential, sech_well, singular_example
from quarteig.kernels import PiecewisePotential
from quarteig.verify import (
    DENSE_EIGEN_CAP,
    GridOperator,
    Verdict,
    detect_embedded,
    discretize_quartic,
    discretize_schrodinger,
    discretize_schrodinger_and_square,
    eigensolve_symmetric,
    inverse_participation_ratio,
    shoot_piecewise,
    shoot_singular,
    shoot_singular_details,
)

FREE = PiecewisePotential(())


@pytest.fixture(scope="module")
def flagship_spec():
    return build_embedded_potential(1.0, -3.0, 1.0)


@pytest.fixture(scope="module")
def flagship_solution(flagship_spec):
    return eigensolve_symmetric(discretize_quartic(flagship_spec.full_potential(), 25.0, 800))


class TestDiscretizeQuartic:
    def test_free_beam_low_end(self):
        sol = eigensolve_symmetric(discretize_quartic(FREE, 10.0, 200))
        assert sol.eigenvalues.min() >= -1e-9
        oracle = clamped_beam_eigenvalues(20.0, 3)
        # 5-point clamped stencil carries ~2% error at this resolution
        assert np.max(np.abs(sol.eigenvalues[:3] / oracle - 1.0)) < 3e-2

    def test_matrix_exactly_symmetric(self, flagship_spec):
        m = discretize_quartic(flagship_spec.full_potential(), 10.0, 120).matrix
        assert np.array_equal(m, m.T)

    def test_even_potential_gives_reflection_symmetric_matrix(self, flagship_spec):
        m = discretize_quartic(flagship_spec.full_potential(), 10.0, 120).matrix
        assert np.max(np.abs(m[::-1, ::-1] - m)) < 1e-12

    def test_diagonal_matches_plain_sample_away_from_breakpoints(self, flagship_spec):
        q = flagship_spec.full_potential()
        op = discretize_quartic(q, 10.0, 120)
        xs = op.xs
        stencil = 6.0 / op.h**4
        for i in (3, 40, 60, 80, 116):
            near_break = any(abs(xs[i] - b) <= op.h for b in q.breakpoints)
            if not near_break:
                assert op.matrix[i, i] - stencil == pytest.approx(q.value(xs[i]), abs=1e-12)

    def test_grid_geometry(self):
        op = discretize_quartic(FREE, 10.0, 99)
        assert op.h == pytest.approx(20.0 / 100.0, rel=1e-15)
        assert op.xs[0] == pytest.approx(-10.0 + op.h)
        assert op.xs[-1] == pytest.approx(10.0 - op.h)

    def test_too_few_points_rejected(self):
        with pytest.raises(ValueError):
            discretize_quartic(FREE, 10.0, 49)

    def test_domain_must_cover_support(self, flagship_spec):
        with pytest.raises(ValueError):
            discretize_quartic(flagship_spec.full_potential(), 2.0, 100)

    def test_grid_operator_validation(self):
        ident = np.eye(3)
        with pytest.raises(ValueError):
            GridOperator(X=2.0, n=3, h=0.7, matrix=ident)  # h != 2X/(n+1)
        skew = np.array([[0.0, 1.0], [0.0, 0.0]])
        with pytest.raises(ValueError):
            GridOperator(X=1.5, n=2, h=1.0, matrix=skew)


class TestEigensolve:
    def test_two_by_two(self):
        op = GridOperator(X=1.5, n=2, h=1.0, matrix=np.array([[2.0, 1.0], [1.0, 2.0]]))
        sol = eigensolve_symmetric(op)
        assert sol.eigenvalues == pytest.approx([1.0, 3.0], abs=1e-12)

    def test_random_extremes_match_power_deflation(self):
        rng = np.random.default_rng(20260815)
        m = rng.standard_normal((50, 50))
        m = 0.5 * (m + m.T)
        small, large = power_deflation_extremes(m, 5)
        sol = eigensolve_symmetric(GridOperator(X=25.5, n=50, h=1.0, matrix=m))
        assert np.max(np.abs(sol.eigenvalues[:5] - small)) < 1e-6
        assert np.max(np.abs(sol.eigenvalues[-5:] - large)) < 1e-6

    def test_trace_preserved(self):
        rng = np.random.default_rng(7)
        m = rng.standard_normal((60, 60))
        m = 0.5 * (m + m.T)
        sol = eigensolve_symmetric(GridOperator(X=30.5, n=60, h=1.0, matrix=m))
        assert sol.eigenvalues.sum() == pytest.approx(np.trace(m), rel=1e-8)

    def test_dense_cap(self):
        n = DENSE_EIGEN_CAP + 1
        op = GridOperator(X=(n + 1) / 2.0, n=n, h=1.0, matrix=np.zeros((n, n)))
        with pytest.raises(ValueError):
            eigensolve_symmetric(op)

    def test_eigenvector_parity_for_even_potential(self, flagship_spec):
        sol = eigensolve_symmetric(discretize_quartic(flagship_spec.full_potential(), 10.0, 120))
        # spacing is clean here (min gap ~4e-3), so no degeneracy pairing needed
        assert np.min(np.diff(sol.eigenvalues)) > 1e-8
        for i in range(sol.n):
            v = sol.vectors[:, i]
            jv = v[::-1]
            assert min(np.linalg.norm(jv - v), np.linalg.norm(jv + v)) < 1e-6


class TestDetectEmbedded:
    def test_flagship_embedded_candidate(self, flagship_solution):
        rep = detect_embedded(flagship_solution, 1.0, decay_rate=1.0)
        assert rep.verdict is Verdict.EMBEDDED_CANDIDATE
        assert rep.gap < 1e-2
        assert rep.ipr >= 10.0 / flagship_solution.n
        assert rep.non_localized_below >= 10
        assert rep.non_localized_above >= 10
        assert not rep.crowded
        assert rep.decay_fit == pytest.approx(1.0, abs=0.15)

    def test_localized_ipr_dominates_median(self, flagship_solution):
        rep = detect_embedded(flagship_solution, 1.0)
        vectors = flagship_solution.vectors
        iprs = np.sum(vectors**4, axis=0) / np.sum(vectors**2, axis=0) ** 2
        # the profile's intrinsic peak-to-typical ratio at this geometry is ~9.6
        assert rep.ipr > 8.0 * np.median(iprs)

    def test_free_operator_not_found(self):
        sol = eigensolve_symmetric(discretize_quartic(FREE, 10.0, 200))
        rep = detect_embedded(sol, 1.0)
        assert rep.verdict is Verdict.NOT_FOUND
        assert rep.ipr < 10.0 / 200

    def test_ipr_helper_matches_report(self, flagship_solution):
        rep = detect_embedded(flagship_solution, 1.0)
        k = int(np.argmin(np.abs(flagship_solution.eigenvalues - rep.nearest)))
        assert rep.ipr == pytest.approx(
            inverse_participation_ratio(flagship_solution.vectors[:, k]), rel=1e-12
        )

    def test_reported_gap_and_nearest_consistent(self, flagship_solution):
        rep = detect_embedded(flagship_solution, 1.0)
        assert rep.gap == pytest.approx(abs(rep.nearest - rep.target), rel=1e-15)
        assert rep.gap == np.min(np.abs(flagship_solution.eigenvalues - 1.0))


class TestSchrodingerSquare:
    def test_zero_potential_square_identity(self):
        hop, lop = discretize_schrodinger_and_square(lambda xs: np.zeros_like(xs), 10.0, 200)
        hs = eigensolve_symmetric(hop)
        ls = eigensolve_symmetric(lop)
        scale = max(np.max(np.abs(ls.eigenvalues)), 1.0)
        assert np.max(np.abs(np.sort(hs.eigenvalues**2) - ls.eigenvalues)) < 1e-10 * scale

    def test_square_is_exact_matrix_square(self):
        hop, lop = discretize_schrodinger_and_square(sech_well().v, 10.0, 100)
        prod = hop.matrix @ hop.matrix
        assert np.max(np.abs(lop.matrix - prod)) <= 1e-12 * np.max(np.abs(prod))

    def test_sech_well_bound_state_and_embedded(self):
        hop, lop = discretize_schrodinger_and_square(sech_well().v, 20.0, 1000)
        hs = eigensolve_symmetric(hop)
        assert np.min(np.abs(hs.eigenvalues - (-1.0))) < 1e-3
        ls = eigensolve_symmetric(lop)
        rep = detect_embedded(ls, 1.0, decay_rate=1.0, gap_tol=2e-3)
        assert rep.verdict is Verdict.EMBEDDED_CANDIDATE
        assert rep.gap < 2e-3
        assert rep.non_localized_below >= 10
        assert rep.non_localized_above >= 10
        assert rep.decay_fit == pytest.approx(1.0, abs=0.05)
        scale = np.max(np.abs(ls.eigenvalues))
        assert np.max(np.abs(np.sort(hs.eigenvalues**2) - ls.eigenvalues)) < 1e-10 * scale

    def test_schrodinger_discretization_second_order(self):
        errs = []
        for n in (500, 1000):
            sol = eigensolve_symmetric(discretize_schrodinger(sech_well().v, 20.0, n))
            errs.append(abs(sol.eigenvalues.min() - (-1.0)))
        assert errs[1] < errs[0]
        assert errs[0] / errs[1] == pytest.approx(4.0, abs=1.2)


class TestShootSingular:
    def test_mismatch_vanishes_at_eigenvalue(self):
        assert shoot_singular(1.0) < 1e-9
        assert shoot_singular(1.0, parity="even") < 1e-9

    def test_mismatch_large_off_eigenvalue(self):
        assert shoot_singular(0.5) > 1e-3
        assert shoot_singular(2.0) > 1e-3
        assert shoot_singular(0.7, parity="even") > 1e-3

    def test_scan_shows_isolated_root(self):
        grid = np.linspace(0.25, 3.0, 45)  # hits 1.0 exactly at index 12
        vals = np.array([shoot_singular(lam) for lam in grid])
        assert int(np.argmin(vals)) == 12
        assert vals[12] < 1e-9
        assert np.partition(vals, 1)[1] > 1e-4

    def test_mismatch_continuous_in_lambda(self):
        at_root = shoot_singular(1.0)
        deltas = [1e-3, 1e-4, 1e-5]
        vals = [abs(shoot_singular(1.0 + d) - at_root) for d in deltas]
        assert vals[0] > vals[1] > vals[2]
        assert vals[2] < 1e-6

    def test_recovered_profile_is_sine(self):
        res = shoot_singular_details(1.0, parity="odd")
        xs = np.linspace(0.05, 3.0 * math.pi / 4.0 - 0.05, 101)
        u = res.profile(xs)
        scale = res.profile(np.array([math.pi / 2.0]))[0]  # sin there is 1
        assert np.max(np.abs(u / scale - np.sin(xs))) < 1e-8

    def test_recovered_profile_is_cosine(self):
        res = shoot_singular_details(1.0, parity="even")
        xs = np.linspace(0.0, math.pi / 4.0 - 0.02, 60)
        u = res.profile(xs)
        scale = res.profile(np.array([0.0]))[0]  # cos(0) = 1
        assert np.max(np.abs(u / scale - np.cos(xs))) < 1e-8

    def test_profile_matches_closed_form_example(self):
        example, _sample = singular_example()
        res = shoot_singular_details(1.0, parity="odd")
        xs = np.linspace(0.1, 2.0, 40)
        u = res.profile(xs)
        scale = res.profile(np.array([math.pi / 2.0]))[0]
        assert np.max(np.abs(u / scale - example.profile(xs))) < 1e-8

    def test_validation(self):
        with pytest.raises(ValueError):
            shoot_singular(0.0)
        with pytest.raises(ValueError):
            shoot_singular(-1.0)
        with pytest.raises(ValueError):
            shoot_singular(1.0, parity="sideways")


class TestShootPiecewise:
    def test_small_at_eigenvalue(self, flagship_spec):
        u1, u3 = shoot_piecewise(flagship_spec, 1.0)
        assert abs(u1) + abs(u3) < 1e-8

    def test_large_off_eigenvalue(self, flagship_spec):
        u1, u3 = shoot_piecewise(flagship_spec, 1.1)
        assert max(abs(u1), abs(u3)) > 1e-3

    def test_doubling_the_jet_doubles_exactly(self, flagship_spec):
        u1, u3 = shoot_piecewise(flagship_spec, 1.0)
        d1, d3 = shoot_piecewise(flagship_spec, 1.0, scale=2.0)
        assert d1 == 2.0 * u1
        assert d3 == 2.0 * u3

    def test_mismatch_continuous_in_lambda(self, flagship_spec):
        base = sum(abs(c) for c in shoot_piecewise(flagship_spec, 1.0))
        vals = []
        for d in (1e-3, 1e-4, 1e-5):
            u1, u3 = shoot_piecewise(flagship_spec, 1.0 + d)
            vals.append(abs(abs(u1) + abs(u3) - base))
        assert vals[0] > vals[1] > vals[2]

    def test_validation(self, flagship_spec):
        with pytest.raises(ValueError):
            shoot_piecewise(flagship_spec, 0.0)
