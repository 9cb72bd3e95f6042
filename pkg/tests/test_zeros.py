"""Tests for first-zero scanning, the zero-order ladder, and the z1/z3 race.

Analytic anchor used throughout: for u'''' = B u with start jet
(1, 1, -1, -1), the solution at B = 1 is cos x + sin x, so the first zeros of
u' and u''' coincide at pi/4 (an exact race tie at stiffness 1) and the first
zero of u'' sits at 3 pi/4.  The slope lower bound
1 - x - x^2/2 + B x^3/6 is positive on [0, inf) at B = 4 (minimum 1/6 at
x = 1), so 4 is a certified upper bracket, and halving from 1 lands on 0.5 as
the lower bracket.
"""

import math

import numpy as np
import pytest

from oracles import dense_first_zeros
from quarteig.kernels import PiecewisePotential, StateVector4
from quarteig.zeros import (
    ContinuationBracket,
    OrderingError,
    RaceVerdict,
    ZeroOrdering,
    first_zero,
    ordered_first_zeros,
    race_brackets,
    race_zeros,
    solve_race_tie,
    zero_race,
    zero_shift_rates,
)


def race_start() -> StateVector4:
    return StateVector4.from_jet(0.0, np.array([1.0, 1.0, -1.0, -1.0]))


SIN_JET = np.array([0.0, 1.0, 0.0, -1.0])  # u'''' = u with u = sin x


class TestFirstZero:
    def test_sine_solution_zeros(self):
        # u = sin x: zeros of (u, u', u'', u''') at (pi, pi/2, pi, pi/2)
        pot = PiecewisePotential.single(-1.0)
        start = StateVector4.from_jet(0.0, SIN_JET)
        expected = {0: math.pi, 1: math.pi / 2, 2: math.pi, 3: math.pi / 2}
        for j, want in expected.items():
            loc = first_zero(j, pot, start, horizon=6.0)
            assert loc.found
            assert loc.position == pytest.approx(want, abs=1e-11)

    def test_zero_at_start_is_skipped(self):
        # u(0) = 0 exactly; the first zero strictly after the start is pi
        pot = PiecewisePotential.single(-1.0)
        start = StateVector4.from_jet(0.0, SIN_JET)
        loc = first_zero(0, pot, start, horizon=4.0)
        assert loc.position == pytest.approx(math.pi, abs=1e-11)

    def test_no_zero_reports_inf(self):
        # u = e^x never vanishes
        pot = PiecewisePotential.single(-1.0)
        start = StateVector4.from_jet(0.0, np.array([1.0, 1.0, 1.0, 1.0]))
        loc = first_zero(0, pot, start, horizon=10.0)
        assert not loc.found
        assert math.isinf(loc.position)

    def test_position_never_exceeds_horizon(self):
        pot = PiecewisePotential.single(-1.0)
        start = StateVector4.from_jet(0.0, SIN_JET)
        assert math.isinf(first_zero(0, pot, start, horizon=2.0).position)
        loc = first_zero(1, pot, start, horizon=2.0)
        assert loc.position <= 2.0

    def test_half_scan_step_reproducible(self):
        pot = PiecewisePotential.single(-1.0)
        start = StateVector4.from_jet(0.0, SIN_JET)
        coarse = first_zero(1, pot, start, 6.0, scan_step=6.0 / 4096)
        fine = first_zero(1, pot, start, 6.0, scan_step=6.0 / 8192)
        assert coarse.position == pytest.approx(fine.position, abs=1e-12)
        miss = StateVector4.from_jet(0.0, np.array([1.0, 1.0, 1.0, 1.0]))
        assert math.isinf(first_zero(0, pot, miss, 10.0, scan_step=10 / 4096).position)
        assert math.isinf(first_zero(0, pot, miss, 10.0, scan_step=10 / 8192).position)

    @pytest.mark.parametrize("c", [-2.0, 5.0])
    def test_matches_dense_scan(self, c):
        rng = np.random.default_rng(20260815)
        pot = PiecewisePotential.single(-c)
        for _ in range(4):
            jet = rng.uniform(-1.0, 1.0, size=4)
            jet[np.abs(jet) < 0.1] = 0.25  # keep clear of degenerate starts
            start = StateVector4.from_jet(0.0, jet)
            want = dense_first_zeros(c, jet, span=8.0, orders=(0, 1, 2, 3))
            for j in range(4):
                got = first_zero(j, pot, start, horizon=8.0).position
                if math.isinf(want[j]):
                    assert math.isinf(got)
                else:
                    assert got == pytest.approx(want[j], abs=1e-8)

    def test_rejects_bad_arguments(self):
        pot = PiecewisePotential.single(-1.0)
        start = StateVector4.from_jet(0.0, SIN_JET)
        with pytest.raises(ValueError):
            first_zero(4, pot, start, horizon=2.0)
        with pytest.raises(ValueError):
            first_zero(0, pot, start, horizon=0.0)


class TestOrderedLadder:
    def test_flagship_instance(self):
        # strength 1 from the decaying-exponential jet at x = -3
        jet = math.exp(-3.0) * np.ones(4)
        start = StateVector4.from_jet(-3.0, jet)
        ladder = ordered_first_zeros(1.0, start)
        assert -3.0 < ladder.x3 < ladder.x2 < ladder.x1 < ladder.x0
        want = dense_first_zeros(-1.0, jet, span=15.0, orders=(0, 1, 2, 3))
        assert ladder.x3 == pytest.approx(-3.0 + want[3], abs=1e-8)
        assert ladder.x2 == pytest.approx(-3.0 + want[2], abs=1e-8)
        assert ladder.x1 == pytest.approx(-3.0 + want[1], abs=1e-8)
        assert ladder.x0 == pytest.approx(-3.0 + want[0], abs=1e-8)

    def test_quarter_power_rescaling(self):
        # u(x) -> u(s x) maps strength 1 to strength s^4 and divides zeros by s
        base = ordered_first_zeros(1.0, StateVector4.from_jet(0.0, np.ones(4)))
        s = 2.0
        jet = np.array([1.0, s, s**2, s**3])
        scaled = ordered_first_zeros(16.0, StateVector4.from_jet(0.0, jet))
        for a, b in [(base.x3, scaled.x3), (base.x2, scaled.x2), (base.x1, scaled.x1), (base.x0, scaled.x0)]:
            assert b == pytest.approx(a / s, rel=1e-9)

    def test_rejects_nonpositive_inputs(self):
        start = StateVector4.from_jet(0.0, np.ones(4))
        with pytest.raises(ValueError):
            ordered_first_zeros(0.0, start)
        with pytest.raises(ValueError):
            ordered_first_zeros(-1.0, start)
        bad = StateVector4.from_jet(0.0, np.array([1.0, 1.0, 0.0, 1.0]))
        with pytest.raises(ValueError):
            ordered_first_zeros(1.0, bad)

    def test_ordering_violation_raises(self):
        with pytest.raises(OrderingError):
            ZeroOrdering(x3=1.0, x2=0.5, x1=2.0, x0=3.0)


class TestRace:
    def test_exact_tie_at_unit_stiffness(self):
        z1, z3 = race_zeros(1.0, race_start())
        assert z1 == pytest.approx(math.pi / 4, abs=1e-10)
        assert z3 == pytest.approx(math.pi / 4, abs=1e-10)
        assert zero_race(1.0, race_start()) is RaceVerdict.TIE

    def test_flank_verdicts(self):
        assert zero_race(4.0, race_start()) is RaceVerdict.Z3_FIRST
        assert zero_race(0.5, race_start()) is RaceVerdict.Z1_FIRST

    @pytest.mark.parametrize("b", [0.5, 4.0])
    def test_verdict_matches_dense_scan(self, b):
        want = dense_first_zeros(b, race_start().jet, span=12.0, orders=(1, 3))
        got1, got3 = race_zeros(b, race_start(), horizon=12.0)
        for mine, ref in [(got1, want[1]), (got3, want[3])]:
            if math.isinf(ref):
                assert math.isinf(mine)
            else:
                assert mine == pytest.approx(ref, abs=1e-8)
        verdict = zero_race(b, race_start(), horizon=12.0)
        assert verdict is (RaceVerdict.Z1_FIRST if want[1] < want[3] else RaceVerdict.Z3_FIRST)

    def test_sign_pattern_enforced(self):
        bad_jets = [
            (0.0, 1.0, -1.0, -1.0),
            (1.0, -1.0, -1.0, -1.0),
            (1.0, 1.0, 1.0, -1.0),
            (1.0, 1.0, -1.0, 0.0),
        ]
        for jet in bad_jets:
            start = StateVector4.from_jet(0.0, np.array(jet))
            with pytest.raises(ValueError):
                zero_race(1.0, start)

    def test_small_horizon_is_undecided(self):
        assert zero_race(1.0, race_start(), horizon=0.01) is RaceVerdict.UNDECIDED

    def test_rejects_nonpositive_stiffness(self):
        with pytest.raises(ValueError):
            race_zeros(0.0, race_start())


class TestBracketsAndTie:
    def test_flagship_brackets(self):
        b_high, b_low = race_brackets(race_start())
        assert b_high == 4.0
        assert b_low == 0.5

    def test_flagship_tie_solution(self):
        br = solve_race_tie(race_start())
        assert br.b_low == 0.5
        assert br.b_high == 4.0
        assert br.b_star == pytest.approx(1.0, abs=1e-8)
        z1, z3 = race_zeros(br.b_star, race_start())
        assert abs(z1 - z3) <= 1e-10 * max(1.0, z1)
        assert z1 == pytest.approx(math.pi / 4, abs=1e-8)

    def test_slope_double_zero_is_bracketed(self):
        br = solve_race_tie(race_start())
        assert br.b_double is not None
        assert br.b_star < br.b_double < br.b_high
        # just below: slope zero exists and hugs the curvature zero;
        # just above: the slope no longer crosses before the curvature does
        pot_lo = PiecewisePotential.single(-br.b_double * (1 - 1e-6))
        pot_hi = PiecewisePotential.single(-br.b_double * (1 + 1e-6))
        origin = StateVector4.from_jet(0.0, race_start().jet)
        z1_lo = first_zero(1, pot_lo, origin, horizon=40.0).position
        z2_lo = first_zero(2, pot_lo, origin, horizon=40.0).position
        assert math.isfinite(z1_lo) and z1_lo < z2_lo
        assert z2_lo - z1_lo < 0.05
        z1_hi = first_zero(1, pot_hi, origin, horizon=40.0).position
        z2_hi = first_zero(2, pot_hi, origin, horizon=40.0).position
        assert z2_hi < z1_hi

    def test_small_horizon_raises(self):
        from quarteig.zeros import HorizonError

        with pytest.raises(HorizonError):
            race_brackets(race_start(), horizon=0.01)

    def test_bracket_validation(self):
        with pytest.raises(ValueError):
            ContinuationBracket(b_low=2.0, b_high=4.0, b_star=1.0)
        with pytest.raises(ValueError):
            ContinuationBracket(b_low=0.5, b_high=4.0, b_star=1.0, b_double=5.0)
        ContinuationBracket(b_low=0.5, b_high=4.0, b_star=1.0, b_double=2.0)


class TestShiftRates:
    def test_signs_at_the_tie(self):
        rates = zero_shift_rates(1.0, race_start())
        assert rates.dz1_db > 0.0
        assert rates.dz3_db < 0.0

    def test_matches_finite_differences(self):
        h = 1e-5
        rates = zero_shift_rates(1.0, race_start())
        z1p, z3p = race_zeros(1.0 + h, race_start())
        z1m, z3m = race_zeros(1.0 - h, race_start())
        assert rates.dz1_db == pytest.approx((z1p - z1m) / (2 * h), rel=1e-4)
        assert rates.dz3_db == pytest.approx((z3p - z3m) / (2 * h), rel=1e-4)

    def test_missing_zero_rejected(self):
        # at stiffness 8 the slope never vanishes (certified bracket is 4)
        with pytest.raises(ValueError):
            zero_shift_rates(8.0, race_start())
