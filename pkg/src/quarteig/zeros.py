"""First-zero tracking and the slope/jerk zero race for u'''' = B u.

Two regimes drive the constructions.  For u'''' = -A u with an all-positive
start jet, the first zeros of u''', u'', u', u appear in that strict order,
which is how the interior matching point of the piecewise construction is
chosen.  For u'''' = B u with a (+, +, -, -) start jet, whether the first zero
of u' (z1) or of u''' (z3) comes first depends monotonically on B; bisection
on that verdict finds the stiffness B* at which both vanish together, the key
continuation step of the whole construction.

Scanning is grid-based (default resolution: span / 4096) with bisection
refinement; zeros are simple in the regimes used, so sign changes suffice.
A zero that does not occur within the horizon is reported as position
math.inf.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .kernels import (
    PiecewisePotential,
    StateVector4,
    propagate,
    propagate_grid,
    stiffness_sensitivity,
)

# scan window measured from the start, in units rescaled by the stiffness
HORIZON_FACTOR = 50.0
HORIZON_DOUBLINGS = 4
SCAN_DIVISIONS = 4096
# absolute bisection tolerance on zero positions
XTOL = 1e-13
# |z1 - z3| <= TIE_RTOL * max(1, z1) declares the race a tie
TIE_RTOL = 1e-10
BRACKET_MAX_ITERS = 60
TIE_MAX_ITERS = 300
DEGENERATE_TOL = 1e-12


class BracketError(RuntimeError):
    """Doubling/halving failed to bracket the race, or bisection stalled."""


class HorizonError(RuntimeError):
    """Race undecided within the horizon even after enlargement; raise the
    horizon and retry."""


class OrderingError(RuntimeError):
    """The computed first zeros violate their guaranteed strict ordering;
    indicates a scanning defect, not a valid outcome."""


class DegenerateZeroError(ArithmeticError):
    """A zero used as a simple root has a vanishing transversal derivative."""


class RaceVerdict(enum.Enum):
    Z1_FIRST = "z1_first"  # the slope's first zero comes first (small B)
    Z3_FIRST = "z3_first"  # the third derivative's first zero comes first (large B)
    TIE = "tie"            # |z1 - z3| within tolerance
    UNDECIDED = "undecided"  # neither zero occurred within the horizon


@dataclass(frozen=True)
class ZeroLocation:
    """First zero of u^(derivative_order) after the scan start; position is
    math.inf when no zero occurred up to the horizon."""

    derivative_order: int
    position: float
    horizon: float

    @property
    def found(self) -> bool:
        return math.isfinite(self.position)


@dataclass(frozen=True)
class ZeroOrdering:
    """First zeros of u''', u'', u', u for u'''' = -A u from a positive jet."""

    x3: float
    x2: float
    x1: float
    x0: float

    def __post_init__(self) -> None:
        if not self.x3 < self.x2 < self.x1 < self.x0:
            raise OrderingError(
                f"zero ladder not strictly ordered: {self.x3}, {self.x2}, {self.x1}, {self.x0}"
            )


@dataclass(frozen=True)
class ContinuationBracket:
    """Result of the race bisection: b_low/b_high bracket the tie stiffness
    b_star; b_double (when seen) is where the slope's first zero becomes a
    double zero, i.e. meets the curvature's first zero."""

    b_low: float
    b_high: float
    b_star: float
    b_double: float | None = None

    def __post_init__(self) -> None:
        if not 0.0 < self.b_low < self.b_star < self.b_high:
            raise ValueError("bracket must satisfy 0 < b_low < b_star < b_high")
        if self.b_double is not None and not self.b_star < self.b_double < self.b_high:
            raise ValueError("b_double must lie strictly between b_star and b_high")


@dataclass(frozen=True)
class ZeroShiftRates:
    """d(z1)/dB and d(z3)/dB at fixed start data, from the implicit function
    theorem applied to u'(z1; B) = 0 and u'''(z3; B) = 0."""

    stiffness: float
    dz1_db: float
    dz3_db: float


def _scan_zeros(
    pot: PiecewisePotential,
    start: StateVector4,
    horizon: float,
    orders: tuple[int, ...],
    scan_step: float | None = None,
) -> dict[int, float]:
    """First zeros (strictly after start.x) of the requested derivative
    orders, by shared grid scanning plus bisection refinement."""
    span = horizon - start.x
    if span <= 0.0:
        raise ValueError("horizon must exceed the scan start")
    step = scan_step if scan_step is not None else span / SCAN_DIVISIONS
    n = max(int(math.ceil(span / step)), 8)
    xs = np.linspace(start.x, horizon, n + 1)
    rows = propagate_grid(pot, start, xs)
    out: dict[int, float] = {}
    for j in orders:
        w = rows[j]
        s = np.sign(w)
        flips = np.nonzero(s[:-1] * s[1:] < 0)[0]
        exact = np.nonzero(s[1:] == 0.0)[0] + 1
        first_flip = xs[flips[0]] if flips.size else math.inf
        first_exact = xs[exact[0]] if exact.size else math.inf
        if not math.isfinite(min(first_flip, first_exact)):
            out[j] = math.inf
            continue
        if first_exact < first_flip:
            out[j] = float(first_exact)
            continue
        k = flips[0]
        anchor = StateVector4.from_jet(float(xs[k]), rows[:, k])
        out[j] = _refine(pot, anchor, j, float(xs[k]), float(xs[k + 1]), float(w[k]))
    return out


def _refine(pot, anchor, j, x_lo, x_hi, w_lo) -> float:
    sign_lo = math.copysign(1.0, w_lo)
    for _ in range(200):
        if x_hi - x_lo <= XTOL:
            break
        mid = 0.5 * (x_lo + x_hi)
        w = float(propagate(pot, anchor, mid).jet[j])
        if w == 0.0:
            return mid
        if math.copysign(1.0, w) == sign_lo:
            x_lo = mid
        else:
            x_hi = mid
    return 0.5 * (x_lo + x_hi)


def first_zero(
    j: int,
    pot: PiecewisePotential,
    start: StateVector4,
    horizon: float,
    scan_step: float | None = None,
) -> ZeroLocation:
    """First zero of u^(j), j in 0..3, strictly after start.x and at most at
    the (absolute) horizon."""
    if j not in (0, 1, 2, 3):
        raise ValueError("derivative order must be 0..3")
    pos = _scan_zeros(pot, start, horizon, (j,), scan_step)[j]
    return ZeroLocation(j, pos, float(horizon))


def ordered_first_zeros(strength: float, start: StateVector4) -> ZeroOrdering:
    """First zeros of u''', u'', u', u for u'''' = -strength * u launched from
    an all-positive jet; they are finite and strictly ordered."""
    if strength <= 0.0:
        raise ValueError("strength must be positive")
    if not all(v > 0.0 for v in start.jet):
        raise ValueError("start jet must be strictly positive in all four slots")
    pot = PiecewisePotential.single(strength, start=start.x)
    span = HORIZON_FACTOR / max(1.0, strength**0.25)
    for _ in range(HORIZON_DOUBLINGS + 1):
        zs = _scan_zeros(pot, start, start.x + span, (3, 2, 1, 0))
        if all(math.isfinite(z) for z in zs.values()):
            return ZeroOrdering(zs[3], zs[2], zs[1], zs[0])
        span *= 2.0
    raise HorizonError("zero ladder did not complete within the enlarged horizon")


def _check_race_start(start: StateVector4) -> None:
    ok = start.u > 0.0 and start.u1 > 0.0 and start.u2 < 0.0 and start.u3 < 0.0
    if not ok:
        raise ValueError(
            "race start must have the strict sign pattern (u>0, u'>0, u''<0, u'''<0)"
        )


def _race_span(b: float, horizon: float | None) -> float:
    return float(horizon) if horizon is not None else HORIZON_FACTOR / max(1.0, b**0.25)


def _race_zeros(
    b: float, start: StateVector4, horizon: float | None, orders: tuple[int, ...]
) -> tuple[dict[int, float], float]:
    """Zeros of the requested orders for u''''' = b*u from the start jet,
    positions measured from the start; the horizon doubles while every
    requested zero is missing."""
    if b <= 0.0:
        raise ValueError("race stiffness must be positive")
    origin = StateVector4.from_jet(0.0, start.jet)
    pot = PiecewisePotential.single(-b, start=0.0)
    span = _race_span(b, horizon)
    for _ in range(HORIZON_DOUBLINGS + 1):
        zs = _scan_zeros(pot, origin, span, orders)
        if any(math.isfinite(z) for z in zs.values()):
            return zs, span
        span *= 2.0
    return zs, span


def race_zeros(b: float, start: StateVector4, horizon: float | None = None) -> tuple[float, float]:
    """(z1, z3) for the race at stiffness b, measured from start.x; inf marks
    a zero that never occurred within the (possibly enlarged) horizon."""
    _check_race_start(start)
    zs, _span = _race_zeros(b, start, horizon, (1, 3))
    return zs[1], zs[3]


def _verdict(z1: float, z3: float) -> RaceVerdict:
    if math.isinf(z1) and math.isinf(z3):
        return RaceVerdict.UNDECIDED
    if math.isfinite(z1) and math.isfinite(z3) and abs(z1 - z3) <= TIE_RTOL * max(1.0, z1):
        return RaceVerdict.TIE
    return RaceVerdict.Z3_FIRST if z3 < z1 else RaceVerdict.Z1_FIRST


def zero_race(b: float, start: StateVector4, horizon: float | None = None) -> RaceVerdict:
    """Which of z1 (first zero of u') and z3 (first zero of u''') comes first
    for u'''' = b*u from a (+, +, -, -) start jet."""
    _check_race_start(start)
    zs, _span = _race_zeros(b, start, horizon, (1, 3))
    return _verdict(zs[1], zs[3])


def _cubic_lower_bound_min(jet: np.ndarray, b: float, span: float) -> float:
    """Minimum over [0, span] of g1 + g2 x + g3 x^2/2 + b g0 x^3/6, the lower
    bound for u' that certifies z1 = inf when positive throughout."""
    g0, g1, g2, g3 = (float(v) for v in jet)

    def cubic(x: float) -> float:
        return g1 + g2 * x + g3 * x * x / 2.0 + b * g0 * x**3 / 6.0

    candidates = [0.0, span]
    # critical points: b g0/2 x^2 + g3 x + g2 = 0
    a_, b_, c_ = b * g0 / 2.0, g3, g2
    disc = b_ * b_ - 4.0 * a_ * c_
    if disc >= 0.0 and a_ != 0.0:
        r = math.sqrt(disc)
        for root in ((-b_ + r) / (2.0 * a_), (-b_ - r) / (2.0 * a_)):
            if 0.0 < root < span:
                candidates.append(root)
    return min(cubic(x) for x in candidates)


def race_brackets(start: StateVector4, horizon: float | None = None) -> tuple[float, float]:
    """(b_high, b_low) bracketing the tie: doubling from 1 until the jerk zero
    wins with the cubic lower bound positive on the horizon, halving from 1
    until the slope zero wins."""
    _check_race_start(start)
    b = 1.0
    b_high = None
    for _ in range(BRACKET_MAX_ITERS):
        zs, span = _race_zeros(b, start, horizon, (1, 3))
        verdict = _verdict(zs[1], zs[3])
        if verdict is RaceVerdict.UNDECIDED:
            raise HorizonError(f"race undecided at stiffness {b}; enlarge the horizon")
        if verdict is RaceVerdict.Z3_FIRST and _cubic_lower_bound_min(start.jet, b, span) > 0.0:
            b_high = b
            break
        b *= 2.0
    if b_high is None:
        raise BracketError("doubling failed to certify an upper race bracket")
    b = 1.0
    b_low = None
    for _ in range(BRACKET_MAX_ITERS):
        zs, _span = _race_zeros(b, start, horizon, (1, 3))
        if _verdict(zs[1], zs[3]) is RaceVerdict.Z1_FIRST:
            b_low = b
            break
        b /= 2.0
    if b_low is None:
        raise BracketError("halving failed to find a lower race bracket")
    return b_high, b_low


def solve_race_tie(start: StateVector4, horizon: float | None = None) -> ContinuationBracket:
    """Bisect the race verdict between the brackets until z1 and z3 coincide
    within TIE_RTOL * max(1, z1).

    The z1 = z2 event (slope zero turning double) is picked up as a by-product
    of the descent when the trajectory straddles it.
    """
    b_high, b_low = race_brackets(start, horizon)
    lo, hi = b_low, b_high
    trail: list[tuple[float, float, float]] = []  # (b, z1, z2)
    b_star = None
    for _ in range(TIE_MAX_ITERS):
        mid = 0.5 * (lo + hi)
        zs, _span = _race_zeros(mid, start, horizon, (1, 2, 3))
        verdict = _verdict(zs[1], zs[3])
        trail.append((mid, zs[1], zs[2]))
        if verdict is RaceVerdict.TIE:
            b_star = mid
            break
        if verdict is RaceVerdict.Z3_FIRST:
            hi = mid
        elif verdict is RaceVerdict.Z1_FIRST:
            lo = mid
        else:
            raise HorizonError(
                f"race undecided inside the bracket at stiffness {mid}; enlarge the horizon"
            )
    if b_star is None:
        raise BracketError("race bisection exhausted its iterations before a tie")
    b_double = _locate_slope_double_zero(start, horizon, trail, b_high)
    return ContinuationBracket(b_low=b_low, b_high=b_high, b_star=b_star, b_double=b_double)


def _locate_slope_double_zero(start, horizon, trail, b_high) -> float | None:
    """Refine the b where z1 = z2 from straddling descent samples; best
    effort, None when the descent never saw both sides.

    Near the threshold the slope dips below zero over an interval narrower
    than the scan grid, so comparing z1 against z2 directly is unreliable.
    The slope's minimum sits at z2 (the curvature's first, transversal zero),
    so the sign of u'(z2) decides the side exactly: negative means the dip
    crosses (z1 < z2), positive means it does not.
    """
    origin = StateVector4.from_jet(0.0, start.jet)

    def slope_at_curvature_zero(b: float) -> float:
        zs, _span = _race_zeros(b, start, horizon, (2,))
        if math.isinf(zs[2]):
            return -math.inf  # curvature never turns, slope keeps falling
        pot = PiecewisePotential.single(-b, start=0.0)
        return float(propagate(pot, origin, zs[2]).u1)

    below = [b for b, z1, z2 in trail if z1 < z2]
    above = [b for b, z1, z2 in trail if z2 < z1]
    # the certified upper bracket has z1 = inf, z2 finite
    lo = max(below) if below else None
    hi = min(above) if above else b_high
    if lo is None or not lo < hi:
        return None
    for _ in range(80):
        if hi - lo <= 1e-10 * hi:
            break
        mid = 0.5 * (lo + hi)
        if slope_at_curvature_zero(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def zero_shift_rates(b: float, start: StateVector4, horizon: float | None = None) -> ZeroShiftRates:
    """dz1/dB and dz3/dB at stiffness b (both zeros must exist).

    Implicit differentiation of u'(z1; B) = 0 gives dz1/dB =
    -d_B u'(z1) / u''(z1); of u'''(z3; B) = 0, using u'''' = B u, gives
    dz3/dB = -d_B u'''(z3) / (B u(z3)).
    """
    _check_race_start(start)
    zs, _span = _race_zeros(b, start, horizon, (1, 3))
    z1, z3 = zs[1], zs[3]
    if not (math.isfinite(z1) and math.isfinite(z3)):
        raise ValueError(f"both race zeros must exist at stiffness {b}: z1={z1}, z3={z3}")
    origin = StateVector4.from_jet(0.0, start.jet)
    pot = PiecewisePotential.single(-b, start=0.0)
    u2_at_z1 = float(propagate(pot, origin, z1).u2)
    u_at_z3 = float(propagate(pot, origin, z3).u)
    if abs(u2_at_z1) < DEGENERATE_TOL or abs(u_at_z3) < DEGENERATE_TOL:
        raise DegenerateZeroError(
            f"transversal derivative too small: u''(z1)={u2_at_z1}, u(z3)={u_at_z3}"
        )
    dz1 = -stiffness_sensitivity(b, origin, z1).db_u1 / u2_at_z1
    dz3 = -stiffness_sensitivity(b, origin, z3).db_u3 / (b * u_at_z3)
    return ZeroShiftRates(float(b), dz1, dz3)
