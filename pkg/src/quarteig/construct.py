"""Builders for three operator families with a positive embedded eigenvalue.

* A singular rank-two point interaction at +-3pi/4 (delta' strength beta,
  delta strength gamma) whose odd eigenfunction is sin x inside and a decaying
  exponential outside, at eigenvalue 1; plus the analogous even profile with
  interfaces at +-pi/4.
* An even, compactly supported, piecewise-constant potential q for
  u'''' + q u with eigenfunction decaying like e^{-k0|x|} at eigenvalue k0^4.
  The two plateau heights come from the zero ladder (interior matching point)
  and the zero-race tie (even-extension matching), then everything is shifted
  so the tie point sits at the origin.
* The square of a Schrodinger operator with a known bound state: expanding
  (-d^2/dx^2 + V)^2 gives a fourth-order operator with embedded eigenvalues
  at the squared bound-state energies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .kernels import PiecewisePotential, StateVector4, propagate, propagate_grid
from .zeros import ordered_first_zeros, race_zeros, solve_race_tie

# |g'(0)| + |g'''(0)| beyond this marks an inconsistent build
EVEN_MATCH_TOL = 1e-6
SIGN_PATTERN_RETRIES = 8
DEFAULT_GRID_STEP = 1e-3
GRID_HALF_WIDTH_FACTOR = 25.0


class SignPatternError(RuntimeError):
    """The jet at the interior matching point failed the (+, +, -, -) check
    even after nudging the point toward the slope's first zero."""


class SpecInconsistencyError(RuntimeError):
    """A synthesized eigenfunction violates the defining matching conditions
    of its own spec."""


@dataclass(frozen=True)
class PointInteraction:
    """Rank-two point term at x = c: derivative-coupling strength beta and
    point-potential strength gamma, acting through the jump conditions
    [u''](c) = -beta u(c) and [u'''](c) = beta u'(c) - gamma u(c)."""

    c: float
    beta: float
    gamma: float


def interface_jumps(pi: PointInteraction, u_c: float, up_c: float) -> tuple[float, float]:
    """Jumps ([u''], [u''']) across pi.c induced on a solution with boundary
    values u(c) = u_c, u'(c) = up_c."""
    return (-pi.beta * u_c, pi.beta * up_c - pi.gamma * u_c)


def derive_point_interaction(
    c: float, u_c: float, up_c: float, jump_u2: float, jump_u3: float
) -> PointInteraction:
    """Invert the jump conditions for (beta, gamma) given one-sided data;
    requires u(c) != 0."""
    if abs(u_c) < 1e-12:
        raise ValueError("cannot derive interaction strengths where u(c) vanishes")
    beta = -jump_u2 / u_c
    gamma = (beta * up_c - jump_u3) / u_c
    return PointInteraction(c=float(c), beta=beta, gamma=gamma)


@dataclass(frozen=True, eq=False)
class EigenfunctionSample:
    """Eigenfunction sampled on an ordered symmetric grid; lam is its
    eigenvalue and decay_rate the exponential rate of both tails."""

    grid: np.ndarray
    values: np.ndarray
    lam: float
    decay_rate: float
    parity: str

    def __post_init__(self) -> None:
        if self.grid.shape != self.values.shape:
            raise ValueError("grid and values must have matching shapes")
        if np.any(np.diff(self.grid) <= 0.0):
            raise ValueError("grid must be strictly increasing")
        if self.parity not in ("odd", "even"):
            raise ValueError("parity must be 'odd' or 'even'")


def fit_decay_rate(sample: EigenfunctionSample, tail_fraction: float = 0.2) -> float:
    """Exponential decay rate fitted on the outer right tail_fraction of the
    grid: the negated slope of a least-squares line through log|values|."""
    n = sample.grid.size
    k = max(int(n * tail_fraction), 2)
    xs = sample.grid[-k:]
    ys = np.abs(sample.values[-k:])
    if np.any(ys == 0.0):
        raise ValueError("tail contains exact zeros; cannot fit a decay rate")
    slope = np.polyfit(xs, np.log(ys), 1)[0]
    return -float(slope)


@dataclass(frozen=True)
class SingularExample:
    """Point-interaction profile: a trig arc on [0, break) glued C^1 onto
    amplitude * e^{-x}, extended to x < 0 by the declared parity.  The two
    interactions sit at +-break with beta of opposite signs (the derivative
    coupling is odd under reflection) and equal gamma."""

    amplitude: float
    interfaces: tuple[PointInteraction, PointInteraction]
    lam: float
    parity: str

    @property
    def break_position(self) -> float:
        return self.interfaces[1].c

    def _half_profile(self, ax: np.ndarray) -> np.ndarray:
        inner = np.sin(ax) if self.parity == "odd" else np.cos(ax)
        outer = self.amplitude * np.exp(-ax)
        return np.where(ax < self.break_position, inner, outer)

    def profile(self, xs: np.ndarray) -> np.ndarray:
        """Profile values; evaluated through |x| so the declared parity holds
        exactly in floating point."""
        xs = np.asarray(xs, dtype=float)
        vals = self._half_profile(np.abs(xs))
        if self.parity == "odd":
            vals = vals * np.sign(xs)
        return vals

    def one_sided_jets(self, c: float) -> tuple[np.ndarray, np.ndarray]:
        """Closed-form 4-jets (u, u', u'', u''') just left and just right of
        the interface at c (which must be one of the two interface points)."""
        if not any(math.isclose(c, q.c) for q in self.interfaces):
            raise ValueError(f"{c} is not an interface of this example")
        trig = np.sin if self.parity == "odd" else np.cos

        def inner_jet(x: float) -> np.ndarray:
            # derivatives of sin/cos cycle with period 4
            return np.array([_cycle_derivative(trig, x, i) for i in range(4)])

        def outer_jet(x: float) -> np.ndarray:
            if x > 0:
                e = self.amplitude * math.exp(-x)
                return np.array([e, -e, e, -e])
            e = self.amplitude * math.exp(x)
            jet = np.array([e, e, e, e])
            return jet if self.parity == "even" else -jet

        if c > 0:
            return inner_jet(c), outer_jet(c)
        return outer_jet(c), inner_jet(c)

    @property
    def norm_squared(self) -> float:
        """Squared L2 norm over the whole line, in closed form."""
        p = self.break_position
        sign = -1.0 if self.parity == "odd" else 1.0
        inner = p / 2.0 + sign * math.sin(2.0 * p) / 4.0
        tail = self.amplitude**2 * math.exp(-2.0 * p) / 2.0
        return 2.0 * (inner + tail)


def _cycle_derivative(trig, x: float, order: int) -> float:
    # d^order/dx^order of sin or cos via the quarter-period shift
    return float(trig(x + order * math.pi / 2.0))


def _sample_profile(example: SingularExample, grid_step: float) -> EigenfunctionSample:
    if grid_step <= 0.0:
        raise ValueError("grid_step must be positive")
    half_width = GRID_HALF_WIDTH_FACTOR  # decay rate is 1 for both variants
    n = max(int(math.ceil(half_width / grid_step)), 8)
    hs = np.linspace(0.0, half_width, n + 1)
    xs = np.concatenate([-hs[::-1], hs[1:]])
    return EigenfunctionSample(
        grid=xs,
        values=example.profile(xs),
        lam=example.lam,
        decay_rate=1.0,
        parity=example.parity,
    )


def _derive_interfaces(
    amplitude: float, p: float, parity: str
) -> tuple[PointInteraction, PointInteraction]:
    """Compute the jump strengths at +-p from the closed-form one-sided jets
    and check that interface_jumps reproduces them."""
    probe = SingularExample(
        amplitude=amplitude,
        interfaces=(PointInteraction(-p, 0.0, 0.0), PointInteraction(p, 0.0, 0.0)),
        lam=1.0,
        parity=parity,
    )
    out = []
    for c in (-p, p):
        left, right = probe.one_sided_jets(c)
        jump2, jump3 = right[2] - left[2], right[3] - left[3]
        u_c, up_c = right[0], right[1]  # profile is C^1: sides agree
        pi = derive_point_interaction(c, u_c, up_c, jump2, jump3)
        got = interface_jumps(pi, u_c, up_c)
        if not (math.isclose(got[0], jump2, abs_tol=1e-12) and math.isclose(got[1], jump3, abs_tol=1e-12)):
            raise SpecInconsistencyError(f"jump inversion failed at {c}")
        out.append(pi)
    return (out[0], out[1])


def singular_example(grid_step: float = DEFAULT_GRID_STEP) -> tuple[SingularExample, EigenfunctionSample]:
    """Odd profile: sin x on [0, 3pi/4), (e^{3pi/4}/sqrt 2) e^{-x} beyond,
    extended oddly; eigenvalue 1, squared norm 3pi/4 + 1."""
    p = 3.0 * math.pi / 4.0
    amplitude = math.exp(p) / math.sqrt(2.0)
    example = SingularExample(
        amplitude=amplitude,
        interfaces=_derive_interfaces(amplitude, p, "odd"),
        lam=1.0,
        parity="odd",
    )
    return example, _sample_profile(example, grid_step)


def even_variant(grid_step: float = DEFAULT_GRID_STEP) -> tuple[SingularExample, EigenfunctionSample]:
    """Even profile: cos x on [0, pi/4), (e^{pi/4}/sqrt 2) e^{-x} beyond,
    extended evenly; eigenvalue 1, squared norm pi/4 + 1."""
    p = math.pi / 4.0
    amplitude = math.exp(p) / math.sqrt(2.0)
    example = SingularExample(
        amplitude=amplitude,
        interfaces=_derive_interfaces(amplitude, p, "even"),
        lam=1.0,
        parity="even",
    )
    return example, _sample_profile(example, grid_step)


@dataclass(frozen=True)
class EmbeddedPotentialSpec:
    """Even piecewise-constant potential with eigenvalue k0^4: value A + k0^4
    on [a, b), -B + k0^4 on [b, 0), mirrored to x > 0, zero for x < a.
    Coordinates are post-shift (the even matching point is at 0); zeta records
    where that point sat before the shift."""

    k0: float
    a: float
    b: float
    A: float
    B: float
    zeta: float
    even_extension: bool = True

    def __post_init__(self) -> None:
        if self.k0 <= 0.0 or self.A <= 0.0 or self.B <= 0.0:
            raise ValueError("k0, A, B must all be positive")
        if not self.a < self.b < 0.0:
            raise ValueError("breakpoints must satisfy a < b < 0")

    @property
    def lam(self) -> float:
        return self.k0**4

    @property
    def pieces(self) -> PiecewisePotential:
        """The x <= 0 half of q."""
        return PiecewisePotential(
            ((self.a, self.b, self.A + self.lam), (self.b, 0.0, -self.B + self.lam))
        )

    def full_potential(self) -> PiecewisePotential:
        """q on the whole line (zero outside [a, -a])."""
        return PiecewisePotential(
            (
                (self.a, self.b, self.A + self.lam),
                (self.b, -self.b, -self.B + self.lam),
                (-self.b, -self.a, self.A + self.lam),
            )
        )

    def effective_half_potential(self) -> PiecewisePotential:
        """q - lam on [a, 0), the values that drive the eigenfunction jet."""
        return PiecewisePotential(((self.a, self.b, self.A), (self.b, 0.0, -self.B)))


def _decay_state(k0: float, x: float) -> StateVector4:
    amp = math.exp(k0 * x)
    return StateVector4(x, amp, k0 * amp, k0**2 * amp, k0**3 * amp)


def build_embedded_potential(k0: float, a: float, A: float) -> EmbeddedPotentialSpec:
    """Assemble the even potential for eigenvalue k0^4 with left plateau
    height A starting at a (pre-shift).

    Launch the e^{k0 x} jet at a under u'''' = -A u; place the matching point
    b midway between the first zeros of u'' and u' (retrying toward the
    latter if the jet there fails the strict (+, +, -, -) pattern); solve the
    zero race from b for the tie stiffness B and tie point; shift so the tie
    point is the origin and mirror evenly.
    """
    if k0 <= 0.0:
        raise ValueError("k0 must be positive")
    if a >= 0.0:
        raise ValueError("a must be negative")
    if A <= 0.0:
        raise ValueError("A must be positive")
    start = _decay_state(k0, a)
    ladder = ordered_first_zeros(A, start)
    plateau = PiecewisePotential.single(A, start=a)
    b = 0.5 * (ladder.x2 + ladder.x1)
    state_b = None
    for _ in range(SIGN_PATTERN_RETRIES + 1):
        cand = propagate(plateau, start, b)
        if cand.u > 0.0 and cand.u1 > 0.0 and cand.u2 < 0.0 and cand.u3 < 0.0:
            state_b = cand
            break
        b = 0.5 * (b + ladder.x1)
    if state_b is None:
        raise SignPatternError(
            f"no (+, +, -, -) jet found between the curvature and slope zeros near {b}"
        )
    bracket = solve_race_tie(state_b)
    # glue at the refined zero of u' (z1 and z3 agree to the tie tolerance;
    # using z1 makes the slope vanish at the origin to bisection accuracy,
    # so the even reflection has no first-derivative kink)
    z1, _z3 = race_zeros(bracket.b_star, state_b)
    zeta = b + z1
    return EmbeddedPotentialSpec(
        k0=k0, a=a - zeta, b=b - zeta, A=A, B=bracket.b_star, zeta=zeta
    )


def synthesize_eigenfunction(
    spec: EmbeddedPotentialSpec, grid_step: float = DEFAULT_GRID_STEP
) -> EigenfunctionSample:
    """Sample the eigenfunction of spec on [-25/k0, 25/k0]: e^{k0 x} up to a,
    propagated through [a, 0], reflected evenly.

    Raises SpecInconsistencyError when |g'(0)| + |g'''(0)| exceeds the
    matching tolerance, since an even C^3 extension needs both to vanish.
    """
    if grid_step <= 0.0:
        raise ValueError("grid_step must be positive")
    half_width = GRID_HALF_WIDTH_FACTOR / spec.k0
    if half_width <= -spec.a:
        raise ValueError("grid too narrow for the support of q")
    n = max(int(math.ceil(half_width / grid_step)), 8)
    hs = np.linspace(0.0, half_width, n + 1)
    left = -hs[::-1]
    values_left = np.exp(spec.k0 * left)
    start = _decay_state(spec.k0, spec.a)
    effective = spec.effective_half_potential()
    inside = left >= spec.a
    values_left[inside] = propagate_grid(effective, start, left[inside])[0]
    origin = propagate(effective, start, 0.0)
    residual = abs(origin.u1) + abs(origin.u3)
    if residual > EVEN_MATCH_TOL:
        raise SpecInconsistencyError(
            f"even matching residual |g'(0)|+|g'''(0)| = {residual:.3e} exceeds {EVEN_MATCH_TOL}"
        )
    xs = np.concatenate([left, hs[1:]])
    values = np.concatenate([values_left, values_left[:-1][::-1]])
    return EigenfunctionSample(
        grid=xs, values=values, lam=spec.lam, decay_rate=spec.k0, parity="even"
    )


@dataclass(frozen=True)
class SchrodingerSquareSpec:
    """Smooth decaying potential with known bound-state energies, given by
    vectorized samplers for V, V', V''."""

    v: Callable[[np.ndarray], np.ndarray]
    v1: Callable[[np.ndarray], np.ndarray]
    v2: Callable[[np.ndarray], np.ndarray]
    bound_energies: tuple[float, ...]

    def __post_init__(self) -> None:
        if any(e >= 0.0 for e in self.bound_energies):
            raise ValueError("bound-state energies must be negative")
        if any(b <= a for a, b in zip(self.bound_energies, self.bound_energies[1:])):
            raise ValueError("bound-state energies must be strictly increasing")


@dataclass(frozen=True)
class OperatorCoefficients:
    """Variable coefficients of L = D^4 + c2(x) D^2 + c1(x) D + c0(x), with
    the eigenvalues L embeds into its continuous spectrum."""

    c2: Callable[[np.ndarray], np.ndarray]
    c1: Callable[[np.ndarray], np.ndarray]
    c0: Callable[[np.ndarray], np.ndarray]
    embedded_eigenvalues: tuple[float, ...]


def sech_well() -> SchrodingerSquareSpec:
    """The -2 sech^2 well: single bound state sech x at energy -1."""

    def v(xs):
        return -2.0 / np.cosh(xs) ** 2

    def v1(xs):
        s2 = 1.0 / np.cosh(xs) ** 2
        return 4.0 * s2 * np.tanh(xs)

    def v2(xs):
        s2 = 1.0 / np.cosh(xs) ** 2
        return 4.0 * s2 * (3.0 * s2 - 2.0)

    return SchrodingerSquareSpec(v=v, v1=v1, v2=v2, bound_energies=(-1.0,))


def schrodinger_square(spec: SchrodingerSquareSpec) -> OperatorCoefficients:
    """Coefficients of (-D^2 + V)^2 = D^4 - 2V D^2 - 2V' D + (V^2 - V'');
    each bound state of the base operator embeds its squared energy."""

    def c2(xs):
        return -2.0 * spec.v(xs)

    def c1(xs):
        return -2.0 * spec.v1(xs)

    def c0(xs):
        return spec.v(xs) ** 2 - spec.v2(xs)

    return OperatorCoefficients(
        c2=c2,
        c1=c1,
        c0=c0,
        embedded_eigenvalues=tuple(e * e for e in spec.bound_energies),
    )
