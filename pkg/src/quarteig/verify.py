"""Independent numerical evidence for the embedded eigenvalues.

Two routes per construction.  Grid route: discretize on [-X, X] with clamped
ends (u = u' = 0 via natural stencil truncation), solve the dense symmetric
eigenproblem, and look for a localized eigenvector at the claimed eigenvalue
surrounded by non-localized (approximate continuum) states.  Shooting route:
impose the exact decay/matching conditions and evaluate a mismatch function
of lambda that vanishes precisely at eigenvalues.

The diagonal potential samples are exact cell averages over
[x_i - h/2, x_i + h/2].  For a piecewise-constant q this equals the node
value except in the one cell straddling each breakpoint, where averaging
removes the O(h) eigenvalue error that node sampling would inject.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .kernels import PiecewisePotential, StateVector4, krylov_arrays, krylov_eval, propagate
from .construct import EmbeddedPotentialSpec, PointInteraction, interface_jumps

DENSE_EIGEN_CAP = 4000
EIGEN_RESIDUAL_RTOL = 1e-8
MIN_GRID_POINTS = 50
# ipr at least 10/n marks a localized state; extended states sit near 1/n
LOCALIZATION_FACTOR = 10.0
MIN_CONTINUUM_NEIGHBORS = 10
CROWDING_FACTOR = 10.0


class Verdict(enum.Enum):
    EMBEDDED_CANDIDATE = "EMBEDDED_CANDIDATE"
    NOT_FOUND = "NOT_FOUND"


@dataclass(frozen=True, eq=False)
class GridOperator:
    """Dense symmetric discretization on the n interior nodes of [-X, X]."""

    X: float
    n: int
    h: float
    matrix: np.ndarray

    def __post_init__(self) -> None:
        if self.n < 1 or self.matrix.shape != (self.n, self.n):
            raise ValueError("matrix shape must be (n, n)")
        if not math.isclose(self.h, 2.0 * self.X / (self.n + 1), rel_tol=1e-12):
            raise ValueError("grid step must equal 2X/(n+1)")
        if not np.array_equal(self.matrix, self.matrix.T):
            raise ValueError("matrix must be exactly symmetric")

    @property
    def xs(self) -> np.ndarray:
        return -self.X + self.h * np.arange(1, self.n + 1)


@dataclass(frozen=True, eq=False)
class EigenSolution:
    """Full spectrum of a GridOperator: eigenvalues ascending, vectors[:, i]
    the unit eigenvector of eigenvalues[i]."""

    X: float
    n: int
    h: float
    eigenvalues: np.ndarray
    vectors: np.ndarray

    @property
    def xs(self) -> np.ndarray:
        return -self.X + self.h * np.arange(1, self.n + 1)


@dataclass(frozen=True, eq=False)
class SpectralReport:
    eigenvalues: np.ndarray
    target: float
    nearest: float
    gap: float
    ipr: float
    decay_fit: float
    verdict: Verdict
    crowded: bool
    non_localized_below: int
    non_localized_above: int


def _fourth_difference_band(n: int, h: float) -> np.ndarray:
    m = np.zeros((n, n))
    idx = np.arange(n)
    m[idx, idx] = 6.0
    m[idx[:-1], idx[1:]] = -4.0
    m[idx[1:], idx[:-1]] = -4.0
    m[idx[:-2], idx[2:]] = 1.0
    m[idx[2:], idx[:-2]] = 1.0
    return m / h**4


def _cell_averages(q: PiecewisePotential, xs: np.ndarray, h: float) -> np.ndarray:
    out = np.empty(xs.size)
    for i, x in enumerate(xs):
        acc = 0.0
        for lo, hi, value in q.segments(x - h / 2.0, x + h / 2.0):
            acc += (hi - lo) * value
        out[i] = acc / h
    return out


def discretize_quartic(q: PiecewisePotential, X: float, n: int) -> GridOperator:
    """Clamped 5-point discretization of u'''' + q u on [-X, X]."""
    if n < MIN_GRID_POINTS:
        raise ValueError(f"need at least {MIN_GRID_POINTS} interior points")
    support = max(abs(b) for b in q.breakpoints) if q.breakpoints else 0.0
    if X <= support:
        raise ValueError("half-width X must exceed the support of q")
    h = 2.0 * X / (n + 1)
    xs = -X + h * np.arange(1, n + 1)
    m = _fourth_difference_band(n, h)
    m[np.arange(n), np.arange(n)] += _cell_averages(q, xs, h)
    return GridOperator(X=X, n=n, h=h, matrix=m)


def discretize_schrodinger(v: Callable[[np.ndarray], np.ndarray], X: float, n: int) -> GridOperator:
    """Clamped 3-point discretization of -u'' + V u on [-X, X]."""
    if n < MIN_GRID_POINTS:
        raise ValueError(f"need at least {MIN_GRID_POINTS} interior points")
    h = 2.0 * X / (n + 1)
    xs = -X + h * np.arange(1, n + 1)
    idx = np.arange(n)
    m = np.zeros((n, n))
    m[idx, idx] = 2.0 / h**2
    m[idx[:-1], idx[1:]] = -1.0 / h**2
    m[idx[1:], idx[:-1]] = -1.0 / h**2
    m[idx, idx] += v(xs)
    return GridOperator(X=X, n=n, h=h, matrix=m)


def discretize_schrodinger_and_square(
    v: Callable[[np.ndarray], np.ndarray], X: float, n: int
) -> tuple[GridOperator, GridOperator]:
    """(H_n, L_n) with L_n the exact matrix square of H_n, so the spectra
    satisfy spec(L_n) = spec(H_n)^2 identically."""
    hop = discretize_schrodinger(v, X, n)
    square = hop.matrix @ hop.matrix
    if not np.array_equal(square, square.T):
        square = 0.5 * (square + square.T)
    return hop, GridOperator(X=hop.X, n=hop.n, h=hop.h, matrix=square)


def eigensolve_symmetric(op: GridOperator) -> EigenSolution:
    """Full dense spectrum with a residual guarantee of 1e-8 * ||M|| per pair."""
    if op.n > DENSE_EIGEN_CAP:
        raise ValueError(f"dense eigensolve capped at n = {DENSE_EIGEN_CAP}")
    w, v = np.linalg.eigh(op.matrix)
    scale = max(np.max(np.abs(w)), 1e-300)
    resid = np.max(np.linalg.norm(op.matrix @ v - v * w, axis=0))
    if resid > EIGEN_RESIDUAL_RTOL * scale:
        raise ArithmeticError(
            f"eigenpair residual {resid:.3e} exceeds {EIGEN_RESIDUAL_RTOL} * ||M|| = "
            f"{EIGEN_RESIDUAL_RTOL * scale:.3e}"
        )
    return EigenSolution(X=op.X, n=op.n, h=op.h, eigenvalues=w, vectors=v)


def inverse_participation_ratio(v: np.ndarray) -> float:
    v2 = v * v
    return float(np.sum(v2 * v2) / np.sum(v2) ** 2)


# envelope band, relative to the peak, used for the tail-rate fit
DECAY_BAND = (1e-3, 1e-1)


def _tail_decay_fit(xs: np.ndarray, v: np.ndarray, band: tuple[float, float] = DECAY_BAND) -> float:
    """Exponential decay rate of the right tail of an eigenvector.

    Fits log|v| against x on the points right of the peak whose magnitude
    falls in `band` relative to the peak: low enough to sit on the pure tail
    past any oscillatory core, high enough to clear the continuum admixture
    a finite-n eigenvector carries (typically ~1e-4 of the peak, far above
    solver roundoff).  Falls back to the outer 20% when the band holds fewer
    than 8 points (extended states, where the rate is ~0).
    """
    ys = np.abs(v)
    top = float(np.max(ys))
    if top == 0.0:
        raise ValueError("cannot fit the decay of a zero vector")
    peak = int(np.argmax(ys))
    # raise the band floor above the measured far-field plateau when the
    # admixture is worse than the default allows for
    plateau = float(np.median(ys[-max(ys.size // 10, 4):]))
    lo = max(band[0], 8.0 * plateau / top)
    sel = (ys[peak:] >= lo * top) & (ys[peak:] <= band[1] * top)
    idx = peak + np.nonzero(sel)[0]
    if idx.size < 8 or lo >= band[1]:
        idx = np.arange(max(xs.size - max(int(xs.size * 0.2), 2), 0), xs.size)
    window = np.maximum(ys[idx], top * 1e-300)
    slope = np.polyfit(xs[idx], np.log(window), 1)[0]
    return -float(slope)


def detect_embedded(
    sol: EigenSolution, target: float, decay_rate: float | None = None, gap_tol: float = 1e-2
) -> SpectralReport:
    """Look for a localized eigenvector at `target` embedded among
    non-localized states on both sides.

    `decay_rate` is the expected tail rate, carried for the caller's report;
    the verdict depends only on the gap, the localization threshold, and the
    neighbor counts.  `crowded` flags a nearest continuum neighbor within
    CROWDING_FACTOR times the target gap; the verdict is then still based on
    the stated criteria, but the flag warns that an avoided crossing may be
    distorting them.
    """
    w = sol.eigenvalues
    k = int(np.argmin(np.abs(w - target)))
    nearest = float(w[k])
    gap = abs(nearest - target)
    vec = sol.vectors[:, k]
    iprs = np.sum(sol.vectors**4, axis=0) / np.sum(sol.vectors**2, axis=0) ** 2
    threshold = LOCALIZATION_FACTOR / sol.n
    extended = iprs < threshold
    below = int(np.count_nonzero(extended[:k]))
    above = int(np.count_nonzero(extended[k + 1 :]))
    localized = iprs[k] >= threshold
    ok = gap < gap_tol and localized and below >= MIN_CONTINUUM_NEIGHBORS and above >= MIN_CONTINUUM_NEIGHBORS
    others = np.abs(np.delete(w, k) - nearest)
    crowded = bool(others.size and np.min(others) < CROWDING_FACTOR * gap)
    return SpectralReport(
        eigenvalues=w,
        target=float(target),
        nearest=nearest,
        gap=gap,
        ipr=float(iprs[k]),
        decay_fit=_tail_decay_fit(sol.xs, vec),
        verdict=Verdict.EMBEDDED_CANDIDATE if ok else Verdict.NOT_FOUND,
        crowded=crowded,
        non_localized_below=below,
        non_localized_above=above,
    )


# ---------------------------------------------------------------------------
# shooting


def _jet_matrix_members(c: float, x: float, orders: tuple[int, int]) -> np.ndarray:
    """Columns: 4-jets at x of the requested basis members K_j(.; c)."""
    kv = krylov_eval(x, c)
    ring = [kv.k0, kv.k1, kv.k2, kv.k3]

    def jet(j: int) -> list[float]:
        # repeated differentiation steps down through the family, wrapping
        # K_0' = c K_3
        out = []
        cur, mult = j, 1.0
        for _ in range(4):
            out.append(mult * ring[cur])
            if cur == 0:
                cur, mult = 3, mult * c
            else:
                cur -= 1
        return out

    return np.array([jet(j) for j in orders]).T


def _free_wave_basis(k: float, x: float) -> np.ndarray:
    """Columns: 4-jets at x of e^{-kx}, e^{kx}, cos kx, sin kx."""
    em, ep = math.exp(-k * x), math.exp(k * x)
    ckx, skx = math.cos(k * x), math.sin(k * x)
    return np.array(
        [
            [em, ep, ckx, skx],
            [-k * em, k * ep, -k * skx, k * ckx],
            [k**2 * em, k**2 * ep, -(k**2) * ckx, -(k**2) * skx],
            [-(k**3) * em, k**3 * ep, k**3 * skx, -(k**3) * ckx],
        ]
    )


@dataclass(frozen=True, eq=False)
class ShootResult:
    """Mismatch of the decay condition at +infinity for the point-interaction
    profile: smallest singular value of the map from the interior family to
    the non-decaying far-field coefficients, plus the minimizing member."""

    lam: float
    parity: str
    mismatch: float
    coefficients: np.ndarray  # weights of the two interior basis members
    interior_orders: tuple[int, int]
    break_position: float

    def profile(self, xs: np.ndarray) -> np.ndarray:
        """The minimizing interior solution sampled on xs in [0, break)."""
        rows = krylov_arrays(np.asarray(xs, dtype=float), self.lam)
        j0, j1 = self.interior_orders
        return self.coefficients[0] * rows[j0] + self.coefficients[1] * rows[j1]


def shoot_singular_details(lam: float, parity: str = "odd") -> ShootResult:
    """Shooting data for the point-interaction profile at trial eigenvalue
    lam: build the parity-adapted two-parameter family on (0, break), apply
    the interface jumps, expand beyond in free waves, and measure how far the
    family is from producing a decaying tail."""
    if lam <= 0.0:
        raise ValueError("trial eigenvalue must be positive")
    if parity == "odd":
        p = 3.0 * math.pi / 4.0
        orders = (1, 3)
    elif parity == "even":
        p = math.pi / 4.0
        orders = (0, 2)
    else:
        raise ValueError("parity must be 'odd' or 'even'")
    k = lam**0.25
    pi = PointInteraction(c=p, beta=-2.0, gamma=4.0)
    jets = _jet_matrix_members(lam, p, orders)
    for col in range(jets.shape[1]):
        j2, j3 = interface_jumps(pi, jets[0, col], jets[1, col])
        jets[2, col] += j2
        jets[3, col] += j3
    coeffs = np.linalg.solve(_free_wave_basis(k, p), jets)
    norms = np.linalg.norm(coeffs, axis=0)
    coeffs /= norms
    outgoing = coeffs[1:, :]  # e^{+kx}, cos, sin rows
    _u, s, vh = np.linalg.svd(outgoing)
    # the null weights act on the normalized columns; undo the scaling to get
    # weights for the raw interior members
    members = vh[-1, :] / norms
    members /= np.linalg.norm(members)
    return ShootResult(
        lam=float(lam),
        parity=parity,
        mismatch=float(s[-1]),
        coefficients=members,
        interior_orders=orders,
        break_position=p,
    )


def shoot_singular(lam: float, parity: str = "odd") -> float:
    """Decay-condition mismatch at trial eigenvalue lam; zero exactly at
    eigenvalues of the point-interaction operator."""
    return shoot_singular_details(lam, parity).mismatch


def shoot_piecewise(
    spec: EmbeddedPotentialSpec, lam: float, scale: float = 1.0
) -> tuple[float, float]:
    """(u'(0), u'''(0)) for the solution of u'''' + (q - lam) u = 0 that
    decays like scale * e^{lam^{1/4} x} as x -> -infinity; both vanish iff
    lam admits an even square-integrable eigenfunction.  The components are
    homogeneous in scale (exactly so for power-of-two scales)."""
    if lam <= 0.0:
        raise ValueError("trial eigenvalue must be positive")
    kappa = lam**0.25
    amp = scale * math.exp(kappa * spec.a)
    start = StateVector4(spec.a, amp, kappa * amp, kappa**2 * amp, kappa**3 * amp)
    shifted = PiecewisePotential(
        tuple((lo, hi, value - lam) for lo, hi, value in spec.pieces.pieces)
    )
    origin = propagate(shifted, start, 0.0)
    return float(origin.u1), float(origin.u3)
