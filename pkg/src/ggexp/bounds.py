"""Converse bounds on the block error exponent of the additive generalized
Gaussian noise channel under a generalized power constraint.

Three channel/constraint pairings have closed-form asymptotic bounds:

* ``q1r1``  Laplace noise, mean-absolute-value constraint,
* ``q2r1``  Gaussian noise, mean-absolute-value constraint,
* ``q1r2``  Laplace noise, mean-square constraint.

Each is the supremum over a tilt parameter rho >= 0 of an inner value that is
itself an infimum over scale/shift tilts (lambda, kappa).  The inner optima
have closed forms or single scalar root equations; this module evaluates
them, locates the supremum on a logarithmic rho grid with golden-section
refinement, and assembles sampled E(R) curves.  The finite-blocklength inner
objective for a caller-supplied input type is exposed separately for
cross-checks against the asymptotic forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import ggd
from .ggd import ChannelSpec, ConstraintSpec, GGDist
from .numerics import Bracket, NumericsError, find_root, gamma_fn, maximize_1d

__all__ = [
    "CASES",
    "RatePoint",
    "BoundCurve",
    "InputType",
    "CurveInvariantError",
    "UnsupportedCaseError",
    "thm1_objective",
    "thm2_lambda",
    "thm2_bound",
    "thm3_lambda",
    "thm3_bound",
    "thm4_solutions",
    "thm4_bound",
    "RHO1",
    "rho2_threshold",
    "capacity_endpoint",
    "transition_rate",
    "bound_for_case",
    "curve",
    "find_zero_rate",
    "thm2_raw_inner",
    "thm3_raw_inner",
    "thm4_raw_zeta1",
    "thm4_raw_zeta2",
    "thm4_lambda2",
]

CASES = ("q1r1", "q2r1", "q1r2")

# rho search: log grid capped at RHO_MAX by default; the cap is extended
# geometrically while the argmax sits on it (the maximizer is finite for every
# rate above the transition point but grows without bound as the transition is
# approached).  The boundary flag reports argmax beyond the default cap.
RHO_MAX = 64.0
RHO_GRID_POINTS = 2048
RHO_EXTEND_CAP = float(2**30)
# Rates within this distance of a transition count as the transition itself.
TRANSITION_EPS = 1e-9

RHO1 = 4.0 + 2.0 * math.sqrt(6.0)


class UnsupportedCaseError(ValueError):
    """Closed forms exist only for the three special (q, r) pairings."""


class CurveInvariantError(AssertionError):
    """A generated curve violated monotonicity/convexity/zero-tail checks."""


@dataclass(frozen=True)
class RatePoint:
    """One sampled point of a converse curve with its optimizer state."""

    R: float
    E: float
    rho_star: float
    lambda_star: float
    kappa_star: float
    boundary_hit: bool = False

    def __post_init__(self) -> None:
        if not (self.E >= 0.0 or math.isinf(self.E)):
            raise ValueError(f"exponent must be >= 0 or +inf, got {self.E}")
        if not (0.0 < self.lambda_star <= 1.0):
            raise ValueError(f"lambda_star must lie in (0, 1], got {self.lambda_star}")


@dataclass(frozen=True)
class InputType:
    """Empirical input distribution with denominator n over real letters."""

    letters: np.ndarray
    counts: np.ndarray
    n: int

    def __post_init__(self) -> None:
        letters = np.asarray(self.letters, dtype=float)
        counts = np.asarray(self.counts, dtype=np.int64)
        object.__setattr__(self, "letters", letters)
        object.__setattr__(self, "counts", counts)
        if letters.shape != counts.shape or letters.ndim != 1:
            raise ValueError("letters and counts must be matching 1-D vectors")
        if np.any(counts < 0) or int(counts.sum()) != self.n:
            raise ValueError("counts must be nonnegative and sum to n")

    @property
    def masses(self) -> np.ndarray:
        return self.counts / float(self.n)

    def power(self, r: float) -> float:
        return float(np.sum(self.masses * np.abs(self.letters) ** r))

    def check_constraint(self, cs: ConstraintSpec, eps: float = 0.0) -> bool:
        return self.power(cs.r) <= cs.s**cs.r + eps + 1e-12


@dataclass(frozen=True)
class BoundCurve:
    case_id: str
    channel: ChannelSpec
    constraint: ConstraintSpec
    log_base: float
    points: tuple[RatePoint, ...]
    R_transition: float
    R_zero: float
    _validate: bool = field(default=True, repr=False)

    def __post_init__(self) -> None:
        if self._validate:
            self.check_invariants()

    def check_invariants(self) -> None:
        """R strictly increasing; E nonnegative, non-increasing, discretely
        convex among finite points, and zero beyond R_zero."""
        R = np.array([p.R for p in self.points])
        E = np.array([p.E for p in self.points])
        if np.any(np.diff(R) <= 0.0):
            raise CurveInvariantError("rate grid must be strictly increasing")
        finite = np.isfinite(E)
        if np.any(finite) and np.any(~finite[np.argmax(finite):]) and not finite[-1]:
            raise CurveInvariantError("+inf points must precede all finite points")
        Ef, Rf = E[finite], R[finite]
        for i in range(len(Ef) - 1):
            if Ef[i + 1] > Ef[i] + 1e-9 * max(1.0, abs(Ef[i])):
                raise CurveInvariantError(
                    f"E increased from {Ef[i]} to {Ef[i + 1]} near R={Rf[i + 1]}"
                )
        if len(Ef) >= 3:
            slopes = np.diff(Ef) / np.diff(Rf)
            scale = np.maximum(1.0, np.maximum(np.abs(slopes[1:]), np.abs(slopes[:-1])))
            if np.any(np.diff(slopes) < -1e-9 * scale):
                j = int(np.argmin(np.diff(slopes) / scale))
                raise CurveInvariantError(f"convexity violated near R={Rf[j + 1]}")
        tail = Rf >= self.R_zero - 1e-12
        if np.any(Ef[tail] > 1e-9):
            raise CurveInvariantError("E must vanish for R >= R_zero")


# --- Theorem 1 inner objective ----------------------------------------------


def thm1_objective(
    ch: ChannelSpec,
    cs: ConstraintSpec,
    px: InputType,
    rho: float,
    lam: float,
    kappa: float,
    R: float,
    eps: float = 0.0,
    log_base: float = 2.0,
) -> float:
    """Finite-n inner objective for a caller-supplied input type.

    The tilted conditional given X = x is a generalized Gaussian with shape q,
    rate lambda*nu, and shift kappa*x; the two moments are mixtures of its
    absolute moments over the letters of ``px``.
    """
    if not (rho >= 0.0):
        raise ValueError(f"rho must be >= 0, got {rho}")
    if not (0.0 < lam <= 1.0):
        raise ValueError(f"lambda must lie in (0, 1], got {lam}")
    q, nu, r = ch.q, ch.nu, cs.r
    ln_b = math.log(log_base)

    eyx_q = 0.0  # E |Y - X|^q
    ey_r = 0.0  # E |Y|^r
    for x, w in zip(px.letters, px.masses):
        if w == 0.0:
            continue
        tilted = GGDist(shape=q, rate=lam * nu, shift=kappa * float(x))
        eyx_q += w * ggd.abs_moment(tilted, q, center=float(x))
        ey_r += w * ggd.abs_moment(tilted, r, center=0.0)
    if not (math.isfinite(eyx_q) and math.isfinite(ey_r) and ey_r > 0.0):
        raise ArithmeticError(f"non-finite moments: E|Y-X|^q={eyx_q}, E|Y|^r={ey_r}")

    bracket = (
        nu * eyx_q
        + (rho / r) * math.log(ey_r)
        + rho * math.log(gamma_fn(1.0 + 1.0 / r) / gamma_fn(1.0 + 1.0 / q))
        + (rho / q) * math.log(nu)
        + (rho + 1.0) / q * math.log(lam / math.e)
        + (rho / r) * math.log(r * math.e)
    )
    return -rho * (R - eps) + bracket / ln_b


# --- closed-form / root-equation inner solutions ------------------------------


def thm2_lambda(nu_s, rho):
    """Scale tilt for the Laplace/abs-constraint case (quadratic root)."""
    nu_s = np.asarray(nu_s, dtype=float)
    rho = np.asarray(rho, dtype=float)
    a = nu_s - 1.0
    lam = (a + np.sqrt(a * a + 4.0 * (1.0 + rho) * nu_s)) / (2.0 * (1.0 + rho) * nu_s)
    return float(lam) if lam.ndim == 0 else lam


def _bisect_decreasing(rhs, rho: np.ndarray, iters: int = 120) -> np.ndarray:
    """Solve rhs(lam) = rho for rhs strictly decreasing on (0, 1] with
    rhs(1) = 0 and rhs -> +inf as lam -> 0.  Vectorized over rho >= 0."""
    rho = np.asarray(rho, dtype=float)
    hi = np.ones_like(rho)
    lo = np.ones_like(rho)
    need = rhs(lo) < rho
    guard = 0
    while np.any(need) and guard < 2000:
        hi = np.where(need, lo, hi)
        lo = np.where(need, lo * 0.5, lo)
        need = rhs(lo) < rho
        guard += 1
    for _ in range(iters):
        mid = np.sqrt(lo * hi)
        high = rhs(mid) >= rho
        lo = np.where(high, mid, lo)
        hi = np.where(high, hi, mid)
    out = np.sqrt(lo * hi)
    return np.where(rho == 0.0, 1.0, out)


def _thm3_rhs(nu: float, s: float):
    c = s * math.sqrt(nu * math.pi)

    def rhs(lam):
        return (1.0 / lam - 1.0) * (1.0 / (c * np.sqrt(lam)) + 1.0)

    return rhs


def thm3_lambda(nu: float, s: float, rho: float) -> float:
    """Root of rho = (1/lam - 1) * (1/(s*sqrt(nu*pi*lam)) + 1) on (0, 1]."""
    if not (rho >= 0.0):
        raise ValueError(f"rho must be >= 0, got {rho}")
    if rho == 0.0:
        return 1.0
    rhs = _thm3_rhs(nu, s)
    lo = 1.0
    while rhs(lo) < rho:
        lo *= 0.5
        if lo < 1e-280:
            raise NumericsError("failed to bracket the lambda equation")
    if lo == 1.0:
        return 1.0
    res = find_root(lambda lam: rhs(lam) - rho, Bracket(lo, min(2.0 * lo, 1.0), 1e-12))
    return res.x


def _thm4_cubic_rhs(nu_s: float):
    def rhs(lam):
        return (1.0 / lam - 1.0) * (2.0 / (nu_s * lam) ** 2 + 1.0)

    return rhs


def thm4_lambda2(nu_s: float, rho: float) -> float:
    """Root of rho = (1/lam - 1) * (2/(nu_s*lam)^2 + 1) on (0, 1]."""
    if rho == 0.0:
        return 1.0
    rhs = _thm4_cubic_rhs(nu_s)
    lo = 1.0
    while rhs(lo) < rho:
        lo *= 0.5
        if lo < 1e-280:
            raise NumericsError("failed to bracket the cubic equation")
    if lo == 1.0:
        return 1.0
    res = find_root(lambda lam: rhs(lam) - rho, Bracket(lo, min(2.0 * lo, 1.0), 1e-12))
    return res.x


def rho2_threshold(nu_s: float) -> float:
    return 2.0 / nu_s + 4.0 + 3.0 * nu_s


def _phi(nu_s, rho):
    """Smaller stationary point of the low-zeta branch, defined for rho >= rho1."""
    rho = np.asarray(rho, dtype=float)
    disc = np.maximum(rho * rho - 8.0 * (1.0 + rho), 0.0)
    return (rho - np.sqrt(disc)) / (2.0 * (1.0 + rho) * nu_s)


def thm4_solutions(nu_s: float, rho: float) -> tuple[tuple[float, float], tuple[float, float]]:
    """The two competing (lambda_i, kappa_i) solutions of the q=1, r=2 case."""
    if not (rho >= 0.0):
        raise ValueError(f"rho must be >= 0, got {rho}")
    if rho <= RHO1:
        lam1, kap1 = 1.0 / (1.0 + nu_s), 1.0
    else:
        zeta1 = min(float(_phi(nu_s, rho)), 1.0 / (1.0 + nu_s))
        lam1 = 1.0 - nu_s * zeta1
        kap1 = zeta1 / lam1
    if rho <= rho2_threshold(nu_s):
        lam2 = thm4_lambda2(nu_s, rho)
    else:
        lam2 = 1.0 / (1.0 + nu_s)
    return (lam1, kap1), (lam2, 1.0)


# --- raw inner objectives (brute-force cross-check targets) -------------------


def thm2_raw_inner(nu_s: float, rho: float, lam):
    """kappa = 1 branch of the Laplace/abs inner objective, in nats."""
    lam = np.asarray(lam, dtype=float)
    return rho * np.log(lam * nu_s + 1.0) + 1.0 / lam + np.log(lam) - 1.0


def thm3_raw_inner(nu: float, s: float, rho: float, lam):
    """Gaussian/abs inner objective before minimization over lambda, in nats."""
    lam = np.asarray(lam, dtype=float)
    return (
        0.5 / lam
        + rho * np.log(s + 1.0 / np.sqrt(lam * nu * math.pi))
        + 0.5 * (rho + 1.0) * np.log(lam)
        - 0.5
        + rho * math.log(2.0 * math.sqrt(math.e * nu / math.pi))
    )


def thm4_raw_zeta1(nu_s: float, rho: float, zeta):
    """Low-zeta branch objective (lambda already minimized out), in nats."""
    zeta = np.asarray(zeta, dtype=float)
    return 0.5 * rho * np.log(0.5 * (nu_s * zeta) ** 2 + 1.0) + np.log(1.0 - nu_s * zeta) + 1.0


def thm4_raw_zeta2(nu_s: float, rho: float, zeta):
    """High-zeta branch objective (lambda = zeta), in nats."""
    zeta = np.asarray(zeta, dtype=float)
    return 0.5 * rho * np.log(0.5 * (nu_s * zeta) ** 2 + 1.0) + np.log(zeta) + 1.0 / zeta - nu_s


# --- inner values V(rho) in nats (exponent = sup_rho V/ln b - rho R) ----------


def _v_q1r1(nu_s: float, rho):
    rho = np.asarray(rho, dtype=float)
    lam = thm2_lambda(nu_s, rho)
    branch = rho * np.log(lam * nu_s + 1.0) + 1.0 / lam + np.log(lam) - 1.0
    return np.minimum(nu_s, branch)


def _v_q2r1(nu: float, s: float, rho):
    rho = np.asarray(rho, dtype=float)
    lam = _bisect_decreasing(_thm3_rhs(nu, s), rho)
    return (
        rho * np.log(s * np.sqrt(nu * math.pi * lam) + 1.0)
        + 0.5 * (1.0 / lam + np.log(lam) - 1.0)
        + rho * math.log(2.0 * math.sqrt(math.e) / math.pi)
    )


def _thm4_branches(nu_s: float, rho):
    rho = np.asarray(rho, dtype=float)
    endpoint = 1.0 / (1.0 + nu_s)
    zeta1 = np.where(rho <= RHO1, endpoint, np.minimum(_phi(nu_s, rho), endpoint))
    lam1 = 1.0 - nu_s * zeta1
    kap1 = zeta1 / lam1
    lam2 = np.where(
        rho <= rho2_threshold(nu_s),
        _bisect_decreasing(_thm4_cubic_rhs(nu_s), rho),
        endpoint,
    )
    kap2 = np.ones_like(lam2)

    def val(lam, kap):
        return (
            0.5 * rho * np.log(0.5 * (nu_s * kap * lam) ** 2 + 1.0)
            + (1.0 - kap) * nu_s
            + 1.0 / lam
            + np.log(lam)
            - 1.0
            + 0.5 * rho * math.log(math.pi / math.e)
        )

    return (val(lam1, kap1), lam1, kap1), (val(lam2, kap2), lam2, kap2)


def _v_q1r2(nu_s: float, rho):
    (v1, _, _), (v2, _, _) = _thm4_branches(nu_s, rho)
    return np.minimum(v1, v2)


# --- supremum over rho ---------------------------------------------------------


def _rho_grid(rho_max: float) -> np.ndarray:
    return np.concatenate(([0.0], np.logspace(-6.0, math.log10(rho_max), RHO_GRID_POINTS - 1)))


def _sup_over_rho(v_fn, R: float, ln_b: float) -> tuple[float, float, bool]:
    """Maximize V(rho)/ln b - rho*R; extend the rho cap while the argmax
    pins to it.  Returns (E, rho_star, boundary_hit)."""

    def objective(rho):
        return v_fn(rho) / ln_b - np.asarray(rho, dtype=float) * R

    rho_max = RHO_MAX
    while True:
        grid = _rho_grid(rho_max)
        res = maximize_1d(objective, Bracket(0.0, rho_max), grid=grid)
        if res.x < 0.99 * rho_max or rho_max >= RHO_EXTEND_CAP:
            break
        rho_max *= 8.0
    boundary = res.x >= 0.99 * RHO_MAX
    return max(res.value, 0.0), res.x, boundary


def _require_case(ch: ChannelSpec, cs: ConstraintSpec, q: float, r: float, name: str) -> None:
    if ch.q != q or cs.r != r:
        raise UnsupportedCaseError(
            f"{name} needs q={q}, r={r}; got q={ch.q}, r={cs.r}"
        )


def thm2_bound(ch: ChannelSpec, cs: ConstraintSpec, R: float, log_base: float = 2.0) -> RatePoint:
    """Laplace noise with the mean-absolute-value constraint."""
    _require_case(ch, cs, 1.0, 1.0, "thm2_bound")
    if not (R > 0.0):
        raise ValueError(f"rate must be positive, got {R}")
    nu_s = ch.nu * cs.s
    ln_b = math.log(log_base)
    E, rho, boundary = _sup_over_rho(lambda r_: _v_q1r1(nu_s, r_), R, ln_b)
    lam = thm2_lambda(nu_s, rho)
    branch = float(thm2_raw_inner(nu_s, rho, lam))
    if branch <= nu_s:
        lam_star, kap_star = float(lam), 1.0
    else:
        lam_star, kap_star = 1.0, 0.0
    return RatePoint(R, E, rho, lam_star, kap_star, boundary)


def thm3_bound(ch: ChannelSpec, cs: ConstraintSpec, R: float, log_base: float = 2.0) -> RatePoint:
    """Gaussian noise with the mean-absolute-value constraint."""
    _require_case(ch, cs, 2.0, 1.0, "thm3_bound")
    if not (R > 0.0):
        raise ValueError(f"rate must be positive, got {R}")
    ln_b = math.log(log_base)
    r_t = math.log(2.0 * math.sqrt(math.e) / math.pi) / ln_b
    if R <= r_t + TRANSITION_EPS:
        return RatePoint(R, math.inf, math.inf, 1.0, 1.0, True)
    E, rho, boundary = _sup_over_rho(lambda r_: _v_q2r1(ch.nu, cs.s, r_), R, ln_b)
    return RatePoint(R, E, rho, thm3_lambda(ch.nu, cs.s, rho), 1.0, boundary)


def thm4_bound(ch: ChannelSpec, cs: ConstraintSpec, R: float, log_base: float = 2.0) -> RatePoint:
    """Laplace noise with the mean-square constraint."""
    _require_case(ch, cs, 1.0, 2.0, "thm4_bound")
    if not (R > 0.0):
        raise ValueError(f"rate must be positive, got {R}")
    nu_s = ch.nu * cs.s
    ln_b = math.log(log_base)
    r_t = 0.5 * math.log(math.pi / math.e) / ln_b
    if R < r_t - TRANSITION_EPS:
        return RatePoint(R, math.inf, math.inf, 1.0, 1.0, True)
    if abs(R - r_t) <= TRANSITION_EPS:
        # The bound jumps from +inf to nu*s/ln b here; report the finite
        # right-limit value and flag the point.
        return RatePoint(R, nu_s / ln_b, math.inf, 1.0, 0.0, True)
    E, rho, boundary = _sup_over_rho(lambda r_: _v_q1r2(nu_s, r_), R, ln_b)
    (v1, lam1, kap1), (v2, lam2, kap2) = _thm4_branches(nu_s, rho)
    if float(v1) <= float(v2):
        lam_star, kap_star = float(lam1), float(kap1)
    else:
        lam_star, kap_star = float(lam2), float(kap2)
    return RatePoint(R, E, rho, lam_star, kap_star, boundary)


_BOUNDS = {"q1r1": thm2_bound, "q2r1": thm3_bound, "q1r2": thm4_bound}


def bound_for_case(case_id: str):
    try:
        return _BOUNDS[case_id]
    except KeyError:
        raise UnsupportedCaseError(f"unknown case {case_id!r}; expected one of {CASES}")


def transition_rate(case_id: str, log_base: float = 2.0) -> float:
    """Rate below which the bound is +inf (0 for the Laplace/abs case)."""
    ln_b = math.log(log_base)
    if case_id == "q1r1":
        return 0.0
    if case_id == "q2r1":
        return math.log(2.0 * math.sqrt(math.e) / math.pi) / ln_b
    if case_id == "q1r2":
        return 0.5 * math.log(math.pi / math.e) / ln_b
    raise UnsupportedCaseError(f"unknown case {case_id!r}")


def capacity_endpoint(
    case_id: str, ch: ChannelSpec, cs: ConstraintSpec, log_base: float = 2.0
) -> float:
    """Rate at which the closed-form bound reaches zero."""
    ln_b = math.log(log_base)
    nu, s = ch.nu, cs.s
    if case_id == "q1r1":
        _require_case(ch, cs, 1.0, 1.0, "capacity_endpoint[q1r1]")
        return math.log(1.0 + nu * s) / ln_b
    if case_id == "q2r1":
        _require_case(ch, cs, 2.0, 1.0, "capacity_endpoint[q2r1]")
        return (
            math.log(1.0 + s * math.sqrt(nu * math.pi)) + math.log(2.0 * math.sqrt(math.e) / math.pi)
        ) / ln_b
    if case_id == "q1r2":
        _require_case(ch, cs, 1.0, 2.0, "capacity_endpoint[q1r2]")
        return 0.5 * (math.log(1.0 + 0.5 * (nu * s) ** 2) + math.log(math.pi / math.e)) / ln_b
    raise UnsupportedCaseError(f"unknown case {case_id!r}; expected one of {CASES}")


def curve(
    case_id: str,
    ch: ChannelSpec,
    cs: ConstraintSpec,
    log_base: float,
    R_grid,
) -> BoundCurve:
    """Evaluate the case's bound on a strictly increasing positive rate grid."""
    R_grid = np.asarray(R_grid, dtype=float)
    if R_grid.ndim != 1 or R_grid.size < 1:
        raise ValueError("R_grid must be a nonempty 1-D vector")
    if np.any(R_grid <= 0.0) or np.any(np.diff(R_grid) <= 0.0):
        raise ValueError("R_grid must be positive and strictly increasing")
    bound = bound_for_case(case_id)
    points = tuple(bound(ch, cs, float(R), log_base) for R in R_grid)
    return BoundCurve(
        case_id=case_id,
        channel=ch,
        constraint=cs,
        log_base=log_base,
        points=points,
        R_transition=transition_rate(case_id, log_base),
        R_zero=capacity_endpoint(case_id, ch, cs, log_base),
    )


def find_zero_rate(
    case_id: str,
    ch: ChannelSpec,
    cs: ConstraintSpec,
    log_base: float = 2.0,
    tol: float = 1e-9,
) -> float:
    """Locate the curve's zero crossing by bisection on E(R) > 0.

    Independent of the closed-form endpoint: brackets by doubling the rate
    until the bound vanishes, then bisects.
    """
    bound = bound_for_case(case_id)
    lo = transition_rate(case_id, log_base) + 1e-6
    hi = max(2.0 * lo, 0.25)
    for _ in range(80):
        if bound(ch, cs, hi, log_base).E <= 1e-13:
            break
        hi *= 2.0
    else:
        raise NumericsError("failed to bracket the zero crossing")
    for _ in range(200):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if bound(ch, cs, mid, log_base).E > 1e-13:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
