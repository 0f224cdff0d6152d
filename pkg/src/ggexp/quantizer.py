"""Constructive quantization of a stepwise joint density into a joint type.

The pipeline takes a density that is piecewise constant in x (an input type
smeared over its lattice cells) with Lipschitz conditionals in y, replaces
each y-cell by the cell infimum, floors to the probability lattice, and
restores the lost mass on the diagonal so the x-marginal is preserved
exactly.  All cell masses are handled as integer multiples of 1/n.

Also houses the codeword quantizer, the power-constraint slack check, the
density-exponent closeness check for quantized vector pairs, and the
x*ln(x) envelope used throughout the slack bookkeeping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import ggd
from .ggd import ChannelSpec, ConstraintSpec, GGDist
from .method_of_types import JointTypeDist, LatticeSpec, TypeDist
from .numerics import gamma_fn

__all__ = [
    "LatticeHypothesisError",
    "GGDConditional",
    "TriangularConditional",
    "CallableConditional",
    "StepDensity",
    "QuantReport",
    "IneqCheck",
    "quantize_point",
    "check_type_constraint",
    "pdf_exponent_gap",
    "build_quantized_joint",
    "lemma11_inequalities",
    "xlogx_envelope",
]


class LatticeHypothesisError(ValueError):
    """(alpha, beta) outside the admissible region for the construction."""


def quantize_point(x, delta: float):
    """Nearest-lattice rounding with the half-up tie rule: delta*floor(x/delta + 1/2)."""
    if not (delta > 0.0):
        raise ValueError(f"lattice step must be positive, got {delta}")
    x = np.asarray(x, dtype=float)
    out = delta * np.floor(x / delta + 0.5)
    return float(out) if out.ndim == 0 else out


def check_type_constraint(
    xs, cs: ConstraintSpec, ls: LatticeSpec, eps: float
) -> tuple[bool, float]:
    """Slack of the power constraint after quantizing to the input lattice.

    Returns (ok, slack) with slack = (1/n) sum |x*|^r - s^r; the vector passes
    when slack <= eps.
    """
    xs = np.asarray(xs, dtype=float)
    quantized = quantize_point(xs, ls.delta_alpha)
    power = float(np.mean(np.abs(quantized) ** cs.r))
    slack = power - cs.s**cs.r
    return slack <= eps, slack


def _neg_log_density_rate(diff: np.ndarray, ch: ChannelSpec, log_base: float) -> float:
    """-(1/n) log_b of the product channel density for a noise vector."""
    n = diff.size
    ln_b = math.log(log_base)
    const = math.log(2.0 * gamma_fn(1.0 / ch.q) / (ch.q * ch.nu ** (1.0 / ch.q))) / ln_b
    return const + ch.nu / ln_b * float(np.mean(np.abs(diff) ** ch.q))


def pdf_exponent_gap(
    x, y, ch: ChannelSpec, ls: LatticeSpec, c_xy: float, log_base: float = 2.0
) -> tuple[float, float]:
    """Distance between the density exponents of a vector pair and its
    quantized version, with the closeness bound it must satisfy.

    The quantized pair must lie in a joint type with E|Y-X|^q <= c_xy.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be matching 1-D vectors")
    xq = quantize_point(x, ls.delta_alpha)
    yq = quantize_point(y, ls.delta_beta)
    moment = float(np.mean(np.abs(yq - xq) ** ch.q))
    if moment > c_xy + 1e-12:
        raise ValueError(
            f"quantized pair violates the moment precondition: {moment} > {c_xy}"
        )
    gap = abs(
        _neg_log_density_rate(y - x, ch, log_base) - _neg_log_density_rate(yq - xq, ch, log_base)
    )
    spread = ls.delta_alpha + ls.delta_beta
    bound = (
        ch.q
        * ch.nu
        / (2.0 * math.log(log_base))
        * spread
        * (c_xy ** (1.0 / ch.q) + 0.5 * spread) ** (ch.q - 1.0)
    )
    if gap > bound + 1e-12:
        raise AssertionError(f"exponent gap {gap} exceeds its bound {bound}")
    return gap, bound


# --- conditional densities ----------------------------------------------------
#
# A conditional is a unit-integral, K-Lipschitz density with a known mode.
# Unimodality makes cell infima exact: the infimum over an interval is the
# smaller endpoint value.  Arbitrary callables fall back to a valid surrogate
# (endpoint minimum lowered by K * half cell width), which only loosens the
# construction's slack.


class GGDConditional:
    """Generalized Gaussian conditional (Laplace for shape 1)."""

    exact_inf = True

    def __init__(self, shape: float, rate: float, center: float = 0.0) -> None:
        self.dist = GGDist(shape=shape, rate=rate, shift=center)
        self.mode = center
        self.peak = self.dist.norm_const
        if shape == 1.0:
            self.lipschitz = rate * self.peak
        else:
            self.lipschitz = ggd.lipschitz_K(ChannelSpec(q=shape, nu=rate))

    def pdf(self, y):
        return ggd.pdf(self.dist, y)

    def cell_inf(self, lo: float, hi: float) -> float:
        return min(float(self.pdf(lo)), float(self.pdf(hi)))

    def support_radius(self, threshold: float) -> float:
        if threshold >= self.peak:
            return 0.0
        d = self.dist
        return (math.log(self.peak / threshold) / d.rate) ** (1.0 / d.shape)

    def abs_moment(self, m: float, center: float | None = None) -> float:
        return ggd.abs_moment(self.dist, m, center)

    def entropy_nats(self) -> float:
        """Differential entropy -int f ln f."""
        d = self.dist
        return 1.0 / d.shape - math.log(self.peak)


class TriangularConditional:
    """Symmetric triangle of half-width w: peak 1/w, Lipschitz constant 1/w^2."""

    exact_inf = True

    def __init__(self, center: float, half_width: float) -> None:
        if not (half_width > 0.0):
            raise ValueError("half_width must be positive")
        self.center = center
        self.half_width = half_width
        self.mode = center
        self.peak = 1.0 / half_width
        self.lipschitz = 1.0 / half_width**2

    def pdf(self, y):
        y = np.asarray(y, dtype=float)
        u = np.abs(y - self.center)
        out = np.maximum(0.0, (1.0 - u / self.half_width) / self.half_width)
        return float(out) if out.ndim == 0 else out

    def cell_inf(self, lo: float, hi: float) -> float:
        return min(float(self.pdf(lo)), float(self.pdf(hi)))

    def support_radius(self, threshold: float) -> float:
        return self.half_width

    def abs_moment(self, m: float, center: float | None = None) -> float:
        if center is None or center == self.center:
            w = self.half_width
            return 2.0 * w**m / ((m + 1.0) * (m + 2.0))
        nodes, weights = np.polynomial.legendre.leggauss(64)
        lo, hi = self.center - self.half_width, self.center + self.half_width
        total = 0.0
        for a, b in _split_segments(lo, hi, [self.center, center]):
            ys = 0.5 * (b - a) * nodes + 0.5 * (a + b)
            total += 0.5 * (b - a) * float(np.sum(weights * self.pdf(ys) * np.abs(ys - center) ** m))
        return total

    def entropy_nats(self) -> float:
        return 0.5 + math.log(self.half_width)


class CallableConditional:
    """Arbitrary class member given as a callable; cell infima use the
    Lipschitz lower envelope (endpoint minimum minus K * half width)."""

    exact_inf = False

    def __init__(self, fn, lipschitz: float, mode: float, radius_fn=None) -> None:
        self.fn = fn
        self.lipschitz = lipschitz
        self.mode = mode
        self.peak = float(fn(mode))
        self._radius_fn = radius_fn

    def pdf(self, y):
        y = np.asarray(y, dtype=float)
        out = np.asarray(self.fn(y), dtype=float)
        return float(out) if out.ndim == 0 else out

    def cell_inf(self, lo: float, hi: float) -> float:
        base = min(float(self.pdf(lo)), float(self.pdf(hi)))
        return max(0.0, base - 0.5 * self.lipschitz * (hi - lo))

    def support_radius(self, threshold: float) -> float:
        if self._radius_fn is not None:
            return float(self._radius_fn(threshold))
        # Worst case for a unit-integral K-Lipschitz bump.
        return 2.0 / max(threshold, 1e-300)

    def abs_moment(self, m: float, center: float | None = None) -> float:
        c = self.mode if center is None else center
        radius = self.support_radius(1e-30)
        lo, hi = self.mode - radius, self.mode + radius
        nodes, weights = np.polynomial.legendre.leggauss(64)
        total = 0.0
        for a, b in _split_segments(lo, hi, [self.mode, c]):
            ys = 0.5 * (b - a) * nodes + 0.5 * (a + b)
            total += 0.5 * (b - a) * float(np.sum(weights * self.pdf(ys) * np.abs(ys - c) ** m))
        return total

    def entropy_nats(self) -> float:
        radius = self.support_radius(1e-30)
        return -_integrate_plogp(self.pdf, self.mode - radius, self.mode + radius, [self.mode])


def _split_segments(lo: float, hi: float, breaks) -> list[tuple[float, float]]:
    pts = sorted({lo, hi, *(b for b in breaks if lo < b < hi)})
    return [(pts[i], pts[i + 1]) for i in range(len(pts) - 1)]


def _integrate_plogp(pdf, lo: float, hi: float, breaks, order: int = 48) -> float:
    """int f ln f over [lo, hi], splitting at kink locations."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    total = 0.0
    for a, b in _split_segments(lo, hi, breaks):
        ys = 0.5 * (b - a) * nodes + 0.5 * (a + b)
        f = np.asarray(pdf(ys), dtype=float)
        term = np.where(f > 0.0, f * np.log(np.maximum(f, 1e-300)), 0.0)
        total += 0.5 * (b - a) * float(np.sum(weights * term))
    return total


@dataclass(frozen=True)
class StepDensity:
    """Joint density: input type smeared over x-cells, Lipschitz conditionals."""

    grid: LatticeSpec
    px: TypeDist
    conditionals: tuple
    K: float

    def __post_init__(self) -> None:
        if len(self.conditionals) != len(self.px.entries):
            raise ValueError("need one conditional per input letter")
        if self.px.step != self.grid.delta_alpha:
            raise ValueError("input type must live on the grid's input lattice")
        for cond in self.conditionals:
            if cond.lipschitz > self.K * (1.0 + 1e-9):
                raise ValueError("conditional exceeds the class Lipschitz constant")
            if cond.peak > math.sqrt(self.K) * (1.0 + 1e-9):
                raise ValueError("conditional peak exceeds sqrt(K)")

    def mixture_moment(self, m: float, center_fn) -> float:
        """E |Y - center_fn(x)|^m under the joint density."""
        total = 0.0
        for (xi, cnt), cond in zip(self.px.entries, self.conditionals):
            x = xi * self.px.step
            total += cnt / self.px.n * cond.abs_moment(m, center_fn(x))
        return total

    def y_pdf(self, y):
        y = np.asarray(y, dtype=float)
        out = np.zeros_like(y)
        for (xi, cnt), cond in zip(self.px.entries, self.conditionals):
            out = out + cnt / self.px.n * cond.pdf(y)
        return out


@dataclass(frozen=True)
class QuantReport:
    """Slack constants and bounds attached to one constructed joint type."""

    h: float
    h1: float
    p1: float
    delta: float
    delta1: float
    c4: float
    c5: float
    c6: float
    p1_bound: float
    slack_joint_entropy_cont: float
    slack_joint_entropy_disc: float
    slack_marg_entropy_cont: float
    slack_marg_entropy_disc: float
    slack_moment_quant: float
    slack_moment_deficit: float
    validity_ok: bool
    # Floored cell masses (integer multiples of 1/n) before the diagonal
    # deficit restores the marginal; kept for the chain-step checks.
    floored: tuple = field(repr=False, default=())


@dataclass(frozen=True)
class IneqCheck:
    name: str
    lhs: float
    rhs: float
    slack: float
    ok: bool


def _hypothesis_check(ls: LatticeSpec, r: float) -> None:
    if not (0.0 < ls.alpha < r / (1.0 + 2.0 * r)):
        raise LatticeHypothesisError(
            f"alpha={ls.alpha} outside (0, {r / (1 + 2 * r)}) for r={r}"
        )
    hi = r / (1.0 + r) * (1.0 - ls.alpha)
    if not (ls.alpha < ls.beta < hi):
        raise LatticeHypothesisError(f"beta={ls.beta} outside ({ls.alpha}, {hi})")


def build_quantized_joint(
    sd: StepDensity,
    p: float,
    c_x: float,
    c_y: float,
    c_xy: float,
    r: float,
    q: float,
    ls: LatticeSpec | None = None,
    log_base: float = 2.0,
) -> tuple[JointTypeDist, QuantReport]:
    """Quantize the step density into a joint type with x-marginal preserved.

    Per x-letter: replace the conditional by its per-cell infimum, floor to
    the probability lattice (integer multiples of 1/n by the lattice product
    rule), and place the column's deficit on the diagonal cell y = Q_beta(x).
    Moment preconditions (E|X|^r <= c_x, E|Y|^p <= c_y, E|Y-X|^q <= c_xy) and
    the (alpha, beta) hypotheses are enforced.
    """
    if ls is not None and ls != sd.grid:
        raise ValueError("explicit lattice disagrees with the density's grid")
    ls = sd.grid
    _hypothesis_check(ls, r)
    n = ls.n
    da, db, dg = ls.delta_alpha, ls.delta_beta, ls.delta_gamma

    if sd.px.power(r) > c_x + 1e-12:
        raise ValueError(f"E|X|^r = {sd.px.power(r)} exceeds c_x = {c_x}")
    ey_p = sd.mixture_moment(p, lambda x: 0.0)
    if ey_p > c_y + 1e-9:
        raise ValueError(f"E|Y|^p = {ey_p} exceeds c_y = {c_y}")
    eyx_q = sd.mixture_moment(q, lambda x: x)
    if eyx_q > c_xy + 1e-9:
        raise ValueError(f"E|Y-X|^q = {eyx_q} exceeds c_xy = {c_xy}")

    floored: dict[tuple[int, int], int] = {}
    cells: dict[tuple[int, int], int] = {}
    deficit_total = 0
    for (xi, cnt), cond in zip(sd.px.entries, sd.conditionals):
        x = xi * da
        scale = cnt / n / da  # density level multiplier P_X(x)/delta_alpha
        radius = cond.support_radius(dg / scale) + db
        j_lo = int(math.floor((cond.mode - radius) / db - 0.5))
        j_hi = int(math.ceil((cond.mode + radius) / db + 0.5))
        used = 0
        for j in range(j_lo, j_hi + 1):
            lo, hi = (j - 0.5) * db, (j + 0.5) * db
            k = int(math.floor(scale * cond.cell_inf(lo, hi) / dg))
            if k > 0:
                floored[(xi, j)] = k
                cells[(xi, j)] = cells.get((xi, j), 0) + k
                used += k
        if used > cnt:
            raise AssertionError("column mass exceeded its type mass; flooring bug")
        deficit = cnt - used
        deficit_total += deficit
        if deficit > 0:
            j_diag = int(math.floor(x / db + 0.5))
            cells[(xi, j_diag)] = cells.get((xi, j_diag), 0) + deficit

    jt = JointTypeDist(
        n, da, db, tuple((i, j, c) for (i, j), c in sorted(cells.items()))
    )
    marg = {i: c for i, c in ((e[0], e[1]) for e in jt.x_marginal().entries)}
    if marg != dict(sd.px.entries):
        raise AssertionError("x-marginal not preserved; construction bug")

    report = _make_report(
        sd,
        p,
        c_x,
        c_y,
        c_xy,
        r,
        q,
        deficit_total / n,
        log_base,
        tuple((i, j, c) for (i, j), c in sorted(floored.items())),
    )
    return jt, report


def _make_report(
    sd: StepDensity,
    p: float,
    c_x: float,
    c_y: float,
    c_xy: float,
    r: float,
    q: float,
    p1: float,
    log_base: float,
    floored: tuple = (),
) -> QuantReport:
    ls = sd.grid
    n, K = ls.n, sd.K
    ln_b = math.log(log_base)
    delta = min(ls.beta, 1.0 - ls.beta) - ls.alpha
    delta1 = min(ls.beta, (1.0 - ls.alpha) * r / (1.0 + r) - ls.beta)
    h = (K + 1.0) * n**-delta
    h1 = (K + (4.0 * c_x ** (1.0 / r) + 1.0) ** (r / (1.0 + r))) * n**-delta1

    c_x_joint = (2.0 ** (p - 1.0) * c_x + 0.5 / (p + 1.0)) ** (p / r)
    c4 = (2.0 * gamma_fn(1.0 / p)) ** 2 * (p ** (1.0 - p) * math.e) ** (2.0 / p) * (
        c_x_joint * c_y
    ) ** (1.0 / p)
    c5 = (
        math.pi
        * 2.0 ** max(0.0, 1.0 - 2.0 / p)
        * (0.5 * (p + 2.0) * (c_x_joint + c_y)) ** (2.0 / p)
    )
    c6 = (2.0**p * (p + 1.0) * c_y) ** (1.0 / (p + 1.0))

    mass_scale = (c5 * h) ** (p / (p + 2.0))
    validity_ok = h <= 1.0 / max(math.e, c5 * math.e ** ((p + 2.0) / p))
    half_step = 0.5 * ls.delta_beta
    return QuantReport(
        h=h,
        h1=h1,
        p1=p1,
        delta=delta,
        delta1=delta1,
        c4=c4,
        c5=c5,
        c6=c6,
        p1_bound=2.0 * mass_scale,
        slack_joint_entropy_cont=mass_scale * math.log(max(1.0, c4) / (c5 * h * h)) / ln_b,
        slack_joint_entropy_disc=4.0 * mass_scale * math.log(n) / ln_b,
        slack_marg_entropy_cont=c6
        * h1 ** (p / (p + 1.0))
        * max(math.log(1.0 / h1), math.log(math.e * math.sqrt(K)))
        / ln_b,
        slack_marg_entropy_disc=2.0 * mass_scale * math.log(n) / ln_b,
        slack_moment_quant=half_step
        * q
        * 2.0 ** ((q - 1.0) ** 2 / q)
        * (c_xy + half_step**q) ** ((q - 1.0) / q),
        slack_moment_deficit=mass_scale * 2.0 ** (1.0 - q) * ls.delta_beta**q,
        validity_ok=validity_ok,
        floored=floored,
    )


def lemma11_inequalities(
    sd: StepDensity,
    jt: JointTypeDist,
    report: QuantReport,
    q: float,
    log_base: float = 2.0,
) -> list[IneqCheck]:
    """Check the six chain-step slack inequalities of the construction, plus
    the three combined continuous-vs-discrete statements they imply.

    Every check is of the form lhs <= slack (the lhs is the increase/decrease
    the chain step may cause; slack is the printed bound).
    """
    ls = sd.grid
    n = ls.n
    ln_b = math.log(log_base)
    da, db = ls.delta_alpha, ls.delta_beta

    # Continuous sides.
    joint_plogp = 0.0  # int p_XY log_b p_XY
    for (xi, cnt), cond in zip(sd.px.entries, sd.conditionals):
        w = cnt / n
        joint_plogp += w * (-cond.entropy_nats() + math.log(w / da)) / ln_b
    eyx_q_cont = sd.mixture_moment(q, lambda x: x)

    radius = max(
        abs(xi * da) + cond.support_radius(1e-30)
        for (xi, _), cond in zip(sd.px.entries, sd.conditionals)
    )
    kinks = [xi * da for xi, _ in sd.px.entries]
    marg_plogp = _integrate_plogp(sd.y_pdf, -radius, radius, kinks) / ln_b

    def disc_entropy(entries, area: float) -> float:
        w = np.array([c for *_, c in entries], dtype=float) / n
        return float(np.sum(w * np.log(w / area))) / ln_b

    def disc_moment(entries) -> float:
        return sum(c / n * abs(j * db - i * da) ** q for i, j, c in entries)

    def y_marg(entries) -> list[tuple[int, int]]:
        acc: dict[int, int] = {}
        for _, j, c in entries:
            acc[j] = acc.get(j, 0) + c
        return sorted(acc.items())

    hat = report.floored
    joint_disc = disc_entropy(jt.entries, da * db)
    joint_hat = disc_entropy(hat, da * db)
    marg_disc = disc_entropy([(j, c) for j, c in y_marg(jt.entries)], db)
    marg_hat = disc_entropy([(j, c) for j, c in y_marg(hat)], db)
    moment_disc = disc_moment(jt.entries)
    moment_hat = disc_moment(hat)

    checks = []

    def add(name: str, lhs: float, slack: float) -> None:
        checks.append(IneqCheck(name, lhs, slack, slack, lhs <= slack + 1e-9))

    # Flooring may raise the joint p log p integral by at most the continuous
    # slack; restoring the deficit raises the discrete sum by at most the
    # discrete slack.  Same split for the moment and (reversed) the marginal.
    add("joint_entropy_flooring", joint_hat - joint_plogp, report.slack_joint_entropy_cont)
    add("joint_entropy_deficit", joint_disc - joint_hat, report.slack_joint_entropy_disc)
    add("moment_flooring", moment_hat - eyx_q_cont, report.slack_moment_quant)
    add("moment_deficit", moment_disc - moment_hat, report.slack_moment_deficit)
    add("marginal_entropy_flooring", marg_plogp - marg_hat, report.slack_marg_entropy_cont)
    add("marginal_entropy_deficit", marg_hat - marg_disc, report.slack_marg_entropy_disc)

    # Combined statements (continuous side vs final joint type).
    add(
        "joint_entropy_combined",
        joint_disc - joint_plogp,
        report.slack_joint_entropy_cont + report.slack_joint_entropy_disc,
    )
    add(
        "moment_combined",
        moment_disc - eyx_q_cont,
        report.slack_moment_quant + report.slack_moment_deficit,
    )
    add(
        "marginal_entropy_combined",
        marg_plogp - marg_disc,
        report.slack_marg_entropy_cont + report.slack_marg_entropy_disc,
    )
    return checks


def dominance_check(sd: StepDensity, report: QuantReport) -> tuple[float, float]:
    """Pointwise dominance of the floored density: returns the worst
    (p_hat - p) over cells (must be <= 0) and the worst (p - p_hat) - h(x)
    over cells (must be <= 0, the per-column gap bound)."""
    ls = sd.grid
    n, da, db, dg = ls.n, ls.delta_alpha, ls.delta_beta, ls.delta_gamma
    by_letter = {xi: (cnt, cond) for (xi, cnt), cond in zip(sd.px.entries, sd.conditionals)}
    worst_dom = -math.inf
    worst_gap = -math.inf
    cells = {(i, j): c for i, j, c in report.floored}
    for (xi, (cnt, cond)) in by_letter.items():
        scale = cnt / n / da
        h_x = sd.K * (cnt / n) / da * db + dg
        if not getattr(cond, "exact_inf", False):
            h_x += 0.5 * sd.K * (cnt / n) / da * db
        radius = cond.support_radius(dg / scale) + db
        j_lo = int(math.floor((cond.mode - radius) / db - 0.5))
        j_hi = int(math.ceil((cond.mode + radius) / db + 0.5))
        for j in range(j_lo, j_hi + 1):
            lo, hi = (j - 0.5) * db, (j + 0.5) * db
            p_hat = cells.get((xi, j), 0) * dg
            inf_val = scale * cond.cell_inf(lo, hi)
            sup_val = scale * max(
                float(cond.pdf(lo)),
                float(cond.pdf(hi)),
                float(cond.pdf(cond.mode)) if lo <= cond.mode < hi else 0.0,
            )
            worst_dom = max(worst_dom, p_hat - inf_val)
            worst_gap = max(worst_gap, (sup_val - p_hat) - h_x)
    return worst_dom, worst_gap


def xlogx_envelope(t: float, t1: float) -> tuple[float, float, float]:
    """Bounds on the increment of f(x) = x ln x: for 0 < t <= 1/e, t1 > 0,
    t ln t <= f(t1 + t) - f(t1) <= t ln max(1/t, (t1 + t) e)."""
    if not (0.0 < t <= 1.0 / math.e):
        raise ValueError(f"t must lie in (0, 1/e], got {t}")
    if not (t1 > 0.0):
        raise ValueError(f"t1 must be positive, got {t1}")
    f = lambda x: x * math.log(x)
    lower = t * math.log(t)
    mid = f(t1 + t) - f(t1)
    upper = t * math.log(max(1.0 / t, (t1 + t) * math.e))
    if not (lower <= mid + 1e-12 and mid <= upper + 1e-12):
        raise AssertionError(f"envelope ordering violated: {lower}, {mid}, {upper}")
    return lower, mid, upper
