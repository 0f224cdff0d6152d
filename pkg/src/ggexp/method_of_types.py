"""Lattice alphabets, constrained type enumeration at small block lengths,
and the counting bounds they must satisfy.

Letters live on one-dimensional lattices with steps that shrink with the
block length n.  All letters are stored as exact integer lattice indices so
type identity, marginals, and conditional class sizes stay exact; the float
letter value is ``index * step`` and is derived on demand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

__all__ = [
    "LatticeSpec",
    "TypeDist",
    "JointTypeDist",
    "MoTConstants",
    "EnumerationBudgetError",
    "constrained_alphabet",
    "enumerate_types",
    "type_class_size",
    "conditional_type_class_size",
    "support_bounds",
    "unit_ball_volume",
    "sigma_support_constant",
]

ENUMERATION_BUDGET = 10**7


class EnumerationBudgetError(RuntimeError):
    """Enumeration would exceed the composition budget."""


@dataclass(frozen=True)
class LatticeSpec:
    """Input/output/probability lattice steps n^-alpha, n^-beta, n^-gamma."""

    n: int
    alpha: float
    beta: float
    gamma: float

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"block length must be >= 1, got {self.n}")
        for name, v in (("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma)):
            if not (0.0 < v < 1.0):
                raise ValueError(f"{name} must lie in (0, 1), got {v}")
        if abs(self.alpha + self.beta + self.gamma - 1.0) > 1e-12:
            raise ValueError("alpha + beta + gamma must equal 1")

    @property
    def delta_alpha(self) -> float:
        return float(self.n) ** -self.alpha

    @property
    def delta_beta(self) -> float:
        return float(self.n) ** -self.beta

    @property
    def delta_gamma(self) -> float:
        return float(self.n) ** -self.gamma


@dataclass(frozen=True)
class TypeDist:
    """Type with denominator n over lattice letters (integer indices)."""

    n: int
    step: float
    entries: tuple[tuple[int, int], ...]  # (letter index, count), count > 0

    def __post_init__(self) -> None:
        if any(c <= 0 for _, c in self.entries):
            raise ValueError("counts must be positive")
        if sum(c for _, c in self.entries) != self.n:
            raise ValueError("counts must sum to n")
        if len({i for i, _ in self.entries}) != len(self.entries):
            raise ValueError("duplicate letters")

    @property
    def counts(self) -> np.ndarray:
        return np.array([c for _, c in self.entries], dtype=np.int64)

    @property
    def letters(self) -> np.ndarray:
        return np.array([i for i, _ in self.entries], dtype=np.int64) * self.step

    def support_size(self) -> int:
        return len(self.entries)

    def power(self, p: float) -> float:
        return float(np.sum(self.counts / self.n * np.abs(self.letters) ** p))

    def entropy(self, log_base: float = 2.0) -> float:
        w = self.counts / self.n
        return float(-np.sum(w * np.log(w)) / math.log(log_base))


@dataclass(frozen=True)
class JointTypeDist:
    """Joint type over an (x, y) lattice pair, counts indexed by letter index."""

    n: int
    x_step: float
    y_step: float
    entries: tuple[tuple[int, int, int], ...]  # (x index, y index, count)

    def __post_init__(self) -> None:
        if any(c <= 0 for _, _, c in self.entries):
            raise ValueError("counts must be positive")
        if sum(c for _, _, c in self.entries) != self.n:
            raise ValueError("counts must sum to n")
        if len({(i, j) for i, j, _ in self.entries}) != len(self.entries):
            raise ValueError("duplicate cells")

    def support_size(self) -> int:
        return len(self.entries)

    def x_marginal(self) -> TypeDist:
        acc: dict[int, int] = {}
        for i, _, c in self.entries:
            acc[i] = acc.get(i, 0) + c
        return TypeDist(self.n, self.x_step, tuple(sorted(acc.items())))

    def y_marginal(self) -> TypeDist:
        acc: dict[int, int] = {}
        for _, j, c in self.entries:
            acc[j] = acc.get(j, 0) + c
        return TypeDist(self.n, self.y_step, tuple(sorted(acc.items())))

    def entropy(self, log_base: float = 2.0) -> float:
        w = np.array([c for _, _, c in self.entries], dtype=float) / self.n
        return float(-np.sum(w * np.log(w)) / math.log(log_base))

    def moment(self, fn) -> float:
        """E fn(x, y) over the joint type (letter values, not indices)."""
        total = 0.0
        for i, j, c in self.entries:
            total += c / self.n * fn(i * self.x_step, j * self.y_step)
        return total


@dataclass(frozen=True)
class MoTConstants:
    c1: float
    c2: float
    c3: float
    sigma: float
    ball_vol: float


def unit_ball_volume(k: int) -> float:
    return math.pi ** (k / 2.0) / math.gamma(k / 2.0 + 1.0)


def sigma_support_constant(k: int, p: float, c: float) -> float:
    """Support-size constant of the k-dimensional joint-type bound."""
    m1 = min(k / 4.0, math.sqrt(k / 12.0))
    m2 = max(1.0, k ** (0.5 - 1.0 / p))
    base = (k + 1.0) / k * (m2 * c ** (1.0 / p) + m1)
    return unit_ball_volume(k) ** (p / (k + p)) * base ** (k * p / (k + p))


def constrained_alphabet(ls: LatticeSpec, c_x: float, p: float) -> np.ndarray:
    """Input-lattice letter indices usable by a constrained type.

    A letter carrying mass >= 1/n under E|X|^p <= c_x must satisfy
    |i * step| <= (n c_x)^(1/p).
    """
    if not (c_x >= 0.0):
        raise ValueError(f"c_x must be nonnegative, got {c_x}")
    if not (p >= 1.0):
        raise ValueError(f"p must be >= 1, got {p}")
    i_max = int(math.floor((ls.n * c_x) ** (1.0 / p) / ls.delta_alpha + 1e-12))
    size = 2 * i_max + 1
    if size > ENUMERATION_BUDGET:
        raise EnumerationBudgetError(f"alphabet of {size} letters exceeds the budget")
    return np.arange(-i_max, i_max + 1, dtype=np.int64)


def alphabet_size_bound(ls: LatticeSpec, c_x: float, p: float) -> float:
    """Printed alphabet-size bound 2 c^(1/p) n^(1/p + alpha) + 1."""
    return 2.0 * c_x ** (1.0 / p) * ls.n ** (1.0 / p + ls.alpha) + 1.0


def _compositions(
    total: int, letters: np.ndarray, weights: np.ndarray, cap: float, budget: list[int]
) -> Iterator[list[int]]:
    """All count vectors over ``letters`` summing to ``total`` with
    sum(count * weight) <= cap; prunes on the running weighted sum."""
    k = len(letters)

    def rec(idx: int, remaining: int, used: float, prefix: list[int]) -> Iterator[list[int]]:
        budget[0] += 1
        if budget[0] > ENUMERATION_BUDGET:
            raise EnumerationBudgetError("composition budget exceeded")
        if idx == k - 1:
            if used + remaining * weights[idx] <= cap + 1e-12:
                yield prefix + [remaining]
            return
        w = weights[idx]
        for c in range(remaining + 1):
            u = used + c * w
            if u > cap + 1e-12:
                break
            yield from rec(idx + 1, remaining - c, u, prefix + [c])

    yield from rec(0, total, 0.0, [])


def enumerate_types(
    letters: Iterable[int] | np.ndarray,
    n: int,
    ls: LatticeSpec,
    p: float,
    c_x: float,
) -> list[TypeDist]:
    """Exhaustive constrained types of denominator n over lattice letters.

    ``letters`` are integer lattice indices on the input lattice of ``ls``.
    The constraint is sum (count/n) |i*step|^p <= c_x.
    """
    if n != ls.n:
        raise ValueError(f"denominator {n} disagrees with lattice block length {ls.n}")
    idx = np.asarray(list(letters), dtype=np.int64)
    weights = np.abs(idx * ls.delta_alpha) ** p
    cap = n * c_x
    budget = [0]
    out = []
    for counts in _compositions(n, idx, weights, cap, budget):
        entries = tuple((int(i), int(c)) for i, c in zip(idx, counts) if c > 0)
        out.append(TypeDist(n, ls.delta_alpha, entries))
    return out


def number_of_types_bounds(ls: LatticeSpec, p: float, c_x: float) -> tuple[float, float]:
    """(log of) the two printed bounds on the number of constrained types.

    Returns natural logs of the alphabet-exponent bound
    (n+1)^((2 c^(1/p)+1) n^(1/p+alpha)) and the support-exponent bound
    ((n+1) c)^(c~ n^((1+p alpha)/(1+p))).
    """
    n = ls.n
    crude = (2.0 * c_x ** (1.0 / p) + 1.0) * n ** (1.0 / p + ls.alpha) * math.log(n + 1.0)
    c = (2.0 * c_x ** (1.0 / p) + 1.0) ** (1.0 / (1.0 + 1.0 / p + ls.alpha))
    c_tilde = (1.0 + 1.0 / p + ls.alpha) * (4.0 * c_x ** (1.0 / p) + 1.0) ** (p / (1.0 + p))
    improved = c_tilde * n ** ((1.0 + p * ls.alpha) / (1.0 + p)) * math.log((n + 1.0) * c)
    return crude, improved


def _log_multinomial(counts: np.ndarray) -> float:
    n = int(counts.sum())
    return math.lgamma(n + 1.0) - sum(math.lgamma(int(c) + 1.0) for c in counts)


def type_class_size(t: TypeDist | JointTypeDist, log_base: float = 2.0) -> tuple[int, float]:
    """Exact multinomial size of the type class and its log.

    Asserts the entropy sandwich
    (n+1)^-|S| * b^(nH) <= |T| <= b^(nH).
    """
    if isinstance(t, JointTypeDist):
        counts = np.array([c for _, _, c in t.entries], dtype=np.int64)
    else:
        counts = t.counts
    n = t.n
    exact = math.factorial(n)
    for c in counts:
        exact //= math.factorial(int(c))
    ln_b = math.log(log_base)
    log_size = _log_multinomial(counts) / ln_b
    nH = n * t.entropy(log_base)
    supp = len(counts)
    lo = nH - supp * math.log(n + 1.0) / ln_b
    if not (lo - 1e-9 <= log_size <= nH + 1e-9):
        raise AssertionError(
            f"type-class sandwich violated: {lo} <= {log_size} <= {nH} fails"
        )
    return exact, log_size


def conditional_type_class_size(jt: JointTypeDist, given: str = "y") -> int:
    """Exact size of the conditional type class given a marginal sequence.

    ``given='y'`` counts sequences x with (x, y) in the joint class for a
    fixed y of the y-marginal type; it equals |T(P_XY)| / |T(P_Y)| and is
    computed as a product of per-letter multinomials (an exact integer).
    """
    if given not in ("x", "y"):
        raise ValueError(f"given must be 'x' or 'y', got {given!r}")
    cond_axis = 1 if given == "y" else 0
    groups: dict[int, list[int]] = {}
    for entry in jt.entries:
        key = entry[cond_axis]
        groups.setdefault(key, []).append(entry[2])
    size = 1
    for counts in groups.values():
        block = math.factorial(sum(counts))
        for c in counts:
            block //= math.factorial(c)
        size *= block
    joint, _ = type_class_size(jt)
    marg, _ = type_class_size(jt.y_marginal() if given == "y" else jt.x_marginal())
    if joint % marg != 0 or joint // marg != size:
        raise AssertionError("conditional class size disagrees with the multinomial ratio")
    return size


def conditional_sandwich(
    jt: JointTypeDist, given: str, p: float, c_x: float, c_y: float, log_base: float = 2.0
) -> tuple[float, float, float]:
    """(lower, value, upper) of the conditional-class log-size sandwich.

    Lower slack uses the joint-support constant; upper slack the conditioning
    marginal's support constant.
    """
    n = jt.n
    ln_fac = math.log(n + 1.0) / math.log(log_base)
    consts = support_bounds(jt, p, c_x, c_y, check=False)
    size = conditional_type_class_size(jt, given)
    log_size = math.log(size) / math.log(log_base) / n
    h_joint = jt.entropy(log_base)
    gamma = 1.0 - _lattice_alpha(jt) - _lattice_beta(jt)
    if given == "y":
        h_cond = h_joint - jt.y_marginal().entropy(log_base)
        upper_c, upper_exp = consts.c3, (1.0 - _lattice_beta(jt)) * p / (1.0 + p)
    else:
        h_cond = h_joint - jt.x_marginal().entropy(log_base)
        upper_c, upper_exp = consts.c2, (1.0 - _lattice_alpha(jt)) * p / (1.0 + p)
    lower = h_cond - consts.c1 * ln_fac / n ** (gamma * p / (2.0 + p))
    upper = h_cond + upper_c * ln_fac / n ** upper_exp
    return lower, log_size, upper


def _lattice_alpha(jt: JointTypeDist) -> float:
    return -math.log(jt.x_step) / math.log(jt.n) if jt.n > 1 else 0.5


def _lattice_beta(jt: JointTypeDist) -> float:
    return -math.log(jt.y_step) / math.log(jt.n) if jt.n > 1 else 0.5


def support_bounds(
    obj: TypeDist | JointTypeDist,
    p: float,
    c_x: float,
    c_y: float | None = None,
    check: bool = True,
) -> MoTConstants:
    """Support-size constants, asserting the printed bounds when ``check``.

    For a joint type both marginal constraints are required; for a marginal
    type only ``c_x`` is used.
    """
    if isinstance(obj, JointTypeDist):
        if c_y is None:
            raise ValueError("joint types need both moment caps")
        n = obj.n
        alpha, beta = _lattice_alpha(obj), _lattice_beta(obj)
        pref = 2.0 ** max(0.0, 0.5 - 1.0 / p)
        c1 = (
            1.5 * math.sqrt(math.pi) * (pref * (c_x + c_y) ** (1.0 / p) + 1.0 / math.sqrt(6.0))
        ) ** (2.0 * p / (2.0 + p))
        c2 = (4.0 * c_x ** (1.0 / p) + 1.0) ** (p / (1.0 + p))
        c3 = (4.0 * c_y ** (1.0 / p) + 1.0) ** (p / (1.0 + p))
        sigma = sigma_support_constant(2, p, c_x + c_y)
        consts = MoTConstants(c1, c2, c3, sigma, unit_ball_volume(2))
        if check:
            checks = [
                (obj.support_size(), c1 * n ** ((2.0 + p * (alpha + beta)) / (2.0 + p))),
                (obj.x_marginal().support_size(), c2 * n ** ((1.0 + p * alpha) / (1.0 + p))),
                (obj.y_marginal().support_size(), c3 * n ** ((1.0 + p * beta) / (1.0 + p))),
                (obj.support_size(), sigma * n ** ((2.0 + p * (alpha + beta)) / (2.0 + p))),
            ]
            for lhs, rhs in checks:
                if lhs > rhs + 1e-9:
                    raise AssertionError(f"support bound violated: {lhs} > {rhs}")
        return consts

    n = obj.n
    alpha = -math.log(obj.step) / math.log(n) if n > 1 else 0.5
    c2 = (4.0 * c_x ** (1.0 / p) + 1.0) ** (p / (1.0 + p))
    sigma = sigma_support_constant(1, p, c_x)
    consts = MoTConstants(math.nan, c2, math.nan, sigma, unit_ball_volume(1))
    if check:
        bound = min(c2, sigma) * n ** ((1.0 + p * alpha) / (1.0 + p))
        if obj.support_size() > bound + 1e-9:
            raise AssertionError(
                f"support bound violated: {obj.support_size()} > {bound}"
            )
    return consts
