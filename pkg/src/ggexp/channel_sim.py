"""Monte Carlo block-error estimation over the generalized Gaussian channel
with the q-norm maximum-likelihood decoder.

Trials are split into fixed-size batches, one counter-based substream per
batch, and error counts are merged by integer addition, so a given seed
reproduces bit-identically under any worker count (``GGEXP_THREADS`` caps
the pool).  An erasure never occurs with closed ML ties; a tie resolves to
the lowest message index, and duplicate codewords are absorbed by the
lowest-index copy.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import ggd
from ._kernels import decode_batch
from .ggd import ChannelSpec, ConstraintSpec

__all__ = [
    "Codebook",
    "SimResult",
    "make_codebook",
    "ml_decode",
    "estimate_error",
    "converse_gap",
]

BATCH_SIZE = 1 << 16
WILSON_Z99 = 2.5758293035489004  # 99.5th normal percentile (two-sided 99%)


@dataclass(frozen=True)
class Codebook:
    n: int
    M: int
    codewords: np.ndarray
    constraint: ConstraintSpec

    def __post_init__(self) -> None:
        cw = np.ascontiguousarray(self.codewords, dtype=np.float64)
        object.__setattr__(self, "codewords", cw)
        if cw.shape != (self.M, self.n):
            raise ValueError(f"codeword matrix must be {self.M}x{self.n}, got {cw.shape}")
        cs = self.constraint
        powers = np.mean(np.abs(cw) ** cs.r, axis=1)
        worst = float(np.max(powers - cs.s**cs.r))
        if worst > 1e-12:
            raise ValueError(f"codeword violates the power constraint by {worst}")


@dataclass(frozen=True)
class SimResult:
    trials: int
    errors: int
    p_hat: float
    wilson_lo: float
    wilson_hi: float
    empirical_exponent: float
    exponent_censored: bool
    log_base: float

    def __post_init__(self) -> None:
        if not (0 <= self.errors <= self.trials):
            raise ValueError("errors must lie in [0, trials]")
        if not (self.wilson_lo <= self.p_hat <= self.wilson_hi):
            raise ValueError("confidence interval must bracket p_hat")


def wilson_interval(errors: int, trials: int, z: float = WILSON_Z99) -> tuple[float, float]:
    p = errors / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2.0 * trials)) / denom
    half = z * math.sqrt(p * (1.0 - p) / trials + z * z / (4.0 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def make_codebook(
    kind: str,
    n: int,
    M: int,
    cs: ConstraintSpec,
    rng: np.random.Generator | None = None,
    delta_alpha: float | None = None,
) -> Codebook:
    """Construct a power-constrained codebook.

    ``antipodal``: the first M sign patterns of {+s, -s}^n in binary order
    (meets the constraint with equality for every r).
    ``random_uniform_shell``: i.i.d. Gaussian rows projected onto the
    constraint boundary sum |x_k|^r = n s^r.
    ``remark_two_mass``: the M single-spike permutations of (a, 0, ..., 0)
    with a = delta_alpha * floor(s * n / delta_alpha), the type that
    asymptotically saturates the Laplace-case bound.
    """
    if M < 1:
        raise ValueError(f"need at least one message, got M={M}")
    if kind == "antipodal":
        if M > 2**n:
            raise ValueError(f"antipodal supports at most 2^{n} codewords")
        rows = np.empty((M, n))
        for m in range(M):
            bits = (m >> np.arange(n)) & 1
            rows[m] = cs.s * np.where(bits == 0, 1.0, -1.0)
    elif kind == "random_uniform_shell":
        if rng is None:
            raise ValueError("random_uniform_shell needs an rng stream")
        rows = rng.standard_normal((M, n))
        rows[rows == 0.0] = 1.0
        norm = np.sum(np.abs(rows) ** cs.r, axis=1)
        rows *= ((n * cs.s**cs.r / norm) ** (1.0 / cs.r))[:, None]
    elif kind == "remark_two_mass":
        if delta_alpha is None:
            raise ValueError("remark_two_mass needs the input lattice step")
        if M > n:
            raise ValueError(f"remark_two_mass supports at most n={n} codewords")
        a = delta_alpha * math.floor(cs.s * n / delta_alpha)
        rows = np.zeros((M, n))
        rows[np.arange(M), np.arange(M)] = a
    else:
        raise ValueError(f"unknown codebook kind {kind!r}")
    return Codebook(n=n, M=M, codewords=rows, constraint=cs)


def ml_decode(cb: Codebook, y, q: float) -> int:
    """Lowest message index minimizing the q-norm distance to ``y``."""
    y = np.asarray(y, dtype=float).reshape(1, cb.n)
    return int(decode_batch(y, cb.codewords, q)[0])


def _worker_count() -> int:
    env = os.environ.get("GGEXP_THREADS", "")
    try:
        return max(1, int(env))
    except ValueError:
        return 1


def _run_batch(cb: Codebook, ch: ChannelSpec, rng: np.random.Generator, count: int) -> int:
    js = rng.integers(0, cb.M, size=count)
    noise = ggd.sample(ch.noise_dist(), rng, count * cb.n).reshape(count, cb.n)
    y = cb.codewords[js] + noise
    decisions = decode_batch(y, cb.codewords, ch.q)
    return int(np.count_nonzero(decisions != js))


def estimate_error(
    cb: Codebook,
    ch: ChannelSpec,
    trials: int,
    rng: np.random.Generator | int,
    log_base: float = 2.0,
) -> SimResult:
    """Monte Carlo block error rate under uniform messages and i.i.d. noise.

    ``rng`` is a Philox-backed generator (or a seed); batch b runs on the
    stream jumped b steps ahead, so the result does not depend on the worker
    schedule.  With zero observed errors the exponent is the one-sided
    censored value -(1/n) log_b (1/trials).
    """
    if trials < 1:
        raise ValueError(f"need at least one trial, got {trials}")
    if isinstance(rng, (int, np.integer)):
        rng = ggd.make_stream(int(rng))
    base = rng.bit_generator
    sizes = [BATCH_SIZE] * (trials // BATCH_SIZE)
    if trials % BATCH_SIZE:
        sizes.append(trials % BATCH_SIZE)

    def run(b: int) -> int:
        return _run_batch(cb, ch, np.random.Generator(base.jumped(b)), sizes[b])

    workers = _worker_count()
    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            errors = sum(pool.map(run, range(len(sizes))))
    else:
        errors = sum(run(b) for b in range(len(sizes)))

    p_hat = errors / trials
    lo, hi = wilson_interval(errors, trials)
    if errors == 0:
        exponent = math.log(trials) / (cb.n * math.log(log_base))
        censored = True
    else:
        exponent = -math.log(p_hat) / (cb.n * math.log(log_base))
        censored = False
    return SimResult(trials, errors, p_hat, lo, hi, exponent, censored, log_base)


def converse_gap(sim: SimResult, curve, R: float) -> float:
    """Bound-minus-empirical exponent at rate R (diagnostic only; the bound
    is asymptotic and finite-n estimates may sit above or below it)."""
    rates = [p.R for p in curve.points]
    if not (rates[0] <= R <= rates[-1]):
        raise ValueError(f"curve does not cover R={R}")
    exponents = [p.E for p in curve.points]
    i = int(np.searchsorted(rates, R))
    if rates[min(i, len(rates) - 1)] == R:
        bound = exponents[min(i, len(rates) - 1)]
    else:
        lo, hi = exponents[i - 1], exponents[i]
        if math.isinf(lo) or math.isinf(hi):
            bound = math.inf
        else:
            t = (R - rates[i - 1]) / (rates[i] - rates[i - 1])
            bound = (1.0 - t) * lo + t * hi
    return bound - sim.empirical_exponent
