"""Verification suites: residual, counting, quantization, and simulation
checks, reported as JSON-lines records.

Each record carries the check id, an instance descriptor, the two compared
quantities, and a pass flag.  A suite passes when every record does.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from . import bounds, channel_sim, ggd, method_of_types as mot, quantizer as qz
from .ggd import ChannelSpec, ConstraintSpec

__all__ = ["CheckRecord", "SUITES", "run_suite", "records_to_jsonl"]

SUITES = ("bounds", "types", "quantizer", "simulator", "all")


@dataclass(frozen=True)
class CheckRecord:
    suite: str
    check: str
    instance: str
    lhs: float
    rhs: float
    passed: bool


def records_to_jsonl(records: list[CheckRecord]) -> str:
    return "\n".join(json.dumps(dataclasses.asdict(r)) for r in records) + "\n"


def _rec(suite, check, instance, lhs, rhs, passed) -> CheckRecord:
    return CheckRecord(suite, check, str(instance), float(lhs), float(rhs), bool(passed))


# --- bounds -----------------------------------------------------------------


def _residual_checks(records: list[CheckRecord], draws: int, seed: int) -> None:
    rng = np.random.default_rng(seed)
    worst2 = worst3 = worst4 = 0.0
    for _ in range(draws):
        nu_s = rng.uniform(0.1, 4.0)
        rho = rng.uniform(0.0, 20.0)
        lam = bounds.thm2_lambda(nu_s, rho)
        worst2 = max(worst2, abs((1.0 + rho) * nu_s * lam**2 - (nu_s - 1.0) * lam - 1.0))
        nu = rng.uniform(0.2, 3.0)
        s = rng.uniform(0.2, 3.0)
        lam3 = bounds.thm3_lambda(nu, s, rho)
        worst3 = max(
            worst3, abs(rho - (1.0 / lam3 - 1.0) * (1.0 / (s * math.sqrt(nu * math.pi * lam3)) + 1.0))
        )
        lam4 = bounds.thm4_lambda2(nu_s, rho)
        worst4 = max(worst4, abs(rho - (1.0 / lam4 - 1.0) * (2.0 / (nu_s * lam4) ** 2 + 1.0)))
    records.append(_rec("bounds", "thm2_quadratic_residual", f"{draws} draws", worst2, 1e-10, worst2 < 1e-10))
    records.append(_rec("bounds", "thm3_equation_residual", f"{draws} draws", worst3, 1e-10, worst3 < 1e-10))
    records.append(_rec("bounds", "thm4_cubic_residual", f"{draws} draws", worst4, 1e-10, worst4 < 1e-10))

    disc = bounds.RHO1**2 - 8.0 * (1.0 + bounds.RHO1)
    records.append(_rec("bounds", "thm4_rho1_discriminant_zero", "rho1=4+2sqrt6", abs(disc), 1e-9, abs(disc) < 1e-9))

    rng2 = np.random.default_rng(seed + 1)
    worst_r1 = worst_r2 = 0.0
    for _ in range(20):
        nu_s = rng2.uniform(0.2, 3.0)
        rho2 = bounds.rho2_threshold(nu_s)
        # lambda_2 continuity across rho2: cubic root meets the clamp value.
        lam_left = bounds.thm4_lambda2(nu_s, rho2)
        worst_r2 = max(worst_r2, abs(lam_left - 1.0 / (1.0 + nu_s)))
        # min-over-branches value continuity across rho1 (left/right branch
        # definitions evaluated at the threshold itself).
        v_left = float(bounds._v_q1r2(nu_s, bounds.RHO1))
        v_right = float(bounds._v_q1r2(nu_s, np.nextafter(bounds.RHO1, np.inf)))
        worst_r1 = max(worst_r1, abs(v_left - v_right))
    records.append(_rec("bounds", "thm4_rho2_branch_continuity", "20 draws", worst_r2, 1e-9, worst_r2 < 1e-9))
    records.append(_rec("bounds", "thm4_rho1_value_continuity", "20 draws", worst_r1, 1e-9, worst_r1 < 1e-9))

    # Regime consistency: the i=1 branch uses zeta_1 = 1/(1+nu*s) up to rho1.
    worst = 0.0
    for rho in np.linspace(0.0, bounds.RHO1, 7):
        for nu_s in (0.4, 1.0, 2.5):
            (lam1, kap1), _ = bounds.thm4_solutions(nu_s, float(rho))
            worst = max(worst, abs(lam1 * kap1 - 1.0 / (1.0 + nu_s)))
    records.append(_rec("bounds", "thm4_zeta1_regime", "rho<=rho1 grid", worst, 1e-12, worst < 1e-12))


def _brute_force_checks(records: list[CheckRecord], seed: int, grid_points: int = 10**5) -> None:
    rng = np.random.default_rng(seed)
    grid = np.linspace(1.0 / grid_points, 1.0, grid_points)
    step = grid[1] - grid[0]
    for i in range(10):
        case = bounds.CASES[i % 3]
        rho = float(rng.uniform(0.05, 18.0))
        if case == "q1r1":
            nu_s = float(rng.uniform(0.3, 3.0))
            vals = bounds.thm2_raw_inner(nu_s, rho, grid)
            argmin = grid[int(np.argmin(vals))]
            target = bounds.thm2_lambda(nu_s, rho)
            err = abs(argmin - target)
        elif case == "q2r1":
            nu = float(rng.uniform(0.3, 3.0))
            s = float(rng.uniform(0.3, 3.0))
            vals = bounds.thm3_raw_inner(nu, s, rho, grid)
            argmin = grid[int(np.argmin(vals))]
            target = bounds.thm3_lambda(nu, s, rho)
            err = abs(argmin - target)
        else:
            nu_s = float(rng.uniform(0.3, 3.0))
            endpoint = 1.0 / (1.0 + nu_s)
            (lam1, kap1), (lam2, _) = bounds.thm4_solutions(nu_s, rho)
            zeta1 = lam1 * kap1
            low = grid[grid <= endpoint]
            vals1 = bounds.thm4_raw_zeta1(nu_s, rho, low)
            arg1 = low[int(np.argmin(vals1))]
            # The interior stationary point may lose to the interval endpoint;
            # the endpoint case is covered by the second branch.
            err1 = min(abs(arg1 - zeta1), abs(arg1 - endpoint))
            high = grid[grid >= endpoint]
            vals2 = bounds.thm4_raw_zeta2(nu_s, rho, high)
            arg2 = high[int(np.argmin(vals2))]
            err2 = abs(arg2 - lam2)
            err = max(err1, err2)
        records.append(
            _rec("bounds", "closed_form_vs_grid_argmin", f"{case} rho={rho:.3f}", err, 1.5 * step, err <= 1.5 * step)
        )


def _zero_crossing_checks(records: list[CheckRecord], seed: int) -> None:
    rng = np.random.default_rng(seed)
    for i in range(20):
        case = bounds.CASES[i % 3]
        nu = float(rng.uniform(0.5, 2.5))
        s = float(rng.uniform(0.5, 2.5))
        q, r = {"q1r1": (1.0, 1.0), "q2r1": (2.0, 1.0), "q1r2": (1.0, 2.0)}[case]
        ch, cs = ChannelSpec(q, nu), ConstraintSpec(r, s)
        r_zero = bounds.capacity_endpoint(case, ch, cs)
        fn = bounds.bound_for_case(case)
        e_at = fn(ch, cs, r_zero).E
        e_before = fn(ch, cs, r_zero - 0.05).E
        ok = e_at <= 1e-6 and e_before > 0.0
        records.append(
            _rec("bounds", "zero_crossing", f"{case} nu={nu:.2f} s={s:.2f}", e_at, 1e-6, ok)
        )


def _curve_shape_checks(records: list[CheckRecord]) -> None:
    for case, ch, cs in (
        ("q1r1", ChannelSpec(1.0, 1.0), ConstraintSpec(1.0, 2.0)),
        ("q2r1", ChannelSpec(2.0, 1.0), ConstraintSpec(1.0, 0.5)),
        ("q1r2", ChannelSpec(1.0, 2.0), ConstraintSpec(2.0, 0.5)),
    ):
        r_zero = bounds.capacity_endpoint(case, ch, cs)
        grid = np.geomspace(1e-3, 1.5 * r_zero, 160)
        try:
            bounds.curve(case, ch, cs, 2.0, grid)
            ok = True
        except bounds.CurveInvariantError:
            ok = False
        records.append(_rec("bounds", "curve_invariants", case, float(ok), 1.0, ok))


def bounds_suite(seed: int = 20240810) -> list[CheckRecord]:
    records: list[CheckRecord] = []
    _residual_checks(records, draws=200, seed=seed)
    _brute_force_checks(records, seed=seed + 7)
    _zero_crossing_checks(records, seed=seed + 13)
    _curve_shape_checks(records)
    return records


# --- method of types ----------------------------------------------------------


def _marginal_type_checks(records: list[CheckRecord]) -> None:
    for n in range(2, 9):
        for p in (1.0, 2.0):
            ls = mot.LatticeSpec(n, 0.3, 0.35, 0.35)
            full = mot.constrained_alphabet(ls, c_x=4.0, p=p)
            letters = full[np.argsort(np.abs(full), kind="stable")][:9]
            letters = np.sort(letters)
            c_x = float(np.mean(np.abs(letters * ls.delta_alpha) ** p)) * 0.8
            types = mot.enumerate_types(letters, n, ls, p, c_x)
            crude_log, improved_log = mot.number_of_types_bounds(ls, p, c_x)
            count_ok = math.log(max(len(types), 1)) <= min(crude_log, improved_log) + 1e-12
            records.append(
                _rec("types", "type_count_bounds", f"n={n} p={p}", math.log(max(len(types), 1)), min(crude_log, improved_log), count_ok)
            )
            worst_sandwich = -math.inf
            worst_support = -math.inf
            for t in types:
                _, log_size = mot.type_class_size(t)
                h = n * t.entropy()
                c2 = (4.0 * c_x ** (1.0 / p) + 1.0) ** (p / (1.0 + p))
                # Lemma lower bound per symbol: H - c2 * log(n+1) / n^((1-alpha)p/(1+p)).
                lower = h - c2 * math.log2(n + 1.0) * n / n ** ((1.0 - ls.alpha) * p / (1.0 + p))
                worst_sandwich = max(worst_sandwich, max(lower - log_size, log_size - h))
                bound = c2 * n ** ((1.0 + p * ls.alpha) / (1.0 + p))
                worst_support = max(worst_support, t.support_size() - bound)
                mot.support_bounds(t, p, c_x)
            records.append(
                _rec("types", "lemma3_marginal_sandwich", f"n={n} p={p} ({len(types)} types)", worst_sandwich, 1e-9, worst_sandwich <= 1e-9)
            )
            records.append(
                _rec("types", "lemma2_marginal_support", f"n={n} p={p}", worst_support, 1e-9, worst_support <= 1e-9)
            )


def _joint_type_checks(records: list[CheckRecord], seed: int) -> None:
    rng = np.random.default_rng(seed)
    worst_joint = worst_cond = worst_sigma = -math.inf
    ratio_ok = True
    for trial in range(30):
        n = int(rng.choice([16, 32, 64]))
        ls = mot.LatticeSpec(n, 0.3, 0.35, 0.35)
        p = float(rng.choice([1.0, 2.0]))
        xs = qz.quantize_point(rng.normal(0.0, 1.0, n), ls.delta_alpha)
        ys = qz.quantize_point(xs + rng.normal(0.0, 0.7, n), ls.delta_beta)
        xi = np.rint(xs / ls.delta_alpha).astype(np.int64)
        yj = np.rint(ys / ls.delta_beta).astype(np.int64)
        cells: dict[tuple[int, int], int] = {}
        for i, j in zip(xi, yj):
            cells[(int(i), int(j))] = cells.get((int(i), int(j)), 0) + 1
        jt = mot.JointTypeDist(n, ls.delta_alpha, ls.delta_beta, tuple((i, j, c) for (i, j), c in sorted(cells.items())))
        c_x = jt.x_marginal().power(p)
        c_y = jt.y_marginal().power(p)
        consts = mot.support_bounds(jt, p, c_x, c_y)
        worst_sigma = max(worst_sigma, abs(consts.c1 - consts.sigma))
        _, log_size = mot.type_class_size(jt)
        h = n * jt.entropy()
        gamma = 1.0 - ls.alpha - ls.beta
        lower = h - consts.c1 * math.log2(n + 1.0) * n / n ** (gamma * p / (2.0 + p))
        worst_joint = max(worst_joint, max(lower - log_size, log_size - h))
        for given in ("x", "y"):
            size = mot.conditional_type_class_size(jt, given)
            lo, val, hi = mot.conditional_sandwich(jt, given, p, c_x, c_y)
            worst_cond = max(worst_cond, max(lo - val, val - hi))
            ratio_ok = ratio_ok and size >= 1
    records.append(_rec("types", "lemma3_joint_sandwich", "30 random joint types", worst_joint, 1e-9, worst_joint <= 1e-9))
    records.append(_rec("types", "lemma4_conditional_sandwich", "30 random joint types", worst_cond, 1e-9, worst_cond <= 1e-9))
    records.append(_rec("types", "conditional_ratio_integer", "30 random joint types", float(ratio_ok), 1.0, ratio_ok))
    records.append(_rec("types", "c1_matches_sigma_k2", "30 random joint types", worst_sigma, 1e-9, worst_sigma <= 1e-9))
    vols = [(1, 2.0), (2, math.pi), (3, 4.0 * math.pi / 3.0)]
    worst_v = max(abs(mot.unit_ball_volume(k) - v) for k, v in vols)
    records.append(_rec("types", "unit_ball_volumes", "k=1,2,3", worst_v, 1e-12, worst_v < 1e-12))


def types_suite(seed: int = 20240810) -> list[CheckRecord]:
    records: list[CheckRecord] = []
    _marginal_type_checks(records)
    _joint_type_checks(records, seed)
    return records


# --- quantizer ------------------------------------------------------------------


def _quantizer_instances():
    n4, n3 = 10**4, 10**3
    ls_a = mot.LatticeSpec(n4, 0.04, 0.42, 0.54)
    insts = []
    # 1: point mass, exact triangular conditional, validity condition holds
    px = mot.TypeDist(n4, ls_a.delta_alpha, ((0, n4),))
    insts.append(
        ("tri_point_n1e4", qz.StepDensity(ls_a, px, (qz.TriangularConditional(0.0, 1.0),), 1.0), 2.0, 2.0, 2.0)
    )
    # 2: two letters, exact triangular conditionals
    px2 = mot.TypeDist(n4, ls_a.delta_alpha, ((0, n4 - n4 // 100), (1, n4 // 100)))
    conds2 = (qz.TriangularConditional(0.0, 1.0), qz.TriangularConditional(ls_a.delta_alpha, 1.0))
    insts.append(("tri_two_n1e4", qz.StepDensity(ls_a, px2, conds2, 1.0), 2.0, 2.0, 2.0))
    # 3: Laplace conditionals at n=1e3 (validity fails; slacks are loose but checked)
    ls_b = mot.LatticeSpec(n3, 0.2, 0.35, 0.45)
    px3 = mot.TypeDist(n3, ls_b.delta_alpha, ((0, 900), (4, 100)))
    conds3 = (qz.GGDConditional(1.0, 1.0, 0.0), qz.GGDConditional(1.0, 1.0, 4 * ls_b.delta_alpha))
    insts.append(("laplace_n1e3", qz.StepDensity(ls_b, px3, conds3, 0.5), 1.0, 1.0, 1.0))
    # 4: Gaussian conditionals at n=1e3
    ls_c = mot.LatticeSpec(n3, 0.15, 0.40, 0.45)
    px4 = mot.TypeDist(n3, ls_c.delta_alpha, ((0, 950), (2, 50)))
    kk = ggd.lipschitz_K(ChannelSpec(2.0, 1.0))
    conds4 = (qz.GGDConditional(2.0, 1.0, 0.0), qz.GGDConditional(2.0, 1.0, 2 * ls_c.delta_alpha))
    insts.append(("gauss_n1e3", qz.StepDensity(ls_c, px4, conds4, kk), 2.0, 2.0, 2.0))
    # 5: raised-cosine callable, surrogate infimum path
    ls_d = mot.LatticeSpec(n4, 0.03, 0.42, 0.55)
    px5 = mot.TypeDist(n4, ls_d.delta_alpha, ((0, n4),))

    def raised_cos(y):
        y = np.asarray(y, dtype=float)
        return np.where(np.abs(y) < 1.0, 0.5 * (1.0 + np.cos(math.pi * y)), 0.0)

    cond5 = qz.CallableConditional(raised_cos, math.pi / 2.0, 0.0, radius_fn=lambda t: 1.0)
    insts.append(("raised_cos_n1e4", qz.StepDensity(ls_d, px5, (cond5,), math.pi / 2.0), 2.0, 2.0, 2.0))
    return insts


def quantizer_suite(seed: int = 20240810) -> list[CheckRecord]:
    records: list[CheckRecord] = []
    for name, sd, p, r, q in _quantizer_instances():
        c_x = sd.px.power(r) + 1e-9
        c_y = sd.mixture_moment(p, lambda x: 0.0) + 1e-9
        c_xy = sd.mixture_moment(q, lambda x: x) + 1e-9
        jt, rep = qz.build_quantized_joint(sd, p, c_x, c_y, c_xy, r, q)
        marg_ok = dict(jt.x_marginal().entries) == dict(sd.px.entries)
        records.append(_rec("quantizer", "marginal_preserved", name, float(marg_ok), 1.0, marg_ok))
        mass_int_ok = all(isinstance(c, int) for *_, c in jt.entries)
        records.append(_rec("quantizer", "masses_integer_over_n", name, float(mass_int_ok), 1.0, mass_int_ok))
        records.append(_rec("quantizer", "deficit_positive", name, rep.p1, 0.0, rep.p1 > 0.0))
        records.append(_rec("quantizer", "deficit_bound", name, rep.p1, rep.p1_bound, rep.p1 <= rep.p1_bound))
        dom, gap = qz.dominance_check(sd, rep)
        records.append(_rec("quantizer", "pointwise_dominance", name, dom, 1e-12, dom <= 1e-12))
        records.append(_rec("quantizer", "cell_gap_bound", name, gap, 1e-12, gap <= 1e-12))
        for chk in qz.lemma11_inequalities(sd, jt, rep, q):
            records.append(_rec("quantizer", f"slack_{chk.name}", name, chk.lhs, chk.rhs, chk.ok))
        records.append(_rec("quantizer", "validity_flag", name, float(rep.validity_ok), 0.0, True))

    rng = np.random.default_rng(seed)
    ls = mot.LatticeSpec(256, 0.2, 0.3, 0.5)
    ch = ChannelSpec(1.0, 1.0)
    worst_margin = -math.inf
    ok = True
    for _ in range(1000):
        x = rng.uniform(-2.0, 2.0, 256)
        y = x + rng.laplace(0.0, 1.0, 256)
        xq = qz.quantize_point(x, ls.delta_alpha)
        yq = qz.quantize_point(y, ls.delta_beta)
        c_xy = float(np.mean(np.abs(yq - xq))) + 0.5
        try:
            gap, bound = qz.pdf_exponent_gap(x, y, ch, ls, c_xy)
            worst_margin = max(worst_margin, gap - bound)
        except AssertionError:
            ok = False
    records.append(_rec("quantizer", "pdf_exponent_gap", "1000 laplace pairs n=256", worst_margin, 0.0, ok and worst_margin <= 0.0))

    # Quantized power-constraint slack: r=1 rounding moves the mean absolute
    # value by at most half a lattice step.
    ls2 = mot.LatticeSpec(1000, 0.3, 0.35, 0.35)
    cs = ConstraintSpec(1.0, 1.0)
    worst_slack = -math.inf
    for _ in range(50):
        x = rng.uniform(-1.0, 1.0, 1000)
        x *= 1.0 / np.mean(np.abs(x))  # constraint-tight
        ok_i, slack = qz.check_type_constraint(x, cs, ls2, eps=0.5 * ls2.delta_alpha)
        worst_slack = max(worst_slack, slack)
        ok = ok and ok_i
    records.append(
        _rec("quantizer", "type_constraint_slack", "50 tight vectors n=1000", worst_slack, 0.5 * ls2.delta_alpha, ok and worst_slack <= 0.5 * ls2.delta_alpha)
    )
    return records


# --- simulator --------------------------------------------------------------------


def simulator_suite(seed: int = 20240810, runs: int = 100, trials: int = 10**6) -> list[CheckRecord]:
    records: list[CheckRecord] = []
    cases = [
        ("laplace", ChannelSpec(1.0, 1.0), ConstraintSpec(1.0, 1.0), 0.5 * math.exp(-1.0)),
        ("gauss", ChannelSpec(2.0, 1.0), ConstraintSpec(2.0, 1.0), float(norm.sf(math.sqrt(2.0)))),
    ]
    for name, ch, cs, p_true in cases:
        cb = channel_sim.make_codebook("antipodal", 1, 2, cs)
        hits = 0
        for k in range(runs):
            res = channel_sim.estimate_error(cb, ch, trials, ggd.make_stream(seed, k))
            if res.wilson_lo <= p_true <= res.wilson_hi:
                hits += 1
        records.append(
            _rec("simulator", "closed_form_coverage", f"{name} {runs}x{trials}", hits, 0.95 * runs, hits >= math.ceil(0.95 * runs))
        )

    ch, cs = cases[0][1], cases[0][2]
    cb = channel_sim.make_codebook("antipodal", 1, 2, cs)
    a = channel_sim.estimate_error(cb, ch, 10**5, seed)
    b = channel_sim.estimate_error(cb, ch, 10**5, seed)
    records.append(_rec("simulator", "seed_reproducibility", "2 runs", float(a == b), 1.0, a == b))

    rng = ggd.make_stream(seed, 999)
    cb_shell = channel_sim.make_codebook("random_uniform_shell", 8, 16, ConstraintSpec(2.0, 1.3), rng)
    powers = np.mean(np.abs(cb_shell.codewords) ** 2, axis=1)
    worst = float(np.max(np.abs(powers - 1.3**2)))
    records.append(_rec("simulator", "constraint_equality", "shell n=8 M=16", worst, 1e-12, worst <= 1e-12))

    # Decoder symmetry under codeword permutation.
    rng2 = ggd.make_stream(seed, 1000)
    cw = rng2.standard_normal((6, 5))
    cs_big = ConstraintSpec(2.0, 10.0)
    cb1 = channel_sim.Codebook(5, 6, cw, cs_big)
    perm = np.array([3, 0, 5, 1, 4, 2])
    cb2 = channel_sim.Codebook(5, 6, cw[perm], cs_big)
    ys = rng2.standard_normal((200, 5)) * 2.0
    from ._kernels import decode_batch

    d1 = decode_batch(ys, cb1.codewords, 2.0)
    d2 = decode_batch(ys, cb2.codewords, 2.0)
    sym_ok = bool(np.array_equal(perm[d2], d1))
    records.append(_rec("simulator", "decoder_permutation_symmetry", "200 draws", float(sym_ok), 1.0, sym_ok))

    res0 = channel_sim.estimate_error(channel_sim.make_codebook("antipodal", 1, 1, cs), ch, 1000, seed)
    records.append(_rec("simulator", "single_message_error_free", "M=1", res0.p_hat, 0.0, res0.p_hat == 0.0 and res0.exponent_censored))
    return records


def run_suite(name: str, seed: int = 20240810) -> tuple[list[CheckRecord], bool]:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; expected one of {SUITES}")
    fns = {
        "bounds": [bounds_suite],
        "types": [types_suite],
        "quantizer": [quantizer_suite],
        "simulator": [simulator_suite],
        "all": [bounds_suite, types_suite, quantizer_suite, simulator_suite],
    }[name]
    records: list[CheckRecord] = []
    for fn in fns:
        records.extend(fn(seed))
    return records, all(r.passed for r in records)
