"""Acceptance checks: one callable per criterion, shared by the test suite
and the ``validate`` CLI subcommand.

Each criterion returns a :class:`CriterionResult` with per-check lines so
both pytest and the JSON report can show exactly which tuple passed or
failed at its stated tolerance.  Trial counts, grids, and tolerances are
pinned here; ``quick=True`` shrinks trial counts for smoke runs and is
never used by the acceptance test suite itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from . import canonical as can
from . import thz
from ._rng import derive_rng
from .mdcore import reduce_order
from .specfun import (
    LS_POLY,
    MarcumPolyCoeffs,
    bessel_i0,
    calibrate_marcum_coeffs,
    eval_mu_nu,
    lambert_w0,
    marcum_q1,
)

DEFAULT_SEED = 20260809

# criterion-1/5 grid
GRID_Q = 1.0
GRID_ALPHA = 3.5
GRID_P1 = (0.8, 0.9)
GRID_P2 = (0.3, 0.5, 0.8)
GRID_ZETA = (0.2, 0.5, 1.0)
GRID_TRIALS = (2000, 200, 2000)

# THz scenario grids (criteria 7/9)
S1_M = (0, 1)
S1_P1 = (0.9, 0.99)
S1_P2 = (0.3, 0.7)

# Fig.6-style verification regime (criterion 8)
FIG6_P = (0.3, 0.5, 0.7)


@dataclass
class CheckLine:
    label: str
    passed: bool
    detail: str


@dataclass
class CriterionResult:
    cid: int
    title: str
    passed: bool
    skipped: bool = False
    lines: list[CheckLine] = field(default_factory=list)

    def summary(self) -> str:
        status = "SKIP" if self.skipped else ("PASS" if self.passed else "FAIL")
        return f"{status} criterion {self.cid:2d}: {self.title}"

    def report(self) -> str:
        out = [self.summary()]
        for line in self.lines:
            mark = "ok  " if line.passed else "FAIL"
            out.append(f"    [{mark}] {line.label}: {line.detail}")
        return "\n".join(out)


def _all_pass(cid: int, title: str, lines: list[CheckLine]) -> CriterionResult:
    return CriterionResult(
        cid=cid, title=title, passed=all(l.passed for l in lines), lines=lines
    )


class AcceptanceContext:
    """Lazily computed shared state (MC runs, tables, coefficients)."""

    def __init__(self, seed: int = DEFAULT_SEED, quick: bool = False):
        self.seed = seed
        self.quick = quick
        self.trials = (500, 100, 500) if quick else GRID_TRIALS
        self.lemma_realizations = 20_000 if quick else 100_000

    def params(self, zeta: float, mode: str = "single_interferer") -> can.CanonicalParams:
        return can.CanonicalParams(
            intensity=1.0 / math.pi,  # ratios are scale-free; unit lambda*pi
            alpha=GRID_ALPHA,
            zeta=zeta,
            q=GRID_Q,
            mode=mode,
        )

    @cached_property
    def single_grids(self) -> dict[float, can.GridEstimate]:
        return {
            z: can.run_canonical_mc_grid(
                self.params(z), GRID_Q, GRID_P1, GRID_P2, self.trials, self.seed + 1
            )
            for z in GRID_ZETA
        }

    @cached_property
    def multi_grids(self) -> dict[float, can.GridEstimate]:
        return {
            z: can.run_canonical_mc_grid(
                self.params(z, "multi_interferer"),
                GRID_Q,
                GRID_P1,
                GRID_P2,
                self.trials,
                self.seed + 2,
            )
            for z in GRID_ZETA
        }

    # THz fixtures -----------------------------------------------------

    @cached_property
    def monotone_table(self) -> thz.AbsorptionTable:
        return thz.synthetic_monotone_table(335e9, 380e9, 0.8, 3.0)

    @cached_property
    def valley_table(self) -> thz.AbsorptionTable:
        return thz.synthetic_valley_table(335e9, 380e9, 0.30, 0.04, 0.42, f_min=352e9)

    @cached_property
    def sweep_table(self) -> thz.AbsorptionTable:
        return thz.synthetic_valley_table(325e9, 380e9, 2.2, 0.15, 2.8, f_min=348e9)

    @cached_property
    def fig6_params(self) -> thz.ThzParams:
        fbar = 375e9
        return thz.ThzParams(
            m_shape=1,
            q_override=1.0,
            c1_override=0.01 / fbar**2,
            f_low_hz=340e9,
            f_high_hz=375e9,
        )

    @cached_property
    def fig6_coeffs(self):
        # collocation anchors bracketing the tested intermediate p1 values
        a = math.sqrt(2.0 * self.fig6_params.rician_k)
        return calibrate_marcum_coeffs(a, 0.3, 0.7)

    @cached_property
    def fig6_mc(self) -> can.GridEstimate:
        return thz.run_thz_mc_grid(
            self.fig6_params,
            self.valley_table,
            FIG6_P,
            FIG6_P,
            self.trials,
            self.seed + 3,
        )


# ---------------------------------------------------------------------------
# Criteria
# ---------------------------------------------------------------------------


def criterion_1(ctx: AcceptanceContext) -> CriterionResult:
    """Theorem-1 closed form vs nested Monte Carlo on the pinned grid."""
    lines = []
    for z in GRID_ZETA:
        grid = ctx.single_grids[z]
        for i, p1 in enumerate(grid.p1_grid):
            for j, p2 in enumerate(grid.p2_grid):
                closed = can.r2_single_interferer(p1, p2, GRID_Q, GRID_ALPHA, z)
                mc = float(grid.values[i, j])
                tol = max(0.02, 3.0 * float(grid.stderr[i, j]))
                diff = abs(closed - mc)
                lines.append(
                    CheckLine(
                        label=f"zeta={z} p1={p1} p2={p2}",
                        passed=diff <= tol,
                        detail=f"closed={closed:.4f} mc={mc:.4f} |diff|={diff:.4f} tol={tol:.4f}",
                    )
                )
    return _all_pass(
        1, "single-interferer closed form matches nested MC on the grid", lines
    )


def criterion_2(ctx: AcceptanceContext) -> CriterionResult:
    """Interference-ratio expectation vs its Monte Carlo estimate."""
    from .stochgeom import thinned_ratio_sum_mc

    lines = []
    for alpha in (3.0, 3.5, 4.0):
        for zeta in (0.2, 0.5, 1.0):
            est, se = thinned_ratio_sum_mc(
                alpha, zeta, 200, ctx.lemma_realizations, seed=ctx.seed + 4
            )
            target = can.interference_ratio_expectation(alpha, zeta)
            rel = abs(est - target) / target
            lines.append(
                CheckLine(
                    label=f"alpha={alpha} zeta={zeta}",
                    passed=rel <= 0.03,
                    detail=f"mc={est:.4f} (se {se:.4f}) target={target:.4f} rel={rel:.2%}",
                )
            )
    return _all_pass(2, "interference-ratio expectation within 3% of MC", lines)


def criterion_3(ctx: AcceptanceContext) -> CriterionResult:
    """Boundary identities of the interference-ratio expectation."""
    lines = []
    for alpha in (2.5, 3.0, 3.5, 4.0, 5.0):
        full = can.interference_ratio_expectation(alpha, 1.0)
        want_full = (alpha + 2.0) / (alpha - 2.0)
        small = can.interference_ratio_expectation(alpha, 1e-13)
        want_small = alpha / (alpha - 2.0)
        ok = abs(full - want_full) <= 1e-12 and abs(small - want_small) <= 1e-12
        lines.append(
            CheckLine(
                label=f"alpha={alpha}",
                passed=ok,
                detail=f"zeta=1: {full:.15g} vs {want_full:.15g}; "
                f"zeta->0: {small:.15g} vs {want_small:.15g}",
            )
        )
    return _all_pass(3, "boundary identities (alpha+2)/(alpha-2) and alpha/(alpha-2)", lines)


def criterion_4(ctx: AcceptanceContext) -> CriterionResult:
    """zeta = 1 degeneracy: p2-independence and lumped-layer equivalence."""
    lines = []
    for p1 in GRID_P1:
        phat = can.p1_hat(p1, GRID_Q, GRID_ALPHA)
        want = 1.0 / phat**2 if phat > 1 else 1.0
        vals = [
            can.r2_single_interferer(p1, p2, GRID_Q, GRID_ALPHA, 1.0)
            for p2 in np.linspace(0.01, 0.99, 25)
        ]
        exact = max(abs(v - want) for v in vals)
        lines.append(
            CheckLine(
                label=f"closed form p1={p1}",
                passed=exact == 0.0,
                detail=f"max |R - phat^-2| over p2 grid = {exact:.3g}",
            )
        )
    grid = ctx.single_grids[1.0]
    n0 = ctx.trials[0]
    n_outer = ctx.trials[2]
    for i, p1 in enumerate(grid.p1_grid):
        fo = can.first_order_md_mc(
            ctx.params(1.0), GRID_Q, p1, (n0, n_outer), ctx.seed + 5
        )
        j = grid.p2_grid.index(0.5)
        so = float(grid.values[i, j])
        sig = math.hypot(fo.stderr, float(grid.stderr[i, j]))
        diff = abs(so - fo.value)
        lines.append(
            CheckLine(
                label=f"MC lumped vs nested p1={p1}",
                passed=diff <= 3.0 * sig,
                detail=f"first={fo.value:.4f} second={so:.4f} |diff|={diff:.4f} 3sig={3*sig:.4f}",
            )
        )
    return _all_pass(4, "zeta=1 bypasses the middle layer", lines)


def criterion_5(ctx: AcceptanceContext) -> CriterionResult:
    """Multi-interferer ordering and MC lower-bound slack."""
    lines = []
    rng = derive_rng(ctx.seed, 6)
    worst = 0.0
    n_tuples = 1000
    for _ in range(n_tuples):
        p1 = rng.uniform(0.01, 0.99)
        p2 = rng.uniform(0.01, 0.99)
        q = math.exp(rng.uniform(math.log(0.01), math.log(10.0)))
        alpha = rng.uniform(2.1, 6.0)
        zeta = rng.uniform(0.01, 1.0)
        single = can.r2_single_interferer(p1, p2, q, alpha, zeta)
        multi = can.r2_multi_interferer(p1, p2, q, alpha, zeta)
        worst = max(worst, multi - single)
    lines.append(
        CheckLine(
            label=f"multi <= single on {n_tuples} random tuples",
            passed=worst <= 1e-12,
            detail=f"max(multi - single) = {worst:.3g}",
        )
    )
    for z in GRID_ZETA:
        grid = ctx.multi_grids[z]
        for i, p1 in enumerate(grid.p1_grid):
            for j, p2 in enumerate(grid.p2_grid):
                thm = can.r2_multi_interferer(p1, p2, GRID_Q, GRID_ALPHA, z)
                mc = float(grid.values[i, j])
                slack = mc - (thm - 0.03)
                lines.append(
                    CheckLine(
                        label=f"MC bound zeta={z} p1={p1} p2={p2}",
                        passed=slack >= 0.0,
                        detail=f"thm2={thm:.4f} mc={mc:.4f} mc-(thm2-0.03)={slack:+.4f}",
                    )
                )
    return _all_pass(5, "multi-interferer approximation is a tight lower bound", lines)


def criterion_6(ctx: AcceptanceContext) -> CriterionResult:
    """Order reduction: integrating the second-order curve over p2."""
    p1 = 0.8
    zeta = 0.5
    p2_grid = tuple(np.linspace(0.025, 0.975, 21))
    grid = can.run_canonical_mc_grid(
        ctx.params(zeta), GRID_Q, (p1,), p2_grid, ctx.trials, ctx.seed + 7
    )
    integral = reduce_order(list(zip(grid.p2_grid, grid.values[0])))
    fo = can.first_order_md_mc(
        ctx.params(zeta), GRID_Q, p1, (ctx.trials[0], ctx.trials[2]), ctx.seed + 8
    )
    diff = abs(integral - fo.value)
    lines = [
        CheckLine(
            label=f"zeta={zeta} p1={p1}",
            passed=diff <= 0.02,
            detail=f"integral={integral:.4f} first-order MC={fo.value:.4f} |diff|={diff:.4f}",
        )
    ]
    return _all_pass(6, "order-reduction integral matches the first-order MD", lines)


def _scenario1_quadrature_oracle(
    p1: float,
    p2: float,
    params: thz.ThzParams,
    table: thz.AbsorptionTable,
    approx,
    n_r: int = 20000,
    n_f: int = 3000,
) -> float:
    """Brute-force nested quadrature of the hierarchical probability chain,
    with the approximation-path inner probability (threshold form)."""
    lam_pi = params.intensity * math.pi
    p1t = thz.p1_tilde(p1, params, approx)
    r_max = math.sqrt(-math.log(1e-10) / lam_pi)
    lo, hi = params.band()
    fs = lo + (np.arange(n_f) + 0.5) * (hi - lo) / n_f
    weights = thz.carrier_pdf(fs, params) * (hi - lo) / n_f
    kf = table.k_at(fs)
    dr = r_max / n_r
    rs = (np.arange(n_r) + 0.5) * dr
    total = 0.0
    for start in range(0, n_r, 2000):
        rc = rs[start : start + 2000][:, None]
        metric = fs[None, :] * rc * np.exp(0.5 * kf[None, :] * rc)
        p2_of_r = (metric < p1t) @ weights
        dens = 2.0 * lam_pi * rs[start : start + 2000] * np.exp(
            -lam_pi * np.square(rs[start : start + 2000])
        )
        total += float(np.sum((p2_of_r > p2) * dens * dr))
    return total


def criterion_7(ctx: AcceptanceContext) -> CriterionResult:
    """Scenario-1 closed form vs deterministic nested quadrature."""
    lines = []
    coeffs = thz.default_marcum_coeffs(2.0)
    n_r, n_f = (6000, 1200) if ctx.quick else (20000, 3000)
    for m in S1_M:
        params = thz.ThzParams(m_shape=m)
        for p1 in S1_P1:
            for p2 in S1_P2:
                closed = thz.r2_scenario1(p1, p2, params, ctx.monotone_table, approx=coeffs)
                oracle = _scenario1_quadrature_oracle(
                    p1, p2, params, ctx.monotone_table, coeffs, n_r, n_f
                )
                diff = abs(closed - oracle)
                lines.append(
                    CheckLine(
                        label=f"m={m} p1={p1} p2={p2}",
                        passed=diff <= 1e-3,
                        detail=f"closed={closed:.6f} quadrature={oracle:.6f} |diff|={diff:.2e}",
                    )
                )
    return _all_pass(7, "scenario-1 closed form matches nested quadrature", lines)


def criterion_8(ctx: AcceptanceContext) -> CriterionResult:
    """Scenario-2 numeric engine vs Monte Carlo in the verification regime."""
    lines = []
    params = ctx.fig6_params
    grid = ctx.fig6_mc
    for i, p1 in enumerate(grid.p1_grid):
        for j, p2 in enumerate(grid.p2_grid):
            numeric = thz.r2_scenario2(
                p1, p2, params, ctx.valley_table, approx=ctx.fig6_coeffs
            )
            mc = float(grid.values[i, j])
            diff = abs(numeric - mc)
            lines.append(
                CheckLine(
                    label=f"p1={p1} p2={p2}",
                    passed=diff <= 0.03,
                    detail=f"numeric={numeric:.4f} mc={mc:.4f} |diff|={diff:.4f}",
                )
            )
    return _all_pass(8, "scenario-2 engine matches MC (normalized q=1, m=1)", lines)


def criterion_9(ctx: AcceptanceContext) -> CriterionResult:
    """Scenario-2 engine degenerates to the scenario-1 closed form."""
    lines = []
    coeffs = thz.default_marcum_coeffs(2.0)
    for m in S1_M:
        params = thz.ThzParams(m_shape=m)
        for p1 in S1_P1:
            for p2 in S1_P2:
                s1 = thz.r2_scenario1(p1, p2, params, ctx.monotone_table, approx=coeffs)
                s2 = thz.r2_scenario2(p1, p2, params, ctx.monotone_table, approx=coeffs)
                diff = abs(s1 - s2)
                lines.append(
                    CheckLine(
                        label=f"m={m} p1={p1} p2={p2}",
                        passed=diff <= 2e-3,
                        detail=f"s1={s1:.6f} s2={s2:.6f} |diff|={diff:.2e}",
                    )
                )
    return _all_pass(9, "scenario consistency on a monotone table", lines)


def _i0e_series_vec(x: np.ndarray) -> np.ndarray:
    """Vectorized e^-x I0(x) by the defining power series (oracle use only)."""
    total = np.ones_like(x)
    term = np.ones_like(x)
    quarter_sq = 0.25 * np.square(x)
    for k in range(1, 200):
        term = term * quarter_sq / (k * k)
        total = total + term
        if np.all(term < 1e-18 * total):
            break
    return total * np.exp(-x)


def _marcum_simpson_oracle(a: float, b: float, tol: float = 1e-10) -> float:
    """Composite-Simpson evaluation of the Marcum integral with halving."""
    if b == 0.0:
        return 1.0
    upper = max(a, b) + 14.0
    if b >= upper:
        return 0.0
    prev = None
    n = 128
    while n <= 2**21:
        xs = np.linspace(b, upper, n + 1)
        ys = xs * np.exp(-0.5 * np.square(xs - a)) * _i0e_series_vec(a * xs)
        h = (upper - b) / n
        s = h / 3.0 * (ys[0] + ys[-1] + 4.0 * ys[1:-1:2].sum() + 2.0 * ys[2:-1:2].sum())
        if prev is not None and abs(s - prev) <= tol:
            return min(max(s, 0.0), 1.0)
        prev = s
        n *= 2
    return min(max(prev, 0.0), 1.0)


def criterion_10(ctx: AcceptanceContext) -> CriterionResult:
    """Special-function suite at its stated tolerances."""
    lines = []
    worst = 0.0
    for a in (0.0, 1.0, math.sqrt(6.0), 3.0):
        for b in np.linspace(0.0, 6.0, 13):
            worst = max(worst, abs(marcum_q1(a, b) - _marcum_simpson_oracle(a, b)))
    lines.append(
        CheckLine(
            label="Marcum Q vs Simpson oracle",
            passed=worst <= 1e-8,
            detail=f"max |diff| = {worst:.2e} over a in {{0,1,sqrt6,3}}, b in [0,6]",
        )
    )
    worst_rel = 0.0
    for x in np.concatenate(
        (
            [-math.exp(-1.0) + 1e-6, -0.25, -0.05],
            np.logspace(-6, 6, 25),
        )
    ):
        w = lambert_w0(float(x))
        worst_rel = max(worst_rel, abs(w * math.exp(w) - x) / max(1.0, abs(x)))
    lines.append(
        CheckLine(
            label="Lambert W residual",
            passed=worst_rel <= 1e-12,
            detail=f"max |W e^W - x| / max(1,|x|) = {worst_rel:.2e}",
        )
    )
    coeffs = eval_mu_nu(math.sqrt(6.0), LS_POLY)
    ok = abs(coeffs.mu - 3.1098) <= 5e-4 and abs(coeffs.nu - (-3.4032)) <= 5e-4
    lines.append(
        CheckLine(
            label="published coefficient evaluation at a=sqrt(6)",
            passed=ok,
            detail=f"mu={coeffs.mu:.5f} (want 3.1098), nu={coeffs.nu:.5f} (want -3.4032)",
        )
    )
    return _all_pass(10, "special-function suite", lines)


def criterion_11(ctx: AcceptanceContext) -> CriterionResult:
    """Monotonicity of the closed forms and of the bandwidth search."""
    lines = []
    eps = 1e-12
    p_grid = np.linspace(0.05, 0.95, 13)
    q_grid = np.logspace(-2, 1, 10)

    def is_nonincreasing(vals) -> bool:
        return all(b <= a + eps for a, b in zip(vals, vals[1:]))

    for fn, name in (
        (can.r2_single_interferer, "single"),
        (can.r2_multi_interferer, "multi"),
    ):
        ok_p1 = all(
            is_nonincreasing([fn(p1, p2, GRID_Q, GRID_ALPHA, z) for p1 in p_grid])
            for p2 in (0.2, 0.6)
            for z in (0.3, 1.0)
        )
        ok_p2 = all(
            is_nonincreasing([fn(p1, p2, GRID_Q, GRID_ALPHA, z) for p2 in p_grid])
            for p1 in (0.7, 0.9)
            for z in (0.3, 1.0)
        )
        ok_q = all(
            is_nonincreasing([fn(0.8, 0.5, q, GRID_ALPHA, z) for q in q_grid])
            for z in (0.3, 1.0)
        )
        lines.append(
            CheckLine(
                label=f"canonical {name} closed form",
                passed=ok_p1 and ok_p2 and ok_q,
                detail=f"non-increasing in p1:{ok_p1} p2:{ok_p2} q:{ok_q}",
            )
        )
    coeffs = thz.default_marcum_coeffs(2.0)
    params = thz.ThzParams()
    vals_p1 = [
        thz.r2_scenario1(p1, 0.5, params, ctx.monotone_table, approx=coeffs)
        for p1 in p_grid
    ]
    vals_p2 = [
        thz.r2_scenario1(0.9, p2, params, ctx.monotone_table, approx=coeffs)
        for p2 in p_grid
    ]
    lines.append(
        CheckLine(
            label="THz scenario-1 closed form",
            passed=is_nonincreasing(vals_p1) and is_nonincreasing(vals_p2),
            detail=f"non-increasing in p1:{is_nonincreasing(vals_p1)} "
            f"p2:{is_nonincreasing(vals_p2)}",
        )
    )
    prm = can.CanonicalParams(
        intensity=1e-4,
        alpha=GRID_ALPHA,
        zeta=1.0,
        l_bits=256.0,
        bandwidth_hz=1e7,
        deadline_s=1e-3,
    )
    targets = (0.2, 0.4, 0.6, 0.8, 0.95)
    widths = [
        can.required_bandwidth(t, 2, prm, 0.999, 0.5, 1e6, 1e10) for t in targets
    ]
    ok_w = all(b >= a * (1.0 - 1e-9) for a, b in zip(widths, widths[1:]))
    lines.append(
        CheckLine(
            label="required bandwidth vs target",
            passed=ok_w,
            detail="W(target) = " + ", ".join(f"{w:.4g}" for w in widths),
        )
    )
    return _all_pass(11, "monotonicity properties", lines)


def criterion_12(ctx: AcceptanceContext) -> CriterionResult:
    """Interior reliability maximum over the hopping bandwidth."""
    params = thz.ThzParams(f_low_hz=325e9, f_high_hz=375e9, m_shape=0)
    n_bw = 7 if ctx.quick else 9
    bw_grid = np.linspace(4e9, 50e9, n_bw)
    lines = []
    for p2 in (0.5, 0.7):
        rows, best = thz.optimal_bandwidth_sweep(
            params, ctx.sweep_table, 0.99, p2, bw_grid
        )
        vals = [r[1] for r in rows]
        peak = max(vals)
        interior = peak > vals[0] + 1e-6 and peak > vals[-1] + 1e-6
        lines.append(
            CheckLine(
                label=f"m=0 p2={p2}",
                passed=interior,
                detail=f"argmax BW={best/1e9:.1f} GHz, R(edges)=({vals[0]:.4f}, "
                f"{vals[-1]:.4f}), R(max)={peak:.4f}",
            )
        )
    return _all_pass(
        12, "bandwidth sweep exhibits a strict interior maximum", lines
    )


ALL_CRITERIA: tuple[tuple[int, Callable[[AcceptanceContext], CriterionResult]], ...] = (
    (1, criterion_1),
    (2, criterion_2),
    (3, criterion_3),
    (4, criterion_4),
    (5, criterion_5),
    (6, criterion_6),
    (7, criterion_7),
    (8, criterion_8),
    (9, criterion_9),
    (10, criterion_10),
    (11, criterion_11),
    (12, criterion_12),
)

THZ_CRITERIA = {7, 8, 9, 12}


def run_all(
    seed: int = DEFAULT_SEED,
    quick: bool = False,
    skip_thz: bool = False,
    skip_reason: str = "",
) -> list[CriterionResult]:
    ctx = AcceptanceContext(seed=seed, quick=quick)
    results = []
    for cid, fn in ALL_CRITERIA:
        if skip_thz and cid in THZ_CRITERIA:
            results.append(
                CriterionResult(
                    cid=cid,
                    title=f"skipped: {skip_reason or 'THz checks disabled'}",
                    passed=True,
                    skipped=True,
                )
            )
            continue
        results.append(fn(ctx))
    return results


def results_to_json(results: list[CriterionResult]) -> dict:
    return {
        "passed": all(r.passed for r in results if not r.skipped),
        "criteria": [
            {
                "id": r.cid,
                "title": r.title,
                "passed": r.passed,
                "skipped": r.skipped,
                "checks": [
                    {"label": l.label, "passed": l.passed, "detail": l.detail}
                    for l in r.lines
                ],
            }
            for r in results
        ],
    }
