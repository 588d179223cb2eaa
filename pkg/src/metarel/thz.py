"""Wideband frequency-hopping THz link model.

SNR with molecular absorption, Rician fading success probability through
the Marcum Q-function, a shaped carrier-frequency distribution over the
hopping band, and the second-order MD reliability: a Lambert-W closed form
when the absorption coefficient k(f) increases monotonically over the band
(Scenario 1), and root classification plus radial integration when k(f) is
valley-shaped (Scenario 2).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from ._rng import derive_rng
from .errors import (
    AccuracyError,
    ConfigurationError,
    DomainError,
    IngestError,
    ScenarioError,
)
from .mdcore import LayeredModel, MdEstimate, MdQuery, nested_md_estimate
from .canonical import GridEstimate, qos_threshold
from .specfun import (
    MarcumApproxCoeffs,
    calibrate_marcum_coeffs,
    lambert_w0,
    marcum_q1,
    marcum_q1_inverse_b,
)

__all__ = [
    "SPEED_OF_LIGHT",
    "THERMAL_NOISE_W_PER_HZ",
    "DEFAULT_ANCHORS",
    "ThzParams",
    "AbsorptionTable",
    "DerivedConstants",
    "load_absorption_table",
    "synthetic_monotone_table",
    "synthetic_valley_table",
    "thz_snr",
    "p1_thz",
    "carrier_pdf",
    "carrier_cdf",
    "carrier_cdf_coeffs",
    "carrier_cdf_inverse",
    "sample_carrier",
    "default_marcum_coeffs",
    "derive_constants",
    "p1_tilde",
    "attenuation_metric",
    "f_tilde_scenario1",
    "r2_scenario1",
    "roots_scenario2",
    "p2_scenario2",
    "r2_scenario2",
    "thz_layered_model",
    "run_thz_mc",
    "run_thz_mc_grid",
    "optimal_bandwidth_sweep",
]

SPEED_OF_LIGHT = 299792458.0  # m/s
THERMAL_NOISE_W_PER_HZ = 3.9810717055349695e-21  # -174 dBm/Hz
DEFAULT_ANCHORS = (0.99, 1.0 - 1e-7)  # collocation anchors for near-unity p1

ABSORPTION_HEADER = ("frequency_hz", "k_per_m")


@dataclass(frozen=True)
class ThzParams:
    """Link-budget and model parameters; defaults follow the reference setup.

    Antenna gains are linear (25 dB each by default); dB inputs are converted
    at the ingestion boundary, never stored here.  ``q_override`` and
    ``c1_override`` replace the derived QoS threshold and path-loss composite
    for normalized studies.
    """

    tx_power_w: float = 0.1
    tx_gain: float = 316.22776601683796  # 25 dB
    rx_gain: float = 316.22776601683796  # 25 dB
    noise_density_w_per_hz: float = THERMAL_NOISE_W_PER_HZ
    bandwidth_hz: float = 1e9
    l_bits: float = 1000.0
    deadline_s: float = 1e-5
    rician_k: float = 2.0
    intensity: float = 1.5e-3  # BS density, 1/m^2
    f_low_hz: float = 340e9
    f_high_hz: float = 375e9
    m_shape: int = 0
    q_override: Optional[float] = None
    c1_override: Optional[float] = None

    def __post_init__(self) -> None:
        positive = (
            ("tx_power_w", self.tx_power_w),
            ("tx_gain", self.tx_gain),
            ("rx_gain", self.rx_gain),
            ("noise_density_w_per_hz", self.noise_density_w_per_hz),
            ("bandwidth_hz", self.bandwidth_hz),
            ("l_bits", self.l_bits),
            ("deadline_s", self.deadline_s),
            ("intensity", self.intensity),
            ("f_low_hz", self.f_low_hz),
        )
        for name, v in positive:
            if not (math.isfinite(v) and v > 0.0):
                raise DomainError(f"{name} must be finite and positive")
        if self.rician_k < 0.0:
            raise DomainError("rician_k must be >= 0")
        if not self.f_low_hz < self.f_high_hz:
            raise DomainError("need f_low_hz < f_high_hz")
        if int(self.m_shape) != self.m_shape or self.m_shape < 0:
            raise DomainError("m_shape must be a non-negative integer")
        object.__setattr__(self, "m_shape", int(self.m_shape))
        if self.q_override is not None and self.q_override <= 0.0:
            raise DomainError("q_override must be positive")
        if self.c1_override is not None and self.c1_override <= 0.0:
            raise DomainError("c1_override must be positive")

    def qos(self) -> float:
        if self.q_override is not None:
            return self.q_override
        return qos_threshold(self.l_bits, self.bandwidth_hz, self.deadline_s)

    def c1(self) -> float:
        """Path-loss composite (4 pi)^2 N0 W / (P_T G_T G_R c^2)."""
        if self.c1_override is not None:
            return self.c1_override
        return (
            (4.0 * math.pi) ** 2
            * self.noise_density_w_per_hz
            * self.bandwidth_hz
            / (self.tx_power_w * self.tx_gain * self.rx_gain * SPEED_OF_LIGHT**2)
        )

    def band(self) -> tuple[float, float]:
        return (self.f_low_hz, self.f_high_hz)


@dataclass(frozen=True)
class AbsorptionTable:
    """Sorted (frequency, k) samples with linear interpolation in between."""

    frequency_hz: np.ndarray
    k_per_m: np.ndarray

    def __post_init__(self) -> None:
        f = np.asarray(self.frequency_hz, dtype=float)
        k = np.asarray(self.k_per_m, dtype=float)
        object.__setattr__(self, "frequency_hz", f)
        object.__setattr__(self, "k_per_m", k)
        if f.ndim != 1 or f.shape != k.shape or f.size < 2:
            raise IngestError("need >= 2 (frequency, k) pairs of equal length")
        if not (np.isfinite(f).all() and np.isfinite(k).all()):
            raise IngestError("table entries must be finite")
        if np.any(np.diff(f) <= 0.0):
            raise IngestError("frequencies must be strictly ascending")
        if np.any(k < 0.0):
            raise IngestError("absorption coefficients must be >= 0")

    def k_at(self, f):
        """k(f) by linear interpolation; out-of-range queries are errors."""
        f = np.asarray(f, dtype=float)
        if np.any(f < self.frequency_hz[0]) or np.any(f > self.frequency_hz[-1]):
            raise DomainError("frequency outside the tabulated range")
        out = np.interp(f, self.frequency_hz, self.k_per_m)
        return float(out) if out.ndim == 0 else out

    def covers(self, f_low: float, f_high: float) -> bool:
        return self.frequency_hz[0] <= f_low and f_high <= self.frequency_hz[-1]

    def knots_in_band(self, f_low: float, f_high: float) -> np.ndarray:
        """Band endpoints plus every tabulated knot strictly inside."""
        if not self.covers(f_low, f_high):
            raise DomainError("band is not covered by the table")
        f = self.frequency_hz
        inside = f[(f > f_low) & (f < f_high)]
        return np.concatenate(([f_low], inside, [f_high]))

    def is_monotone_nondecreasing(self, f_low: float, f_high: float) -> bool:
        knots = self.knots_in_band(f_low, f_high)
        return bool(np.all(np.diff(self.k_at(knots)) >= 0.0))

    def is_valley(self, f_low: float, f_high: float) -> bool:
        """Non-increasing then non-decreasing over the band (either part may
        be empty), which both solution schemes rely on."""
        diffs = np.diff(self.k_at(self.knots_in_band(f_low, f_high)))
        falling = True
        for d in diffs:
            if falling and d > 0.0:
                falling = False
            elif not falling and d < 0.0:
                return False
        return True

    def save_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(ABSORPTION_HEADER)
            for f, k in zip(self.frequency_hz, self.k_per_m):
                writer.writerow([repr(float(f)), repr(float(k))])


def load_absorption_table(source) -> AbsorptionTable:
    """Read a `frequency_hz,k_per_m` CSV from a path or file-like object."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, "r", newline="") as fh:
            text = fh.read()
    reader = csv.reader(io.StringIO(text))
    rows = [row for row in reader if row and any(cell.strip() for cell in row)]
    if not rows:
        raise IngestError("empty absorption table")
    header = tuple(cell.strip() for cell in rows[0])
    if header != ABSORPTION_HEADER:
        raise IngestError(f"expected header {ABSORPTION_HEADER}, got {header}")
    freqs = []
    ks = []
    for idx, row in enumerate(rows[1:], start=2):
        if len(row) != 2:
            raise IngestError(f"row {idx}: expected 2 columns")
        try:
            freqs.append(float(row[0]))
            ks.append(float(row[1]))
        except ValueError as exc:
            raise IngestError(f"row {idx}: non-numeric entry") from exc
    return AbsorptionTable(frequency_hz=np.array(freqs), k_per_m=np.array(ks))


def synthetic_monotone_table(
    f_low: float, f_high: float, k_low: float, k_high: float, n: int = 41
) -> AbsorptionTable:
    """Smoothly increasing k(f) (quadratic ramp) over [f_low, f_high]."""
    if not (0.0 <= k_low <= k_high):
        raise DomainError("need 0 <= k_low <= k_high")
    f = np.linspace(f_low, f_high, n)
    u = (f - f_low) / (f_high - f_low)
    k = k_low + (k_high - k_low) * (0.35 * u + 0.65 * u * u)
    return AbsorptionTable(frequency_hz=f, k_per_m=k)


def synthetic_valley_table(
    f_low: float,
    f_high: float,
    k_left: float,
    k_min: float,
    k_right: float,
    f_min: Optional[float] = None,
    n: int = 61,
) -> AbsorptionTable:
    """Valley-shaped k(f): quadratic descent to k_min at f_min, then ascent."""
    if f_min is None:
        f_min = f_low + 0.45 * (f_high - f_low)
    if not f_low < f_min < f_high:
        raise DomainError("f_min must lie strictly inside the band")
    if not (0.0 <= k_min <= min(k_left, k_right)):
        raise DomainError("need 0 <= k_min <= min(k_left, k_right)")
    f = np.linspace(f_low, f_high, n)
    k = np.where(
        f <= f_min,
        k_min + (k_left - k_min) * ((f_min - f) / (f_min - f_low)) ** 2,
        k_min + (k_right - k_min) * ((f - f_min) / (f_high - f_min)) ** 2,
    )
    return AbsorptionTable(frequency_hz=f, k_per_m=k)


# ---------------------------------------------------------------------------
# Link layer
# ---------------------------------------------------------------------------


def thz_snr(h: float, f: float, r: float, params: ThzParams, table: AbsorptionTable):
    """SNR = P_T G_T G_R c^2 / (4 pi f)^2 * h r^-2 e^(-k(f) r) / (N0 W)."""
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr <= 0.0):
        raise DomainError("r must be positive")
    kf = table.k_at(f)
    out = np.asarray(h, dtype=float) * np.exp(-kf * r_arr) / (
        params.c1() * np.square(np.asarray(f, dtype=float) * r_arr)
    )
    return float(out) if out.ndim == 0 else out


def _c2(params: ThzParams) -> float:
    return math.sqrt(2.0 * params.c1() * params.qos() * (params.rician_k + 1.0))


def p1_thz(f: float, r: float, params: ThzParams, table: AbsorptionTable) -> float:
    """Exact fading-layer success probability
    Q1(sqrt(2K), c2 * f * r * exp(k(f) r / 2)); equals 1 at r = 0."""
    if r < 0.0:
        raise DomainError("r must be >= 0")
    if r == 0.0:
        return 1.0
    b = _c2(params) * float(f) * r * math.exp(0.5 * table.k_at(float(f)) * r)
    return marcum_q1(math.sqrt(2.0 * params.rician_k), b)


# ---------------------------------------------------------------------------
# Carrier-frequency distribution
# ---------------------------------------------------------------------------


def carrier_pdf(f, params: ThzParams):
    """Density c[(f_high - f)(f - f_low)]^m on the band, in 1/Hz."""
    f = np.asarray(f, dtype=float)
    lo, hi = params.band()
    if np.any(f < lo) or np.any(f > hi):
        raise DomainError("frequency outside the hopping band")
    width = hi - lo
    u = (f - lo) / width
    m = params.m_shape
    if m == 0:
        out = np.full_like(u, 1.0 / width)
        return float(out) if out.ndim == 0 else out
    lbeta = math.lgamma(m + 1.0) * 2.0 - math.lgamma(2.0 * m + 2.0)
    with np.errstate(divide="ignore"):
        logpdf = m * (np.log(u) + np.log1p(-u)) - lbeta - math.log(width)
    out = np.where((u == 0.0) | (u == 1.0), 0.0, np.exp(logpdf))
    return float(out) if out.ndim == 0 else out


def carrier_cdf(f, params: ThzParams):
    """CDF of the carrier distribution.

    For integer m the regularized incomplete beta function reduces to a
    binomial tail, sum_{j=m+1}^{2m+1} C(2m+1, j) u^j (1-u)^(2m+1-j), whose
    terms are all positive; this stays accurate for every m, unlike the
    signed power-series expansion (see :func:`carrier_cdf_coeffs`).
    """
    f_in = np.asarray(f, dtype=float)
    lo, hi = params.band()
    if np.any(f_in < lo) or np.any(f_in > hi):
        raise DomainError("frequency outside the hopping band")
    u = np.atleast_1d((f_in - lo) / (hi - lo))
    m = params.m_shape
    if m == 0:
        out = np.clip(u, 0.0, 1.0)
    else:
        n_tot = 2 * m + 1
        out = np.where(u >= 1.0, 1.0, 0.0)
        interior = (u > 0.0) & (u < 1.0)
        ui = u[interior]
        log_u = np.log(ui)
        log_1mu = np.log1p(-ui)
        acc = np.zeros_like(ui)
        for j in range(m + 1, n_tot + 1):
            log_c = (
                math.lgamma(n_tot + 1.0)
                - math.lgamma(j + 1.0)
                - math.lgamma(n_tot - j + 1.0)
            )
            acc += np.exp(log_c + j * log_u + (n_tot - j) * log_1mu)
        out[interior] = np.minimum(acc, 1.0)
    return float(out[0]) if f_in.ndim == 0 else out


def carrier_cdf_coeffs(params: ThzParams) -> np.ndarray:
    """Power-series CDF coefficients in the normalized variable u.

    Expanding the density u^m (1-u)^m / B(m+1, m+1) binomially gives the
    CDF sum_n coeffs[n] * u^n (no constant term; the normalization anchors
    the value 1 at the upper band edge).  The signed terms cancel
    catastrophically for large m, so this path is intended for small m.
    """
    m = params.m_shape
    lbeta = math.lgamma(m + 1.0) * 2.0 - math.lgamma(2.0 * m + 2.0)
    inv_beta = math.exp(-lbeta)
    coeffs = np.zeros(2 * m + 2)
    for j in range(m + 1):
        binom = math.comb(m, j)
        power = m + j + 1  # integral of u^(m+j)
        coeffs[power] = (-1.0) ** j * binom * inv_beta / power
    return coeffs


def carrier_cdf_inverse(p: float, params: ThzParams) -> float:
    """Frequency f0 with carrier_cdf(f0) = p; exact for m = 0, else bisection."""
    if not 0.0 <= p <= 1.0:
        raise DomainError("p must lie in [0, 1]")
    lo, hi = params.band()
    if params.m_shape == 0:
        return lo + p * (hi - lo)
    a, b = lo, hi
    for _ in range(100):
        mid = 0.5 * (a + b)
        if carrier_cdf(mid, params) < p:
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)


def sample_carrier(rng: np.random.Generator, params: ThzParams, size=None):
    """Carrier draws: f_low + width * Beta(m+1, m+1)."""
    lo, hi = params.band()
    u = rng.beta(params.m_shape + 1.0, params.m_shape + 1.0, size)
    return lo + (hi - lo) * u


# ---------------------------------------------------------------------------
# Derived constants and the approximation-path threshold
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DerivedConstants:
    """Composites fixed by (params, p1): recomputed whenever either changes."""

    c1: float
    c2: float
    q: float
    p1_tilde: float
    approx: MarcumApproxCoeffs

    def __post_init__(self) -> None:
        for name in ("c1", "c2", "q", "p1_tilde"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise DomainError(f"{name} must be finite and positive")


@lru_cache(maxsize=64)
def default_marcum_coeffs(
    rician_k: float, anchors: tuple[float, float] = DEFAULT_ANCHORS
) -> MarcumApproxCoeffs:
    """Collocation coefficients for a = sqrt(2K) at the given anchors."""
    return calibrate_marcum_coeffs(math.sqrt(2.0 * rician_k), anchors[0], anchors[1])


def p1_tilde(
    p1: float, params: ThzParams, approx: MarcumApproxCoeffs
) -> float:
    """Composite threshold (1/c2) * [-ln p1 / e^nu]^(1/mu).

    Under the exponential approximation, {P1 > p1} is equivalent to
    {f * r * exp(k(f) r / 2) < p1_tilde}.
    """
    if not 0.0 < p1 < 1.0:
        raise DomainError("p1 must lie strictly in (0, 1)")
    return (-math.log(p1) / math.exp(approx.nu)) ** (1.0 / approx.mu) / _c2(params)


def derive_constants(
    params: ThzParams, p1: float, approx: Optional[MarcumApproxCoeffs] = None
) -> DerivedConstants:
    if approx is None:
        approx = default_marcum_coeffs(params.rician_k)
    return DerivedConstants(
        c1=params.c1(),
        c2=_c2(params),
        q=params.qos(),
        p1_tilde=p1_tilde(p1, params, approx),
        approx=approx,
    )


# ---------------------------------------------------------------------------
# Scenario engines
# ---------------------------------------------------------------------------


def attenuation_metric(f, r: float, table: AbsorptionTable):
    """g(f; r) = f * r * exp(k(f) r / 2), the quantity thresholded by p1_tilde."""
    f = np.asarray(f, dtype=float)
    out = f * r * np.exp(0.5 * table.k_at(f) * r)
    return float(out) if out.ndim == 0 else out


def _monotone_pieces(
    r: float, table: AbsorptionTable, f_low: float, f_high: float
) -> list[tuple[float, float]]:
    """Split the band into intervals on which g(.; r) is strictly monotone.

    On each linear segment of k(f), d ln g / df = 1/f + r s / 2 decreases in
    f, so g is either monotone there or rises then falls with the turn at
    f* = -2 / (r s) (only possible for negative slope s).
    """
    knots = table.knots_in_band(f_low, f_high)
    ks = table.k_at(knots)
    breakpoints = [float(knots[0])]
    for i in range(len(knots) - 1):
        fa, fb = float(knots[i]), float(knots[i + 1])
        slope = (ks[i + 1] - ks[i]) / (fb - fa)
        if r > 0.0 and slope < 0.0:
            f_turn = -2.0 / (r * slope)
            if fa < f_turn < fb:
                breakpoints.append(f_turn)
        breakpoints.append(fb)
    return [(breakpoints[i], breakpoints[i + 1]) for i in range(len(breakpoints) - 1)]


def _bisect_metric(
    table: AbsorptionTable, r: float, target: float, fa: float, fb: float
) -> float:
    """Root of g(f; r) = target inside the monotone interval [fa, fb]."""
    ga = attenuation_metric(fa, r, table) - target
    for _ in range(80):
        mid = 0.5 * (fa + fb)
        gm = attenuation_metric(mid, r, table) - target
        if (gm > 0.0) == (ga > 0.0):
            fa, ga = mid, gm
        else:
            fb = mid
    return 0.5 * (fa + fb)


def f_tilde_scenario1(
    r: float,
    p1_tilde_value: float,
    params: ThzParams,
    table: AbsorptionTable,
) -> Optional[float]:
    """Unique solution of g(f; r) = p1_tilde on a monotone-k band, or None.

    Requires k(f) non-decreasing over the band, which makes g strictly
    increasing in f; a non-monotone table is a scenario error.
    """
    lo, hi = params.band()
    if not table.is_monotone_nondecreasing(lo, hi):
        raise ScenarioError(
            "k(f) is not monotone non-decreasing on the band; "
            "use the valley-shape (scenario 2) engine"
        )
    if r < 0.0:
        raise DomainError("r must be >= 0")
    if r == 0.0:
        return None  # g is identically 0 < p1_tilde
    g_lo = attenuation_metric(lo, r, table)
    g_hi = attenuation_metric(hi, r, table)
    if not g_lo < p1_tilde_value < g_hi:
        return None
    return _bisect_metric(table, r, p1_tilde_value, lo, hi)


def r2_scenario1(
    p1: float,
    p2: float,
    params: ThzParams,
    table: AbsorptionTable,
    approx: Optional[MarcumApproxCoeffs] = None,
) -> float:
    """Closed-form MD reliability on a monotone-k band.

    Solve carrier_cdf(f0) = p2, then R0 = (2/k(f0)) W0(k(f0) p1t / (2 f0));
    the reliability is the nearest-distance CDF at R0,
    1 - exp(-lambda pi R0^2).  A vanishing k(f0) degenerates to R0 = p1t/f0.
    """
    if not 0.0 < p2 < 1.0:
        raise DomainError("p2 must lie strictly in (0, 1)")
    lo, hi = params.band()
    if not table.is_monotone_nondecreasing(lo, hi):
        raise ScenarioError("k(f) must be monotone non-decreasing for scenario 1")
    consts = derive_constants(params, p1, approx)
    f0 = carrier_cdf_inverse(p2, params)
    kf0 = table.k_at(f0)
    if kf0 <= 1e-300:
        r0 = consts.p1_tilde / f0
    else:
        r0 = 2.0 / kf0 * lambert_w0(0.5 * kf0 * consts.p1_tilde / f0)
    return -math.expm1(-params.intensity * math.pi * r0 * r0)


def roots_scenario2(
    r: float,
    p1_tilde_value: float,
    params: ThzParams,
    table: AbsorptionTable,
) -> tuple[float, ...]:
    """Solutions of g(f; r) = p1_tilde on a valley-shaped band, ascending.

    The piecewise-monotone decomposition of g is scanned for sign changes
    and each bracket is bisected; more than two roots means the table does
    not have the assumed valley shape.
    """
    lo, hi = params.band()
    if not table.is_valley(lo, hi):
        raise ScenarioError("k(f) is not valley-shaped on the band")
    if r < 0.0:
        raise DomainError("r must be >= 0")
    if r == 0.0:
        return ()
    roots = []
    for fa, fb in _monotone_pieces(r, table, lo, hi):
        ga = attenuation_metric(fa, r, table) - p1_tilde_value
        gb = attenuation_metric(fb, r, table) - p1_tilde_value
        if (ga > 0.0) != (gb > 0.0):
            roots.append(_bisect_metric(table, r, p1_tilde_value, fa, fb))
    roots.sort()
    if len(roots) > 2:
        raise ScenarioError(f"{len(roots)} threshold crossings; expected at most 2")
    return tuple(roots)


def _event_window(
    r: float,
    p1_tilde_value: float,
    params: ThzParams,
    table: AbsorptionTable,
) -> tuple[float, float]:
    """Frequency window on which g(f; r) < p1_tilde, by root count."""
    lo, hi = params.band()
    if r == 0.0:
        return (lo, hi)
    roots = roots_scenario2(r, p1_tilde_value, params, table)
    true_at_lo = attenuation_metric(lo, r, table) < p1_tilde_value
    if len(roots) == 0:
        return (lo, hi) if true_at_lo else (lo, lo)
    if len(roots) == 1:
        return (lo, roots[0]) if true_at_lo else (roots[0], hi)
    if true_at_lo:
        raise ScenarioError("two crossings with the event true at the band edge")
    return roots


def p2_scenario2(
    r: float,
    p1_tilde_value: float,
    params: ThzParams,
    table: AbsorptionTable,
) -> float:
    """Carrier-layer success probability carrier_cdf(F2) - carrier_cdf(F1)."""
    f1, f2 = _event_window(r, p1_tilde_value, params, table)
    if f2 <= f1:
        return 0.0
    return max(carrier_cdf(f2, params) - carrier_cdf(f1, params), 0.0)


def _superlevel_mass(
    params: ThzParams,
    boundaries: list[tuple[float, float]],
) -> float:
    """Probability mass of the nearest-distance law over radius intervals."""
    lam_pi = params.intensity * math.pi
    mass = 0.0
    for a, b in boundaries:
        mass += math.exp(-lam_pi * a * a) - math.exp(-lam_pi * b * b)
    return mass


def r2_scenario2(
    p1: float,
    p2: float,
    params: ThzParams,
    table: AbsorptionTable,
    dr: Optional[float] = None,
    approx: Optional[MarcumApproxCoeffs] = None,
    tail_mass: float = 1e-8,
) -> float:
    """MD reliability on a valley-shaped band by radial integration.

    The radial indicator 1[P2(r) > p2] is scanned on a midpoint grid of
    step dr (default 0.05/sqrt(lambda pi)) out to the radius where the
    nearest-distance tail falls below ``tail_mass``; each indicator flip is
    refined by bisection and the nearest-distance density is integrated
    exactly over the resulting super-level intervals.  The result must move
    by less than 1e-3 when dr is halved, otherwise an accuracy error is
    raised.  g(f; r) increases in r pointwise, so P2(r) is non-increasing
    and the super-level set is typically the single interval [0, r*).
    """
    if not 0.0 < p2 < 1.0:
        raise DomainError("p2 must lie strictly in (0, 1)")
    lo, hi = params.band()
    if not table.is_valley(lo, hi):
        raise ScenarioError("k(f) is not valley-shaped on the band")
    lam_pi = params.intensity * math.pi
    if dr is None:
        dr = 0.05 / math.sqrt(lam_pi)
    if dr <= 0.0:
        raise DomainError("dr must be positive")
    consts = derive_constants(params, p1, approx)
    r_max = math.sqrt(-math.log(tail_mass) / lam_pi)

    def indicator(r: float) -> bool:
        return p2_scenario2(r, consts.p1_tilde, params, table) > p2

    def integrate(step: float) -> float:
        n_steps = max(int(math.ceil(r_max / step)), 2)
        grid = [0.0] + [(i + 0.5) * step for i in range(n_steps)]
        signs = [indicator(r) for r in grid]
        intervals: list[tuple[float, float]] = []
        start: Optional[float] = 0.0 if signs[0] else None
        for i in range(1, len(grid)):
            if signs[i] == signs[i - 1]:
                continue
            a, b = grid[i - 1], grid[i]
            for _ in range(60):
                mid = 0.5 * (a + b)
                if indicator(mid) == signs[i - 1]:
                    a = mid
                else:
                    b = mid
            crossing = 0.5 * (a + b)
            if signs[i]:
                start = crossing
            else:
                intervals.append((start if start is not None else 0.0, crossing))
                start = None
        if start is not None:
            intervals.append((start, r_max))
        return _superlevel_mass(params, intervals)

    coarse = integrate(dr)
    fine = integrate(0.5 * dr)
    if abs(fine - coarse) > 1e-3:
        raise AccuracyError(
            f"radial step {dr:.6g} too coarse: halving moved the result by "
            f"{abs(fine - coarse):.3e} (> 1e-3)"
        )
    return min(max(fine, 0.0), 1.0)


# ---------------------------------------------------------------------------
# Monte Carlo bindings
# ---------------------------------------------------------------------------


def thz_layered_model(params: ThzParams, table: AbsorptionTable) -> LayeredModel:
    """LayeredModel with layers (fading, carrier, nearest-BS distance)."""
    lo, hi = params.band()
    if not table.covers(lo, hi):
        raise ConfigurationError("absorption table does not cover the band")
    lam_pi = params.intensity * math.pi
    c1 = params.c1()
    q = params.qos()
    k_shape = params.rician_k
    mean_amp = math.sqrt(k_shape / (k_shape + 1.0))
    sigma = math.sqrt(0.5 / (k_shape + 1.0))

    def sample_distance(rng, above):
        return math.sqrt(rng.standard_exponential() / lam_pi)

    def sample_freq(rng, above):
        return float(sample_carrier(rng, params))

    def sample_fading(rng, above):
        re = mean_amp + sigma * rng.standard_normal()
        im = sigma * rng.standard_normal()
        return re * re + im * im

    def qos(states):
        r, f, h = states
        return h * math.exp(-table.k_at(f) * r) / (c1 * (f * r) ** 2)

    def inner_batch(rng, above, size):
        r, f = above
        re = mean_amp + sigma * rng.standard_normal(size)
        im = sigma * rng.standard_normal(size)
        h = re * re + im * im
        return h * math.exp(-table.k_at(f) * r) / (c1 * (f * r) ** 2)

    return LayeredModel(
        layers=(sample_fading, sample_freq, sample_distance),
        qos=qos,
        inner_batch=inner_batch,
    )


def run_thz_mc(
    params: ThzParams,
    table: AbsorptionTable,
    query: MdQuery,
    seed: int,
    exact_inner: bool = False,
) -> MdEstimate:
    """Second-order MD reliability of the THz model by nested MC.

    With ``exact_inner`` the fading loop is replaced by the exact Marcum
    success probability (threshold comparison), removing inner-layer noise;
    the default runs the full three-loop estimator.
    """
    if len(query.p) != 2:
        raise ConfigurationError("THz MC is second order: need two thresholds")
    if abs(query.q - params.qos()) > 1e-12 * max(1.0, abs(params.qos())):
        raise ConfigurationError("query.q must equal the params QoS threshold")
    if exact_inner:
        grid = run_thz_mc_grid(
            params,
            table,
            (query.p[0],),
            (query.p[1],),
            (query.trials[0], query.trials[1], query.trials[2]),
            seed,
            exact_inner=True,
        )
        return MdEstimate(
            value=float(grid.values[0, 0]),
            stderr=float(grid.stderr[0, 0]),
            trials=query.trials,
            seed=seed,
        )
    model = thz_layered_model(params, table)
    return nested_md_estimate(model, query, seed)


def run_thz_mc_grid(
    params: ThzParams,
    table: AbsorptionTable,
    p1_grid: Sequence[float],
    p2_grid: Sequence[float],
    trials: tuple[int, int, int],
    seed: int,
    exact_inner: bool = False,
) -> GridEstimate:
    """Second-order THz estimates over a (p1, p2) grid, one shared sample set."""
    lo, hi = params.band()
    if not table.covers(lo, hi):
        raise ConfigurationError("absorption table does not cover the band")
    p1g = np.asarray(sorted(float(p) for p in p1_grid))
    p2g = np.asarray(sorted(float(p) for p in p2_grid))
    if np.any((p1g <= 0) | (p1g >= 1)) or np.any((p2g <= 0) | (p2g >= 1)):
        raise DomainError("thresholds must lie strictly in (0, 1)")
    n0, n1, n2 = (int(n) for n in trials)
    if min(n0, n1, n2) < 1:
        raise DomainError("all trial counts must be >= 1")
    lam_pi = params.intensity * math.pi
    c1q = params.c1() * params.qos()
    k_shape = params.rician_k
    mean_amp = math.sqrt(k_shape / (k_shape + 1.0))
    sigma = math.sqrt(0.5 / (k_shape + 1.0))
    a = math.sqrt(2.0 * k_shape)
    if exact_inner:
        # exact P1 > p1 is a threshold comparison through the Marcum inverse
        b_stars = np.array([marcum_q1_inverse_b(a, p) for p in p1g])
        h_stars = np.square(b_stars) / (2.0 * (k_shape + 1.0))
    counts = np.zeros((p1g.size, p2g.size), dtype=np.int64)
    for i in range(n2):
        rng = derive_rng(seed, 2, i)
        r = math.sqrt(rng.standard_exponential() / lam_pi)
        f = sample_carrier(rng, params, n1)
        kf = table.k_at(f)
        h_threshold = c1q * np.square(f * r) * np.exp(kf * r)
        if exact_inner:
            # success iff the fading threshold is below the Marcum one
            p2_est = (h_threshold[None, :] < h_stars[:, None]).mean(axis=1)
        else:
            re = mean_amp + sigma * rng.standard_normal((n1, n0), dtype=np.float32)
            im = sigma * rng.standard_normal((n1, n0), dtype=np.float32)
            h = re * re + im * im
            p1_est = (h > h_threshold[:, None].astype(np.float32)).mean(axis=1)
            p2_est = (p1_est[None, :] > p1g[:, None]).mean(axis=1)
        counts += p2_est[:, None] > p2g[None, :]
    values = counts / n2
    stderr = np.sqrt(values * (1.0 - values) / n2)
    return GridEstimate(
        p1_grid=tuple(p1g),
        p2_grid=tuple(p2g),
        values=values,
        stderr=stderr,
        trials=(n0, n1, n2),
        seed=seed,
    )


def optimal_bandwidth_sweep(
    params: ThzParams,
    table: AbsorptionTable,
    p1: float,
    p2: float,
    bw_grid: Sequence[float],
    dr: Optional[float] = None,
    approx: Optional[MarcumApproxCoeffs] = None,
) -> tuple[list[tuple[float, float]], float]:
    """Reliability versus hopping bandwidth (f_low, f_low + BW).

    Returns the (BW, R) rows and the argmax bandwidth.  The noise bandwidth
    and QoS threshold stay fixed; only the hopping band changes.
    """
    rows = []
    for bw in bw_grid:
        if bw <= 0.0:
            raise DomainError("bandwidths must be positive")
        sub = replace(params, f_high_hz=params.f_low_hz + float(bw))
        if not table.covers(*sub.band()):
            raise DomainError(
                f"table does not cover the band up to {sub.f_high_hz:.4g} Hz"
            )
        rows.append((float(bw), r2_scenario2(p1, p2, sub, table, dr=dr, approx=approx)))
    best = max(range(len(rows)), key=lambda i: rows[i][1])
    return rows, rows[best][0]
