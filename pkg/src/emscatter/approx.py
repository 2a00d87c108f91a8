"""Closed-form approximations to the forward amplitude and cross section.

The ladder, from weakest to strongest assumptions:

* ``rayleigh_quartic``  -- small-sphere inverse-fourth-power law.
* ``rayleigh_gans``     -- first Born cross section for a transparent ball.
* ``born_amplitude``    -- full complex first Born forward amplitude.
* ``van_de_hulst``      -- scalar anomalous-diffraction asymptote.
* ``evans_fournier``    -- van de Hulst with the empirical large-size factor.
* ``semigroup_amplitude`` -- non-perturbative closed form built from a
  volume term (``f1_amplitude``) plus a surface-gradient correction term
  (``f2_amplitude``); it reproduces the Born result for small chi while
  honoring the long-run decay of the evolution semigroup exp(-i tau G).

All amplitudes carry units of length^2 and refer to the incident wave
e_x exp(-ikz) on the ball ``O(0, R)``.  For transparent spheres (real chi)
the total scattering cross-section is the imaginary part of the forward
amplitude; for absorbing media the imaginary part is extinction-like and
is reported as ``sigma_sc`` without claiming it separates scattering from
absorption.
"""

from __future__ import annotations

import cmath
import enum
import math
import warnings
from dataclasses import dataclass

from .config import ScatterConfig
from .specfun import (
    BranchTag,
    _ei_series,
    _log_lower,
    cosint_ci,
    euler_gamma,
    expint_ei,
    sinint_si,
)

__all__ = [
    "Method",
    "AmplitudeResult",
    "ValidityWarning",
    "rayleigh_gans",
    "rayleigh_quartic",
    "van_de_hulst",
    "evans_fournier",
    "f1_amplitude",
    "f2_amplitude",
    "f1_uses_series_fallback",
    "semigroup_amplitude",
    "small_n_expansion",
    "born_amplitude",
]

# below |n-1| kR = 1e-2 the closed-form brackets lose ~4 digits per decade;
# switch to their Taylor series
SERIES_FALLBACK_THRESHOLD = 1e-2

# the surface-corrected closed form has a pole at chi = -1 and a cut for
# chi < -1; past n = sqrt(2) it is extrapolation
VALIDITY_INDEX_LIMIT = math.sqrt(2.0)


class ValidityWarning(UserWarning):
    """Emitted when a formula is evaluated outside its trusted range."""


class Method(enum.Enum):
    MIE = "mie"
    RAYLEIGH_GANS = "rayleigh_gans"
    SEMIGROUP = "semigroup"
    VAN_DE_HULST = "vdh"
    EVANS_FOURNIER = "evans_fournier"
    RAYLEIGH_QUARTIC = "rayleigh_quartic"
    BORN = "born"


@dataclass(frozen=True)
class AmplitudeResult:
    """Forward amplitude (length^2) with derived cross sections.

    ``sigma_sc`` equals Im(forward_amplitude) for the semigroup and Born
    methods; ``sigma_n`` is sigma_sc normalized by the geometric cross
    section pi R^2.  Methods that only define a cross section (Mie series,
    van de Hulst, ...) leave ``forward_amplitude`` as None.
    """

    forward_amplitude: complex | None
    sigma_sc: float
    sigma_n: float
    method: Method


def _require_real_chi(cfg: ScatterConfig, what: str) -> float:
    if cfg.chi.imag != 0:
        raise ValueError(f"{what} requires real chi")
    return cfg.chi.real


def _rg_bracket(kR: float) -> float:
    """The curly-brace factor of the Rayleigh-Gans cross section."""
    s = 4.0 * kR
    return (
        2.5
        + 2.0 * kR * kR
        - math.sin(s) / s
        - 7.0 * (1.0 - math.cos(s)) / (16.0 * kR * kR)
        + (0.5 / (kR * kR) - 2.0) * (euler_gamma() + math.log(s) - cosint_ci(s))
    )


def rayleigh_gans(cfg: ScatterConfig) -> AmplitudeResult:
    """First Born total scattering cross-section of a transparent ball."""
    chi = _require_real_chi(cfg, "rayleigh_gans")
    sigma = math.pi * cfg.R**2 * chi**2 / 4.0 * _rg_bracket(cfg.kR)
    amp = _born_forward_amplitude(cfg, sigma_im=sigma)
    return AmplitudeResult(
        forward_amplitude=amp,
        sigma_sc=sigma,
        sigma_n=sigma / cfg.geometric_cross_section,
        method=Method.RAYLEIGH_GANS,
    )


def rayleigh_quartic(cfg: ScatterConfig) -> float:
    """Small-sphere limit 8 pi k^4 R^6 chi^2 / 27."""
    chi = _require_real_chi(cfg, "rayleigh_quartic")
    return 8.0 * math.pi * cfg.k**4 * cfg.R**6 * chi**2 / 27.0


def van_de_hulst(rho: float) -> float:
    """Anomalous-diffraction sigma_N at phase shift rho = 2(n-1)kR."""
    if rho < 0:
        raise ValueError("phase shift rho must be >= 0")
    if rho < 1e-3:
        r2 = rho * rho
        return r2 / 2.0 - r2 * r2 / 36.0 + r2 * r2 * r2 / 1440.0
    return 2.0 - 4.0 / rho * math.sin(rho) + 4.0 / rho**2 * (1.0 - math.cos(rho))


def evans_fournier(cfg: ScatterConfig) -> float:
    """van de Hulst sigma_N times the empirical factor 2 - exp(-(kR)^(-2/3)).

    The factor was fitted for 1.01 <= n <= 2.00; outside that range a
    ValidityWarning is emitted and the value is still returned.
    """
    _require_real_chi(cfg, "evans_fournier")
    n = cfg.n.real
    if not 1.01 <= n <= 2.00:
        warnings.warn(
            f"Evans-Fournier factor fitted for 1.01 <= n <= 2.00, got n = {n:.4g}",
            ValidityWarning,
            stacklevel=2,
        )
    rho = 2.0 * (n - 1.0) * cfg.kR
    factor = 2.0 - math.exp(-cfg.kR ** (-2.0 / 3.0))
    return van_de_hulst(rho) * factor


def _bracket_direct(x: complex) -> complex:
    """1 - e^{-x}(1 + x), accurate for |x| away from 0."""
    return 1.0 - cmath.exp(-x) * (1.0 + x)


def _bracket_series_over(w: complex, d: complex) -> complex:
    """(1 - e^{-x}(1+x)) / d^2 for x = w*d, summed as a series in x.

    Dividing term-by-term keeps the removable d -> 0 limit exact:
    sum_{m>=2} (-1)^m (m-1)/m! w^m d^(m-2).
    """
    total = 0.0 + 0j
    term_wd = w * w  # w^m d^{m-2} running value
    fact = 2.0  # m!
    sign = 1.0
    for m in range(2, 60):
        contrib = sign * (m - 1) / fact * term_wd
        total += contrib
        if abs(contrib) < 1e-18 * (abs(total) + 1e-300):
            break
        term_wd *= w * d
        fact *= m + 1
        sign = -sign
    return total


def f1_uses_series_fallback(cfg: ScatterConfig) -> bool:
    """True when the volume-term brackets are summed as Taylor series."""
    return (
        abs((cfg.n - 1.0) * cfg.kR) < SERIES_FALLBACK_THRESHOLD
        or abs((cfg.n + 1.0) * cfg.kR) < SERIES_FALLBACK_THRESHOLD
    )


def f1_amplitude(cfg: ScatterConfig) -> complex:
    """Volume term of the non-perturbative forward amplitude.

    Closed form of <E_inc, -chi k F1> where F1 adds to the incident wave
    the ball convolution of E_inc with the kernel exp(-i n k r)/(4 pi r)
    times chi k^2.  Near-cancellation brackets switch to series below
    |n-1| kR = 1e-2 (see ``f1_uses_series_fallback``).
    """
    n, k, R = cfg.n, cfg.k, cfg.R
    kR = cfg.kR
    xm = 2j * (n - 1.0) * kR
    xp = 2j * (n + 1.0) * kR

    if abs((n - 1.0) * kR) < SERIES_FALLBACK_THRESHOLD:
        bm_over = _bracket_series_over(2j * kR, n - 1.0)
    else:
        bm_over = _bracket_direct(xm) / (n - 1.0) ** 2
    if abs((n + 1.0) * kR) < SERIES_FALLBACK_THRESHOLD:
        bp_over = _bracket_series_over(2j * kR, n + 1.0)
    else:
        bp_over = _bracket_direct(xp) / (n + 1.0) ** 2

    pref = 1j * math.pi / (4.0 * k * k)
    return 2j * math.pi * n * R * R + pref * (
        (n + 1.0) ** 2 * bm_over - (n - 1.0) ** 2 * bp_over
    )


def _f2_bracket(cfg: ScatterConfig) -> complex:
    """Ei(-2i(n-1)kR) - Ei(-2i(n+1)kR) + log((n+1)/(n-1)) on the lower branch.

    For |n-1| kR below the fallback threshold the log singularities of the
    first and last terms are cancelled symbolically before evaluation.
    """
    n, kR = cfg.n, cfg.kR
    zm = -2j * (n - 1.0) * kR
    zp = -2j * (n + 1.0) * kR
    if abs((n - 1.0) * kR) < SERIES_FALLBACK_THRESHOLD:
        if abs(zp) <= 1.5:
            return _ei_series(zm) - _ei_series(zp)
        return euler_gamma() + _log_lower(zp) + _ei_series(zm) - expint_ei(zp, cfg.branch)
    return (
        expint_ei(zm, cfg.branch)
        - expint_ei(zp, cfg.branch)
        + cmath.log((n + 1.0) / (n - 1.0))
    )


def f2_amplitude(cfg: ScatterConfig) -> complex:
    """Surface-gradient correction term of the non-perturbative amplitude.

    Closed form of <E_inc, -chi k F2> where F2 = chi/(1+chi) grad div of
    the ball convolution; the same near-cancellation guard as the volume
    term applies to its exponential-integral bracket.
    """
    n, k = cfg.n, cfg.k
    chi = cfg.chi
    kR = cfg.kR
    if chi == -1 or n == 0:
        raise ValueError("surface term is singular at chi = -1 (n = 0)")
    bracket = _f2_bracket(cfg)
    t1 = -2j * chi * chi * (2.0 * (chi + 2.0) * kR * kR - 1.0) * bracket
    t2 = 4j * n * (2.0 * chi * chi * kR * kR - chi - 2.0)
    t3 = cmath.exp(-2j * (n + 1.0) * kR) * (n - 1.0) ** 2 * (
        2.0 * (n + 1.0) * (chi + 2.0) * kR + 1j * (n * n + 4.0 * n + 1.0)
    )
    t4 = -cmath.exp(-2j * (n - 1.0) * kR) * (n + 1.0) ** 2 * (
        2.0 * (n - 1.0) * (chi + 2.0) * kR + 1j * (n * n - 4.0 * n + 1.0)
    )
    return math.pi / (16.0 * k * k * n * n) * (t1 + t2 + t3 + t4)


def semigroup_amplitude(cfg: ScatterConfig) -> AmplitudeResult:
    """Non-perturbative forward amplitude: volume plus surface terms.

    For real chi the evaluation is the limit from Im chi < 0.  Results for
    Re n >= sqrt(2) are emitted with a ValidityWarning: the closed form
    has a pole at chi = -1 and its trusted region ends near |chi| = 1.
    """
    if cfg.n.real >= VALIDITY_INDEX_LIMIT:
        warnings.warn(
            f"semigroup amplitude extrapolated beyond n = sqrt(2) (n = {cfg.n:.4g})",
            ValidityWarning,
            stacklevel=2,
        )
    amp = f1_amplitude(cfg) + f2_amplitude(cfg)
    sigma = amp.imag
    return AmplitudeResult(
        forward_amplitude=amp,
        sigma_sc=sigma,
        sigma_n=sigma / cfg.geometric_cross_section,
        method=Method.SEMIGROUP,
    )


def _second_order_coeff(k: float, R: float) -> complex:
    """Coefficient of (n-1)^2 in the small-contrast amplitude expansion."""
    kR = k * R
    s = 4.0 * kR
    g0 = euler_gamma()
    log_term = sinint_si(s) + 1j * cosint_ci(s) - 1j * math.log(s) - 1j * g0
    inner = (
        (4.0 * kR * kR - 1.0) / 2.0 * log_term
        + 1j * (2.0 * kR**4 + (8.0 / 3.0) * 1j * kR**3 + 2.5 * kR * kR - 7.0 / 16.0)
        + cmath.exp(-1j * s) * (kR / 4.0 + 7j / 16.0)
    )
    return math.pi / (k * k) * inner


def small_n_expansion(cfg: ScatterConfig) -> complex:
    """Forward amplitude through second order in (n - 1).

    The first-order term -(n-1) 8 pi k R^3 / 3 is purely real for
    transparent spheres; scattering starts at second order.
    """
    n = cfg.n
    if abs(n - 1.0) > 0.2:
        raise ValueError("small-contrast expansion requires |n - 1| <= 0.2")
    first = -(n - 1.0) * 8.0 * math.pi * cfg.k * cfg.R**3 / 3.0
    return first + (n - 1.0) ** 2 * _second_order_coeff(cfg.k, cfg.R)


def _born_forward_amplitude(cfg: ScatterConfig, sigma_im: float | None = None) -> complex:
    """First Born forward amplitude -chi k <E_inc,(I + chi G)E_inc>.

    The chi^2 coefficient is chi-independent and equals
    pi k R^3 / 3 + C/4 with C the second-order small-contrast coefficient.
    For real chi the imaginary part is substituted by the Rayleigh-Gans
    value so the two agree bit for bit.
    """
    chi, k, R = cfg.chi, cfg.k, cfg.R
    quad_coeff = math.pi * k * R**3 / 3.0 + _second_order_coeff(k, R) / 4.0
    amp = -(4.0 * math.pi / 3.0) * chi * k * R**3 + chi * chi * quad_coeff
    if chi.imag == 0:
        if sigma_im is None:
            sigma_im = math.pi * R**2 * chi.real**2 / 4.0 * _rg_bracket(cfg.kR)
        amp = complex(amp.real, sigma_im)
    return amp


def born_amplitude(cfg: ScatterConfig) -> AmplitudeResult:
    """First Born forward amplitude; Im part is the Rayleigh-Gans value."""
    amp = _born_forward_amplitude(cfg)
    sigma = amp.imag
    return AmplitudeResult(
        forward_amplitude=amp,
        sigma_sc=sigma,
        sigma_n=sigma / cfg.geometric_cross_section,
        method=Method.BORN,
    )
