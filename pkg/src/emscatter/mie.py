"""Exact Mie-series total scattering cross-section for a transparent sphere.

The benchmark every approximation in this package is judged against.  The
partial-wave sum is written as ratios of 2x2 determinants built from
spherical Bessel functions of the interior (n k R) and exterior (k R)
arguments, in the e^{-ikz} / h2 time convention:

    sigma_N = (2/xi^2) Re sum_l (2l+1) [ A_l + B_l ],

where A_l carries the n^2 weight on the interior column and B_l does not.
Riccati-Bessel derivatives are evaluated through the recurrence identity
d/dz [z f_l(z)] = z f_{l-1}(z) - l f_l(z), never by finite differences.

``mie_sigma`` is the primary implementation (package Bessel routines);
``mie_sigma_cf`` is an independently formulated cross-check using a
logarithmic-derivative continued fraction and scipy backends, kept free
of shared numerics so the two can arbitrate each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as _sp

from .approx import AmplitudeResult, Method
from .config import ScatterConfig
from .specfun import spherical_h2_all, spherical_j_all

__all__ = [
    "MieTruncation",
    "MieConvergenceError",
    "DegenerateDeterminantError",
    "mie_term",
    "mie_sigma",
    "mie_sigma_cf",
]

# relative size of the largest late term for the series to count as converged
TAIL_REL_TOL = 1e-12
# |determinant| below this is treated as an exact zero denominator
DET_DEGENERATE_FLOOR = 1e-300


class MieConvergenceError(RuntimeError):
    """Partial sums did not meet the tail criterion at the truncation order."""


class DegenerateDeterminantError(RuntimeError):
    """A denominator determinant vanished to the degeneracy floor."""


@dataclass(frozen=True)
class MieTruncation:
    """Truncation policy: fixed order, or size-adaptive with a margin.

    Adaptive order is ceil(kR + 4 (kR)^(1/3) + margin); the constant 4 is
    deliberately generous so the explicit tail check passes for kR <= 200.
    """

    fixed_terms: int | None = None
    margin: int = 10

    @classmethod
    def auto(cls, margin: int = 10) -> "MieTruncation":
        return cls(fixed_terms=None, margin=margin)

    @classmethod
    def fixed(cls, terms: int) -> "MieTruncation":
        if terms < 1:
            raise ValueError("need at least one series term")
        return cls(fixed_terms=terms)

    def terms(self, kR: float) -> int:
        if self.fixed_terms is not None:
            return self.fixed_terms
        return int(math.ceil(kR + 4.0 * kR ** (1.0 / 3.0) + self.margin))


def _require_transparent(cfg: ScatterConfig) -> float:
    if cfg.chi.imag != 0:
        raise ValueError("Mie series implemented for real n (transparent sphere)")
    n = cfg.n.real
    if n < 1.0:
        raise ValueError("Mie series implemented for n >= 1")
    return n


def _series_tables(cfg: ScatterConfig, L: int):
    """Bessel tables and Riccati derivatives for orders 0..L."""
    n = _require_transparent(cfg)
    xi = cfg.kR
    jx = spherical_j_all(L, xi)
    jnx = spherical_j_all(L, n * xi)
    h2x, valid = spherical_h2_all(L, xi)
    ells = np.arange(1, L + 1)
    with np.errstate(invalid="ignore", over="ignore"):
        dpsi_x = xi * jx[:-1] - ells * jx[1:]
        dpsi_nx = n * xi * jnx[:-1] - ells * jnx[1:]
        dzeta_x = xi * h2x[:-1] - ells * h2x[1:]
    return n, jx, jnx, h2x, dpsi_x, dpsi_nx, dzeta_x, valid


def _det_ratios(n, jx, jnx, h2x, dpsi_x, dpsi_nx, dzeta_x, ell):
    i = ell - 1
    num_a = n * n * jnx[ell] * dpsi_x[i] - jx[ell] * dpsi_nx[i]
    den_a = n * n * jnx[ell] * dzeta_x[i] - h2x[ell] * dpsi_nx[i]
    num_b = jnx[ell] * dpsi_x[i] - jx[ell] * dpsi_nx[i]
    den_b = jnx[ell] * dzeta_x[i] - h2x[ell] * dpsi_nx[i]
    if abs(den_a) < DET_DEGENERATE_FLOOR or abs(den_b) < DET_DEGENERATE_FLOOR:
        raise DegenerateDeterminantError(f"denominator determinant ~ 0 at l = {ell}")
    return num_a / den_a, num_b / den_b


def mie_term(ell: int, cfg: ScatterConfig) -> tuple[complex, complex]:
    """The two determinant ratios (electric-type, magnetic-type) at order l."""
    if ell < 1:
        raise ValueError("partial-wave order starts at l = 1")
    tables = _series_tables(cfg, ell)
    n, jx, jnx, h2x, dpsi_x, dpsi_nx, dzeta_x, valid = tables
    if ell >= valid:
        return 0.0 + 0j, 0.0 + 0j
    return _det_ratios(n, jx, jnx, h2x, dpsi_x, dpsi_nx, dzeta_x, ell)


def mie_sigma(cfg: ScatterConfig, trunc: MieTruncation | None = None) -> AmplitudeResult:
    """Normalized Mie cross-section sigma_N = sigma_sc / (pi R^2).

    Sums partial waves in ascending l; raises MieConvergenceError when the
    final terms are not negligible at the requested truncation, and
    DegenerateDeterminantError on a vanishing denominator.
    """
    if trunc is None:
        trunc = MieTruncation.auto()
    xi = cfg.kR
    if xi > 200.0:
        raise ValueError("Mie benchmark restricted to kR <= 200")
    L = trunc.terms(xi)
    tables = _series_tables(cfg, L)
    n, jx, jnx, h2x, dpsi_x, dpsi_nx, dzeta_x, valid = tables

    total = 0.0
    recent: list[float] = []
    negligible_run = 0
    for ell in range(1, L + 1):
        if ell >= valid:
            # Hankel overflow: the remaining ratios are numerically zero
            break
        ra, rb = _det_ratios(n, jx, jnx, h2x, dpsi_x, dpsi_nx, dzeta_x, ell)
        contrib = (2 * ell + 1) * (ra + rb).real
        total += contrib
        recent = (recent + [abs(contrib)])[-3:]
        if abs(contrib) < 1e-17 * max(abs(total), 1e-300):
            negligible_run += 1
            if negligible_run >= 4:
                break
        else:
            negligible_run = 0

    if total != 0.0 and negligible_run < 4 and valid > L:
        tail = max(recent) / max(abs(total), 1e-300)
        if tail > TAIL_REL_TOL:
            raise MieConvergenceError(
                f"tail term {tail:.2e} above {TAIL_REL_TOL:.0e} at L = {L}; "
                "increase the truncation margin"
            )

    sigma_n = 2.0 / (xi * xi) * total
    return AmplitudeResult(
        forward_amplitude=None,
        sigma_sc=sigma_n * cfg.geometric_cross_section,
        sigma_n=sigma_n,
        method=Method.MIE,
    )


# ---------------------------------------------------------------------------
# independent cross-check implementation
# ---------------------------------------------------------------------------


def _psi_prev_over_psi(ell: int, z: float, tol: float = 1e-15, maxit: int = 20000) -> float:
    """psi_{l-1}(z) / psi_l(z) by a modified Lentz continued fraction."""
    tiny = 1e-290
    f = (2 * ell + 1) / z or tiny
    c = f
    d = 0.0
    for j in range(1, maxit):
        b = (2 * (ell + j) + 1) / z
        d = b - d
        if d == 0.0:
            d = tiny
        c = b - 1.0 / c
        if c == 0.0:
            c = tiny
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < tol:
            return f
    raise MieConvergenceError("logarithmic-derivative continued fraction stalled")


def mie_sigma_cf(cfg: ScatterConfig, trunc: MieTruncation | None = None) -> float:
    """sigma_N via logarithmic derivatives D_l = psi_l'/psi_l (Lentz CF).

    Interior-argument information enters only through D_l computed by
    continued fraction; exterior Riccati functions come from scipy.  Used
    as the arbitration oracle for ``mie_sigma``.
    """
    if trunc is None:
        trunc = MieTruncation.auto()
    n = _require_transparent(cfg)
    xi = cfg.kR
    L = trunc.terms(xi)
    ells = np.arange(0, L + 1)
    j = _sp.spherical_jn(ells, xi)
    y = _sp.spherical_yn(ells, xi)
    psi = xi * j
    zeta = xi * (j - 1j * y)
    total = 0.0
    for ell in range(1, L + 1):
        if not (np.isfinite(zeta[ell].real) and np.isfinite(zeta[ell].imag)):
            break
        d_int = _psi_prev_over_psi(ell, n * xi) - ell / (n * xi)
        fa = d_int / n + ell / xi
        fb = n * d_int + ell / xi
        ra = (fa * psi[ell] - psi[ell - 1]) / (fa * zeta[ell] - zeta[ell - 1])
        rb = (fb * psi[ell] - psi[ell - 1]) / (fb * zeta[ell] - zeta[ell - 1])
        contrib = (2 * ell + 1) * (ra + rb).real
        total += contrib
        if abs(contrib) < 1e-17 * max(abs(total), 1e-300):
            break
    return 2.0 / (xi * xi) * total
