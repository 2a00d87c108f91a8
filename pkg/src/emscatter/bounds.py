"""Norm bounds for the Green operator and Born-approximation error budgets.

G(kR) bounds the operator norm of the Green operator on divergence-free
fields; g(kR) bounds its positive-definite anti-Hermitian part.  From
these follow an a-priori field error for the first Born approximation, a
cross-section error bound for transparent spheres, and two quick validity
criteria for deciding whether the perturbative route is trustworthy.

Two published variants of the linear coefficient in G(kR) circulate:
4/5 inside the norm bound display and 109/80 inside the phase criterion.
Both are kept verbatim in their respective places rather than silently
reconciled; ``green_norm_bound`` uses 4/5 and ``validity_criteria`` uses
109/80.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .config import ScatterConfig

__all__ = [
    "BoundReport",
    "ValidityReport",
    "green_norm_bound",
    "gamma_s_bound",
    "born_field_error",
    "cross_section_error",
    "validity_criteria",
    "bound_report",
]

DIVERGENT = math.inf


def green_norm_bound(kR: float) -> float:
    """Operator-norm bound G(kR) for the Green operator."""
    if kR <= 0:
        raise ValueError("kR must be > 0")
    cube = (kR + 0.5) ** (1.0 / 3.0)
    quad_branch = 0.5 + 3.0 / (5.0 * math.pi) * (4.0 * math.pi / 3.0) ** (2.0 / 3.0) * kR**2
    lin_branch = 2.0 + 0.8 * kR + (cube + 4.0 / (9.0 * cube)) / (2.0 * math.pi)
    return min(quad_branch, lin_branch) + gamma_s_bound(kR)


def gamma_s_bound(kR: float) -> float:
    """Norm bound g(kR) for the positive part -(G - G*)/(2i)."""
    if kR <= 0:
        raise ValueError("kR must be > 0")
    return min(11.0 / 45.0 * kR**3, 9.0 / 16.0 * kR)


def born_field_error(cfg: ScatterConfig) -> float:
    """Relative field error bound |chi| G / (1 - |chi| G) for the Born step.

    Returns DIVERGENT (inf) when |chi| G(kR) >= 1, i.e. outside the
    guaranteed-convergence region of the Neumann series.
    """
    x = abs(cfg.chi) * green_norm_bound(cfg.kR)
    if x >= 1.0:
        return DIVERGENT
    return x / (1.0 - x)


def cross_section_error(cfg: ScatterConfig) -> float:
    """Cross-section error bound for the Born approximation, real chi.

    (4 pi R^2 / 3) |chi|^3 kR g G (|chi| G + 2) / (1 - chi G)^2, valid
    while |chi| G(kR) < 1; DIVERGENT otherwise.
    """
    if cfg.chi.imag != 0:
        raise ValueError("cross-section error bound requires real chi")
    chi = cfg.chi.real
    kR = cfg.kR
    G = green_norm_bound(kR)
    if abs(chi) * G >= 1.0:
        return DIVERGENT
    g = gamma_s_bound(kR)
    return (
        (4.0 * math.pi * cfg.R**2 / 3.0)
        * abs(chi) ** 3
        * kR
        * g
        * G
        * (abs(chi) * G + 2.0)
        / (1.0 - chi * G) ** 2
    )


@dataclass(frozen=True)
class ValidityReport:
    """Quick Born-validity screen.

    ``phase_ok``: |chi| [2 + (109/80) kR + ...] < 1, the phase-shift
    criterion with the 109/80 coefficient variant.
    ``small_sphere_factor``: the small-radius relative-error factor
    (11/10) |chi| (|chi| + 4) / (2 - |chi|)^2, compared against the
    caller's threshold in ``small_sphere_ok``.
    """

    phase_ok: bool
    small_sphere_factor: float
    small_sphere_ok: bool
    threshold: float


def validity_criteria(cfg: ScatterConfig, rel_err_threshold: float = 0.1) -> ValidityReport:
    """Evaluate both Born validity criteria for a transparent sphere."""
    if cfg.chi.imag != 0:
        raise ValueError("validity criteria stated for real chi")
    chi = abs(cfg.chi.real)
    kR = cfg.kR
    cube = (kR + 0.5) ** (1.0 / 3.0)
    phase_val = chi * (2.0 + 109.0 / 80.0 * kR + (cube + 4.0 / (9.0 * cube)) / (2.0 * math.pi))
    factor = 1.1 * chi * (chi + 4.0) / (2.0 - chi) ** 2 if chi != 2.0 else DIVERGENT
    return ValidityReport(
        phase_ok=phase_val < 1.0,
        small_sphere_factor=factor,
        small_sphere_ok=factor < rel_err_threshold,
        threshold=rel_err_threshold,
    )


@dataclass(frozen=True)
class BoundReport:
    """All scalar bounds for one (chi, kR) point."""

    g_norm_bound: float
    gs_bound: float
    born_field_error: float
    cross_section_error: float
    criterion_perturbative: bool
    criterion_phase: bool

    @property
    def divergent(self) -> bool:
        return math.isinf(self.born_field_error)


def bound_report(cfg: ScatterConfig, rel_err_threshold: float = 0.1) -> BoundReport:
    """Assemble the full report; divergent entries are inf-valued."""
    G = green_norm_bound(cfg.kR)
    validity = validity_criteria(cfg, rel_err_threshold)
    return BoundReport(
        g_norm_bound=G,
        gs_bound=gamma_s_bound(cfg.kR),
        born_field_error=born_field_error(cfg),
        cross_section_error=cross_section_error(cfg),
        criterion_perturbative=abs(cfg.chi) * G < 1.0,
        criterion_phase=validity.phase_ok,
    )
