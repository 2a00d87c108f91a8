"""Scattering problem configuration: geometry, susceptibility, and branch.

A problem instance is a dielectric ball of radius R illuminated by the
plane wave e_x exp(-ikz).  The dimensionless susceptibility chi determines
the refractive index n = sqrt(1 + chi); on the lower-half chi plane the
root with Im n <= 0 is selected so that Re(i n) > 0 and the outgoing
kernel exp(-i n k r)/r decays.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field

from .specfun import BranchTag

__all__ = ["ScatterConfig", "BranchTag"]


def _branch_sqrt(w: complex) -> complex:
    """sqrt(w) continued from below the real axis: Im result <= 0."""
    s = cmath.sqrt(w)
    if s.imag > 0:
        s = -s
    return s


@dataclass(frozen=True)
class ScatterConfig:
    """Wavenumber k, ball radius R, susceptibility chi, and derived index n."""

    k: float
    R: float
    chi: complex
    branch: BranchTag = BranchTag.REAL_AXIS_LIMIT
    n: complex = field(init=False)

    def __post_init__(self) -> None:
        if not self.k > 0:
            raise ValueError("wavenumber k must be > 0")
        if not self.R > 0:
            raise ValueError("radius R must be > 0")
        chi = complex(self.chi)
        if chi.imag > 0:
            raise ValueError("Im chi > 0 is outside the supported branch")
        if self.branch is BranchTag.LOWER_HALF_CHI and chi.imag >= 0:
            raise ValueError("LOWER_HALF_CHI requires Im chi < 0")
        if self.branch is BranchTag.REAL_AXIS_LIMIT and chi.imag != 0:
            raise ValueError("REAL_AXIS_LIMIT requires Im chi = 0")
        object.__setattr__(self, "chi", chi)
        object.__setattr__(self, "n", _branch_sqrt(1.0 + chi))

    @classmethod
    def make(cls, k: float, R: float, chi: complex) -> "ScatterConfig":
        """Build a config, picking the branch tag from Im chi."""
        chi = complex(chi)
        tag = BranchTag.LOWER_HALF_CHI if chi.imag < 0 else BranchTag.REAL_AXIS_LIMIT
        return cls(k=k, R=R, chi=chi, branch=tag)

    @classmethod
    def from_index(cls, k: float, R: float, n: float) -> "ScatterConfig":
        """Config for a transparent sphere of real refractive index n > 0."""
        if n <= 0:
            raise ValueError("refractive index must be > 0")
        return cls(k=k, R=R, chi=n * n - 1.0, branch=BranchTag.REAL_AXIS_LIMIT)

    @property
    def kR(self) -> float:
        return self.k * self.R

    @property
    def geometric_cross_section(self) -> float:
        import math

        return math.pi * self.R * self.R
