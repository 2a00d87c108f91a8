"""Voxelized Green operator on a ball: assembly, solves, optical theorem.

The operator acts on 3N-component fields (3 Cartesian components per
voxel, voxel-major layout) sampled at the centers of a cubic lattice
intersected with the ball O(0, R).  Off-diagonal 3x3 blocks sample the
free-space dyadic kernel

    (k^2 I + grad grad) e^{-ikr}/(4 pi r)  x  h^3,

in the e^{-ikz} time convention.  Diagonal blocks carry the standard
discrete-dipole self-term: -1/3 static depolarization plus the
equal-volume-sphere radiative correction for the real part, and exactly
-i k^3 h^3/(6 pi) for the imaginary part.  Freezing the imaginary part at
its leading closed form makes the anti-Hermitian part of the assembled
matrix negative semidefinite as an exact quadratic-form identity (the
far-field plane-wave representation of Im of the kernel), so energy decay
and the optical theorem hold at machine precision up to the chosen
angular quadrature.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .config import ScatterConfig

__all__ = [
    "DiscretizationWarning",
    "SingularSolveError",
    "VoxelGrid",
    "FieldState",
    "GreenMatrix",
    "FarFieldForm",
    "build_grid",
    "plane_wave",
    "assemble_green",
    "solve_born",
    "optical_theorem_residual",
    "anti_hermitian_max_eig",
]


class DiscretizationWarning(UserWarning):
    """Grid coarser than a tenth of the wavelength."""


class SingularSolveError(RuntimeError):
    """Direct solve hit a (near-)singular resolvent."""


@dataclass(frozen=True)
class VoxelGrid:
    """Cubic-lattice voxel centers strictly inside the ball O(0, R)."""

    centers: np.ndarray  # (N, 3)
    spacing: float
    radius: float

    @property
    def n_voxels(self) -> int:
        return self.centers.shape[0]

    @property
    def voxel_volume(self) -> float:
        return self.spacing**3


@dataclass
class FieldState:
    """3N complex field values at voxel centers plus evolution parameter."""

    values: np.ndarray  # (3N,)
    voxel_volume: float
    tau: float = 0.0

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=complex)
        if self.tau < 0:
            raise ValueError("tau must be >= 0")

    @property
    def norm(self) -> float:
        """L2 norm with the voxel measure: sqrt(h^3 sum |v|^2)."""
        return float(math.sqrt(self.voxel_volume * np.sum(np.abs(self.values) ** 2)))

    def per_voxel(self) -> np.ndarray:
        return self.values.reshape(-1, 3)


@dataclass(frozen=True)
class GreenMatrix:
    """Dense 3N x 3N discretized Green operator."""

    entries: np.ndarray
    k: float
    self_term: np.ndarray  # (3, 3)
    grid: VoxelGrid


def build_grid(cfg: ScatterConfig, voxels_per_diameter: int) -> VoxelGrid:
    """Cubic lattice intersected with the ball, ordered by (z, y, x).

    Emits a DiscretizationWarning when the spacing exceeds a tenth of the
    wavelength 2 pi / k.
    """
    if voxels_per_diameter < 1:
        raise ValueError("voxels_per_diameter must be >= 1")
    R = cfg.R
    h = 2.0 * R / voxels_per_diameter
    coords = -R + (np.arange(voxels_per_diameter) + 0.5) * h
    centers = []
    for z in coords:
        for y in coords:
            for x in coords:
                if x * x + y * y + z * z < R * R:
                    centers.append((x, y, z))
    if not centers:
        raise ValueError("no voxel centers fall inside the ball")
    if h > (2.0 * math.pi / cfg.k) / 10.0:
        warnings.warn(
            f"voxel spacing {h:.3g} coarser than a tenth of the wavelength "
            f"{2 * math.pi / cfg.k:.3g}",
            DiscretizationWarning,
            stacklevel=2,
        )
    return VoxelGrid(centers=np.array(centers, dtype=float), spacing=h, radius=R)


def plane_wave(grid: VoxelGrid, k: float) -> FieldState:
    """Incident field e_x exp(-ikz) sampled at the voxel centers."""
    z = grid.centers[:, 2]
    vals = np.zeros((grid.n_voxels, 3), dtype=complex)
    vals[:, 0] = np.exp(-1j * k * z)
    return FieldState(values=vals.reshape(-1), voxel_volume=grid.voxel_volume)


def _self_term(k: float, h: float) -> np.ndarray:
    """Diagonal 3x3 block: depolarization plus radiative correction.

    Real part from the equal-volume sphere of radius a,
    Re[(2/3)((1 + ika) e^{-ika} - 1)] - 1/3; imaginary part pinned to the
    leading radiative term -k^3 h^3/(6 pi), which is the exact value that
    makes Im(G) a negative-semidefinite quadratic form on any grid.
    """
    a = h * (3.0 / (4.0 * math.pi)) ** (1.0 / 3.0)
    ka = k * a
    re = (2.0 / 3.0) * (math.cos(ka) + ka * math.sin(ka) - 1.0) - 1.0 / 3.0
    im = -(k**3) * h**3 / (6.0 * math.pi)
    return (re + 1j * im) * np.eye(3)


def assemble_green(grid: VoxelGrid, k: float) -> GreenMatrix:
    """Assemble the dense discretized Green operator.

    Only the upper-triangle pair blocks are evaluated; the lower triangle
    is their elementwise transpose, so blockwise reciprocity
    B(a,b) = B(b,a)^T holds bit for bit by construction.
    """
    if k <= 0:
        raise ValueError("wavenumber must be > 0")
    c = grid.centers
    N = grid.n_voxels
    h3 = grid.voxel_volume
    ia, ib = np.triu_indices(N, 1)
    blocks = np.zeros((N, N, 3, 3), dtype=complex)
    if ia.size:
        d = c[ia] - c[ib]  # (P, 3)
        r = np.linalg.norm(d, axis=-1)
        if r.min() < 1e-12 * grid.spacing:
            raise ValueError("coincident voxel centers")
        rhat = d / r[:, None]
        kr = k * r
        scal = np.exp(-1j * kr) / (4.0 * math.pi * r) * k * k
        f_iso = scal * (1.0 - 1j / kr - 1.0 / kr**2)
        f_dyad = scal * (-1.0 + 3j / kr + 3.0 / kr**2)
        pair = (
            f_iso[:, None, None] * np.eye(3)
            + f_dyad[:, None, None] * rhat[:, :, None] * rhat[:, None, :]
        ) * h3
        blocks[ia, ib] = pair
        blocks[ib, ia] = pair.transpose(0, 2, 1)
    st = _self_term(k, grid.spacing)
    blocks[np.arange(N), np.arange(N)] = st
    entries = blocks.transpose(0, 2, 1, 3).reshape(3 * N, 3 * N)
    return GreenMatrix(entries=entries, k=k, self_term=st, grid=grid)


def solve_born(G: GreenMatrix, chi: complex, e_inc: FieldState) -> FieldState:
    """Direct dense solve of (I - chi G) E = E_inc.

    Verifies the backward residual to 1e-10; raises SingularSolveError on
    a singular or unacceptably ill-conditioned system (resonant chi).
    """
    A = np.eye(G.entries.shape[0]) - chi * G.entries
    try:
        x = np.linalg.solve(A, e_inc.values)
    except np.linalg.LinAlgError as exc:
        raise SingularSolveError(f"resolvent solve failed: {exc}") from exc
    resid = np.linalg.norm(A @ x - e_inc.values) / np.linalg.norm(e_inc.values)
    if not resid <= 1e-10:
        raise SingularSolveError(f"solve residual {resid:.2e} above 1e-10")
    return FieldState(values=x, voxel_volume=e_inc.voxel_volume, tau=e_inc.tau)


@dataclass
class FarFieldForm:
    """Unit-sphere quadrature rule plus the radiated form factor.

    ``directions`` (Q, 3) and ``weights`` (Q,) with weights summing to
    4 pi; ``form_factor`` holds the discretized radiation integral
    h^3 sum_v psi_v e^{ik n.r_v} for the last field it was computed for.
    """

    directions: np.ndarray
    weights: np.ndarray
    form_factor: np.ndarray | None = field(default=None)

    @classmethod
    def product_rule(cls, n_polar: int, n_azimuth: int) -> "FarFieldForm":
        """Gauss-Legendre in cos(theta) times uniform azimuth."""
        x, w = np.polynomial.legendre.leggauss(n_polar)
        phi = 2.0 * math.pi * np.arange(n_azimuth) / n_azimuth
        st = np.sqrt(1.0 - x**2)
        dirs = np.empty((n_polar * n_azimuth, 3))
        dirs[:, 0] = np.outer(st, np.cos(phi)).reshape(-1)
        dirs[:, 1] = np.outer(st, np.sin(phi)).reshape(-1)
        dirs[:, 2] = np.outer(x, np.ones(n_azimuth)).reshape(-1)
        wts = np.outer(w, np.full(n_azimuth, 2.0 * math.pi / n_azimuth)).reshape(-1)
        return cls(directions=dirs, weights=wts)

    def compute_form_factor(self, grid: VoxelGrid, psi: FieldState, k: float) -> np.ndarray:
        phases = np.exp(1j * k * self.directions @ grid.centers.T)  # (Q, N)
        ff = grid.voxel_volume * phases @ psi.per_voxel()  # (Q, 3)
        self.form_factor = ff
        return ff


def optical_theorem_residual(G: GreenMatrix, psi: FieldState, ff: FarFieldForm) -> float:
    """Relative defect between quadratic-form decay and radiated power.

    Compares the energy-decay rate -d||psi||^2/dtau = -2 Im<psi, G psi>
    against the far-field integral (k^3/8 pi^2) oint |n x ff|^2 dOmega,
    normalized by the larger of the two.  Zero field returns 0 by
    convention.
    """
    if not np.any(psi.values):
        return 0.0
    k = G.k
    h3 = psi.voxel_volume
    decay = -2.0 * (h3 * np.vdot(psi.values, G.entries @ psi.values)).imag
    f = ff.compute_form_factor(G.grid, psi, k)  # (Q, 3)
    cross = np.cross(ff.directions, f)
    radiated = k**3 / (8.0 * math.pi**2) * float(
        np.sum(ff.weights * np.sum(np.abs(cross) ** 2, axis=1))
    )
    return abs(decay - radiated) / max(abs(decay), radiated)


def anti_hermitian_max_eig(G: GreenMatrix) -> float:
    """Largest eigenvalue of (G - G*)/(2i); <= 0 marks dissipativity."""
    A = (G.entries - G.entries.conj().T) / 2j
    return float(np.linalg.eigvalsh(A).max())
