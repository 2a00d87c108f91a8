"""Evolution semigroup exp(-i tau G) on the voxel grid, and its uses.

Provides the propagated traces used to watch monotone energy decay, the
resolvent reconstructed as the integral
(1/(i chi)) int_0^inf e^{i tau/chi} exp(-i tau G) E_inc dtau  (Im chi < 0),
the large-|chi| interior-current probe with a compactly supported bump
weight, and the scalar check of the identity
1 - exp(-i tau G) = int_0^inf exp(-s^2/(4 i tau G)) J1(s) ds for Im G < 0.

Propagation diagonalizes the (complex symmetric) matrix once per call and
verifies the reconstruction residual; scipy's scaling-and-squaring expm
is the fallback when diagonalization is not trustworthy.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.integrate
import scipy.linalg

from .greenop import FieldState, GreenMatrix, SingularSolveError, VoxelGrid
from .specfun import bessel_j1

__all__ = [
    "EvolutionTrace",
    "SkinProbe",
    "BochnerQuadrature",
    "evolve",
    "stability_probe",
    "bochner_resolvent",
    "skin_effect_probe",
    "j1_identity_check",
]

# eigendecomposition accepted when || V L V^-1 - G || / ||G|| is below this
_EIG_RECON_TOL = 1e-10


@dataclass(frozen=True)
class EvolutionTrace:
    """Norms ||psi_tau|| along an ascending tau grid."""

    taus: np.ndarray
    norms: np.ndarray
    states: list[FieldState] | None = None

    def __post_init__(self) -> None:
        if np.any(np.diff(self.taus) <= 0):
            raise ValueError("tau grid must be strictly increasing")
        if np.any(self.norms < 0):
            raise ValueError("norms must be nonnegative")

    @property
    def decay_ratio(self) -> float:
        return float(self.norms[-1] / self.norms[0])

    def monotone_within(self, slack: float) -> bool:
        """True when no step increases the norm by more than ``slack``."""
        return bool(np.all(np.diff(self.norms) <= slack))


class _Propagator:
    """One-shot spectral (or expm-fallback) propagator for a fixed matrix."""

    def __init__(self, matrix: np.ndarray):
        self.matrix = matrix
        self.eigvals: np.ndarray | None = None
        try:
            w, v = np.linalg.eig(matrix)
            vinv = np.linalg.inv(v)
            recon = np.linalg.norm(v @ (w[:, None] * vinv) - matrix)
            if recon <= _EIG_RECON_TOL * max(np.linalg.norm(matrix), 1e-300):
                self.eigvals = w
                self._v = v
                self._vinv = vinv
        except np.linalg.LinAlgError:
            pass

    def apply(self, tau: float, psi0: np.ndarray) -> np.ndarray:
        """exp(-i tau M) psi0."""
        if self.eigvals is not None:
            return self._v @ (np.exp(-1j * tau * self.eigvals) * (self._vinv @ psi0))
        return scipy.linalg.expm(-1j * tau * self.matrix) @ psi0

    def coefficients(self, psi0: np.ndarray) -> np.ndarray:
        if self.eigvals is None:
            raise RuntimeError("spectral path unavailable")
        return self._vinv @ psi0

    def synthesize(self, coeffs: np.ndarray) -> np.ndarray:
        return self._v @ coeffs


def _as_matrix(G: GreenMatrix | np.ndarray) -> np.ndarray:
    if isinstance(G, GreenMatrix):
        return G.entries
    return np.asarray(G, dtype=complex)


def evolve(
    G: GreenMatrix | np.ndarray,
    psi0: FieldState,
    tau_grid,
    keep_states: bool = False,
) -> EvolutionTrace:
    """Propagate psi_tau = exp(-i tau G) psi0 along an ascending tau grid."""
    taus = np.asarray(tau_grid, dtype=float)
    if taus.ndim != 1 or taus.size == 0 or taus[0] < 0:
        raise ValueError("tau grid must be a nonempty ascending sequence from >= 0")
    if np.any(np.diff(taus) <= 0):
        raise ValueError("tau grid must be strictly increasing")
    prop = _Propagator(_as_matrix(G))
    norms = np.empty(taus.size)
    states: list[FieldState] | None = [] if keep_states else None
    for i, tau in enumerate(taus):
        vals = psi0.values if tau == 0.0 else prop.apply(tau, psi0.values)
        st = FieldState(values=vals, voxel_volume=psi0.voxel_volume, tau=float(tau))
        norms[i] = st.norm
        if states is not None:
            states.append(st)
    return EvolutionTrace(taus=taus, norms=norms, states=states)


def stability_probe(G: GreenMatrix | np.ndarray, e_inc: FieldState, tau_max: float) -> EvolutionTrace:
    """Norm trace at geometric checkpoints tau_max / 2^j, j = 10..0.

    The trailing checkpoint pair quantifies long-run decay; monotonicity
    within roundoff is the dissipativity signature.
    """
    if tau_max <= 0:
        raise ValueError("tau_max must be > 0")
    taus = np.concatenate(([0.0], tau_max * 2.0 ** np.arange(-10.0, 1.0)))
    return evolve(G, e_inc, taus)


@dataclass(frozen=True)
class BochnerQuadrature:
    """Controls for the resolvent integral over tau."""

    rel_tol: float = 1e-8
    tail_eps: float = 1e-12
    max_intervals: int = 2000


def bochner_resolvent(
    G: GreenMatrix | np.ndarray,
    chi: complex,
    e_inc: FieldState,
    quad: BochnerQuadrature | None = None,
) -> FieldState:
    """Solve (I - chi G) E = E_inc through the semigroup integral.

    Valid for Im chi < 0; the integrand decays like
    exp(-tau |Im chi| / |chi|^2), which sets the tail cutoff.  Raises on
    quadrature non-convergence.
    """
    chi = complex(chi)
    if chi.imag >= 0:
        raise ValueError("semigroup resolvent integral requires Im chi < 0")
    if quad is None:
        quad = BochnerQuadrature()
    M = _as_matrix(G)
    prop = _Propagator(M)
    # |e^{i tau/chi}| = e^{-tau Im(1/chi)} with Im(1/chi) > 0 for Im chi < 0
    rate = (1.0 / chi).imag
    tau_max = -math.log(quad.tail_eps) / rate

    if prop.eigvals is not None:
        coeffs = prop.coefficients(e_inc.values)

        def integrand(tau: float) -> np.ndarray:
            return np.exp(tau * (1j / chi - 1j * prop.eigvals)) * coeffs

        integral, err = scipy.integrate.quad_vec(
            integrand,
            0.0,
            tau_max,
            epsabs=quad.rel_tol * float(np.linalg.norm(coeffs)),
            epsrel=quad.rel_tol,
            limit=quad.max_intervals,
        )
        out = prop.synthesize(integral / (1j * chi))
        scale = float(np.linalg.norm(integral)) / abs(chi)
    else:

        def integrand(tau: float) -> np.ndarray:
            return cmath.exp(1j * tau / chi) * prop.apply(tau, e_inc.values)

        integral, err = scipy.integrate.quad_vec(
            integrand,
            0.0,
            tau_max,
            epsabs=quad.rel_tol * float(np.linalg.norm(e_inc.values)),
            epsrel=quad.rel_tol,
            limit=quad.max_intervals,
        )
        out = integral / (1j * chi)
        scale = float(np.linalg.norm(integral)) / abs(chi)

    if not err / max(abs(chi) * scale, 1e-300) < 1e3 * quad.rel_tol:
        raise SingularSolveError(f"resolvent quadrature error estimate {err:.2e} too large")
    return FieldState(values=out, voxel_volume=e_inc.voxel_volume, tau=0.0)


@dataclass(frozen=True)
class SkinProbe:
    """Compactly supported smooth weight sampled on the voxel grid.

    The weight is the canonical bump exp(1 - 1/(1 - s^2)) with
    s = |r| / (support_fraction R), zero outside; support must stay
    strictly interior (support_fraction <= 0.7 by default).
    """

    weights: np.ndarray  # (N,) real, zero outside the support
    support_fraction: float
    chi_magnitudes: tuple[float, ...] = (10.0, 100.0, 1000.0)

    @classmethod
    def bump(
        cls,
        grid: VoxelGrid,
        support_fraction: float = 0.55,
        chi_magnitudes: tuple[float, ...] = (10.0, 100.0, 1000.0),
    ) -> "SkinProbe":
        if not 0 < support_fraction <= 0.7:
            raise ValueError("support_fraction must lie in (0, 0.7]")
        s2 = np.sum(grid.centers**2, axis=1) / (support_fraction * grid.radius) ** 2
        w = np.zeros(grid.n_voxels)
        inside = s2 < 1.0
        w[inside] = np.exp(1.0 - 1.0 / (1.0 - s2[inside]))
        return cls(weights=w, support_fraction=support_fraction, chi_magnitudes=chi_magnitudes)


def skin_effect_probe(
    G: GreenMatrix, e_inc: FieldState, probe: SkinProbe
) -> list[tuple[float, float]]:
    """|chi| times the bump-weighted interior field, per |chi|.

    Evaluates |chi| * | h^3 sum_v f(r_v) ((I + i |chi| G)^{-1} E_inc)_v |
    for each probed magnitude; in the conductor limit the continuum value
    tends to zero, so the sequence should trend downward.
    """
    N = G.grid.n_voxels
    h3 = G.grid.voxel_volume
    eye = np.eye(3 * N)
    out = []
    for mag in probe.chi_magnitudes:
        A = eye + 1j * mag * G.entries
        try:
            sol = np.linalg.solve(A, e_inc.values)
        except np.linalg.LinAlgError as exc:
            raise SingularSolveError(f"skin-effect solve failed at |chi| = {mag}") from exc
        weighted = h3 * probe.weights @ sol.reshape(-1, 3)
        out.append((float(mag), float(mag) * float(np.linalg.norm(weighted))))
    return out


def j1_identity_check(G_scalar: complex, tau: float) -> float:
    """Residual of 1 - exp(-i tau G) = int_0^inf exp(-s^2/(4 i tau G)) J1(s) ds.

    The integrand decays like a Gaussian with rate |Im G|/(4 tau |G|^2);
    composite Gauss-Legendre panels resolve both that envelope and the J1
    oscillation.  Raises when Im G is too close to 0 for the tail to be
    reachable.
    """
    G = complex(G_scalar)
    if G.imag >= 0:
        raise ValueError("identity requires Im G < 0")
    if tau <= 0:
        raise ValueError("tau must be > 0")
    decay = -G.imag / (4.0 * tau * abs(G) ** 2)
    s_max = math.sqrt(38.0 / decay)
    n_panels = int(math.ceil(s_max / (math.pi / 2.0)))
    if n_panels > 20000:
        raise SingularSolveError(
            f"quadrature infeasible: Im G too close to 0 (needs {n_panels} panels)"
        )
    nodes, weights = np.polynomial.legendre.leggauss(16)
    total = 0.0 + 0j
    alpha = -1.0 / (4j * tau * G)  # exponent coefficient: exp(alpha s^2)
    edges = np.linspace(0.0, s_max, n_panels + 1)
    for a, b in zip(edges[:-1], edges[1:]):
        s = a + 0.5 * (b - a) * (nodes + 1.0)
        w = 0.5 * (b - a) * weights
        j1 = np.array([bessel_j1(float(v)) for v in s])
        total += np.sum(w * np.exp(alpha * s * s) * j1)
    lhs = 1.0 - cmath.exp(-1j * tau * G)
    return abs(lhs - total)
