"""Built-in verification suite behind ``scatter selftest``.

A fast subset of the oracle-agreement and invariant checks, runnable
without pytest; returns a machine-readable summary.  A named fault can be
injected to demonstrate that the suite actually discriminates (a wrong
closed form must flip the exit code).
"""

from __future__ import annotations

import contextlib
import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import approx, bounds, greenop, mie, oracle, semigroup, specfun
from .config import ScatterConfig

__all__ = ["SelfTestResult", "run_selftest", "FAULT_NAMES"]

FAULT_NAMES = ("f1", "f2", "mie", "green")


@dataclass
class SelfTestResult:
    name: str
    passed: bool
    detail: str


@contextlib.contextmanager
def _fault(name: str | None):
    """Perturb one implementation path to exercise the checks."""
    if name is None:
        yield
        return
    if name not in FAULT_NAMES:
        raise ValueError(f"unknown fault {name!r}; choose from {FAULT_NAMES}")
    if name == "f1":
        orig = approx.f1_amplitude
        approx.f1_amplitude = lambda cfg: orig(cfg) * (1.0 + 1e-3)
        try:
            yield
        finally:
            approx.f1_amplitude = orig
    elif name == "f2":
        orig = approx.f2_amplitude
        approx.f2_amplitude = lambda cfg: orig(cfg) + 1e-3
        try:
            yield
        finally:
            approx.f2_amplitude = orig
    elif name == "mie":
        orig = mie.mie_sigma
        def bad(cfg, trunc=None):
            res = orig(cfg, trunc)
            return approx.AmplitudeResult(
                forward_amplitude=res.forward_amplitude,
                sigma_sc=res.sigma_sc * (1.0 + 1e-6),
                sigma_n=res.sigma_n * (1.0 + 1e-6),
                method=res.method,
            )
        mie.mie_sigma = bad
        try:
            yield
        finally:
            mie.mie_sigma = orig
    else:  # green: push the radiative imaginary part off its exact value
        orig = greenop._self_term
        greenop._self_term = lambda k, h: orig(k, h) + 1e-4j * np.eye(3)
        try:
            yield
        finally:
            greenop._self_term = orig


def _check_specfun() -> SelfTestResult:
    checks = [
        abs(specfun.spherical_j(1, 1.0) - 0.30116867893975674) < 1e-13,
        abs(specfun.bessel_j1(1.0) - 0.44005058574493355) < 1e-13,
        abs(specfun.sinint_si(1.0) - 0.946083070367183) < 1e-12,
        abs(specfun.cosint_ci(1.0) - 0.33740392290096816) < 1e-12,
        abs(specfun.expint_ei(1.0) - 1.8951178163559368) < 1e-10,
        abs(specfun.euler_gamma() - 0.5772156649015329) < 1e-15,
    ]
    return SelfTestResult("specfun_reference_values", all(checks), f"{sum(checks)}/6 anchors")


def _check_mie_oracle() -> SelfTestResult:
    worst = 0.0
    for n, kR in [(1.125, 7.3), (1.5, 3.1), (2.2, 11.0)]:
        cfg = ScatterConfig.from_index(1.0, kR, n)
        a = mie.mie_sigma(cfg).sigma_n
        b = mie.mie_sigma_cf(cfg)
        worst = max(worst, abs(a - b) / abs(b))
    return SelfTestResult("mie_vs_continued_fraction", worst <= 1e-8, f"worst rel {worst:.2e}")


def _check_closed_form_oracles() -> SelfTestResult:
    cfg = ScatterConfig.make(1.0, 2.0, (1.2 - 0.1j) ** 2 - 1.0)
    qc = oracle.QuadratureControl(radial_nodes=32, angular_rule=32, target_rel_err=1e-5)
    r1 = abs(approx.f1_amplitude(cfg) - oracle.f1_quadrature(cfg, qc))
    r1 /= abs(oracle.f1_quadrature(cfg, qc))
    r2 = abs(approx.f2_amplitude(cfg) - oracle.f2_quadrature(cfg, qc))
    r2 /= abs(oracle.f2_quadrature(cfg, qc))
    ok = r1 <= 1e-4 and r2 <= 1e-4
    return SelfTestResult("closed_forms_vs_quadrature", ok, f"f1 {r1:.2e}, f2 {r2:.2e}")


def _check_rg_recovery() -> SelfTestResult:
    cfg = ScatterConfig.from_index(1.0, 1.0, 1.001)
    ratio = approx.semigroup_amplitude(cfg).sigma_sc / approx.rayleigh_gans(cfg).sigma_sc
    return SelfTestResult("rayleigh_gans_recovery", abs(ratio - 1.0) <= 1e-3, f"|ratio-1| = {abs(ratio - 1):.2e}")


def _check_vdh_anchor() -> SelfTestResult:
    v = approx.van_de_hulst(2.0 * math.pi)
    return SelfTestResult("van_de_hulst_anchor", v == 2.0, f"value {v!r}")


def _lab_setup():
    cfg = ScatterConfig.make(1.0, 1.5, 0.1)
    grid = greenop.build_grid(cfg, 4)
    G = greenop.assemble_green(grid, cfg.k)
    E = greenop.plane_wave(grid, cfg.k)
    return G, E


def _check_dissipativity() -> SelfTestResult:
    G, _ = _lab_setup()
    top = greenop.anti_hermitian_max_eig(G)
    bound = 1e-8 * np.linalg.norm(G.entries, 2)
    return SelfTestResult("operator_dissipativity", top <= bound, f"max eig {top:.2e} vs {bound:.2e}")


def _check_optical_theorem() -> SelfTestResult:
    G, _ = _lab_setup()
    rng = np.random.default_rng(11)
    psi = greenop.FieldState(
        rng.standard_normal(G.entries.shape[0]) + 1j * rng.standard_normal(G.entries.shape[0]),
        G.grid.voxel_volume,
    )
    ff = greenop.FarFieldForm.product_rule(6, 12)
    r = greenop.optical_theorem_residual(G, psi, ff)
    return SelfTestResult("optical_theorem_residual", r <= 5e-2, f"residual {r:.2e}")


def _check_resolvent() -> SelfTestResult:
    G, E = _lab_setup()
    direct = greenop.solve_born(G, -0.5j, E)
    viasg = semigroup.bochner_resolvent(G, -0.5j, E)
    rel = np.linalg.norm(viasg.values - direct.values) / np.linalg.norm(direct.values)
    return SelfTestResult("bochner_vs_direct_solve", rel <= 1e-4, f"rel {rel:.2e}")


def _check_energy_decay() -> SelfTestResult:
    G, E = _lab_setup()
    tr = semigroup.stability_probe(G, E, 50.0 / np.linalg.norm(G.entries, 2))
    ok = tr.monotone_within(1e-9 * tr.norms[0]) and tr.norms[-1] < tr.norms[0]
    return SelfTestResult("monotone_energy_decay", ok, f"decay ratio {tr.decay_ratio:.3f}")


def _check_j1_identity() -> SelfTestResult:
    r = semigroup.j1_identity_check(-0.3 - 0.7j, 2.5)
    return SelfTestResult("j1_integral_identity", r <= 1e-8, f"residual {r:.2e}")


def run_selftest(inject_fault: str | None = None) -> tuple[bool, list[SelfTestResult]]:
    """Run all checks; returns (all_passed, results)."""
    checks = [
        _check_specfun,
        _check_mie_oracle,
        _check_closed_form_oracles,
        _check_rg_recovery,
        _check_vdh_anchor,
        _check_dissipativity,
        _check_optical_theorem,
        _check_resolvent,
        _check_energy_decay,
        _check_j1_identity,
    ]
    results = []
    with _fault(inject_fault), warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for fn in checks:
            try:
                results.append(fn())
            except Exception as exc:  # a crashed check is a failed check
                results.append(SelfTestResult(fn.__name__.lstrip("_"), False, f"raised {exc!r}"))
    return all(r.passed for r in results), results
