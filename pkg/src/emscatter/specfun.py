"""Complex-argument special functions used by the closed-form cross sections.

Provides spherical Bessel functions j_l and h2_l (second-kind Hankel
convention, matching the e^{-ikz} incident-wave time convention used
throughout this package), the exponential integral Ei on the branch that is
continuous from the lower half of the susceptibility plane, the sine/cosine
integrals, and the cylindrical Bessel function J1.

j_l is evaluated by downward (Miller) recurrence normalized at the closed
forms of l = 0, 1; upward recurrence is unstable for l > |z|.  h2_l is
evaluated by upward recurrence, which is stable because the y_l part
dominates.  Ei is evaluated by its ascending series for small |z| and via
the complex E1 routine in scipy beyond, with the branch offset applied
explicitly.
"""

from __future__ import annotations

import cmath
import enum
import math

import numpy as np
from scipy import special as _sp

__all__ = [
    "BranchTag",
    "spherical_j",
    "spherical_h2",
    "expint_ei",
    "cosint_ci",
    "sinint_si",
    "bessel_j1",
    "euler_gamma",
]

# exp overflows past ~709; |Im z| beyond this cannot be represented in the
# sin/cos/exp factors of the spherical functions.
_IM_Z_MAX = 700.0


class BranchTag(enum.Enum):
    """Branch convention for n = sqrt(1 + chi) and the Ei evaluations.

    LOWER_HALF_CHI: Im chi < 0, refractive index root with Im n < 0 so that
    Re(i n) > 0 and the outgoing kernel decays.
    REAL_AXIS_LIMIT: continuation to Im chi = 0 from below.
    """

    LOWER_HALF_CHI = "lower_half_chi"
    REAL_AXIS_LIMIT = "real_axis_limit"


def euler_gamma() -> float:
    """Euler-Mascheroni constant 0.577215..."""
    return float(np.euler_gamma)


def _j0(z: complex) -> complex:
    if abs(z) < 1e-4:
        z2 = z * z
        return 1.0 - z2 / 6.0 + z2 * z2 / 120.0
    return cmath.sin(z) / z


def _j1(z: complex) -> complex:
    if abs(z) < 1e-4:
        z2 = z * z
        return z / 3.0 - z * z2 / 30.0 + z * z2 * z2 / 840.0
    return (cmath.sin(z) - z * cmath.cos(z)) / (z * z)


def _small_z_series_j(ell: int, z: complex) -> complex:
    # j_l(z) = z^l / (2l+1)!! * (1 - (z^2/2)/(1!(2l+3)) + (z^2/2)^2/(2!(2l+3)(2l+5)) - ...)
    z2h = 0.5 * z * z
    term = 1.0 + 0j
    total = term
    for m in range(1, 40):
        term *= -z2h / (m * (2 * ell + 2 * m + 1))
        total += term
        if abs(term) < 1e-18 * abs(total):
            break
    # z^l / (2l+1)!! in log space to dodge under/overflow for large l
    if z == 0:
        return 1.0 + 0j if ell == 0 else 0.0 + 0j
    lg = ell * cmath.log(z) - _log_double_factorial(2 * ell + 1)
    if lg.real < -700:
        return 0.0 + 0j
    return cmath.exp(lg) * total


def _log_double_factorial(m: int) -> float:
    # log((2l+1)!!) = lgamma(2l+2) - l log 2 - lgamma(l+1)
    ell = (m - 1) // 2
    return math.lgamma(m + 1) - ell * math.log(2.0) - math.lgamma(ell + 1)


def spherical_j(ell: int, z: complex) -> complex:
    """Spherical Bessel function j_l(z) for complex z.

    Downward Miller recurrence normalized against j_0 (or j_1 when j_0 is
    near a zero).  Relative error <= 1e-12 for |z| <= 200, |Im z| <= 50,
    l <= 1000.
    """
    if ell < 0:
        raise ValueError("order must be >= 0")
    z = complex(z)
    if abs(z.imag) > _IM_Z_MAX:
        raise OverflowError("Im z beyond stable range for spherical_j")
    if ell == 0:
        return _j0(z)
    if ell == 1:
        return _j1(z)
    az = abs(z)
    if az == 0:
        return 0.0 + 0j
    # far below the turning point the series is cheaper and avoids a long
    # downward sweep
    if az < 0.1 or ell > 1.2 * az + 200:
        return _small_z_series_j(ell, z)
    start = ell + int(az) // 2 + 50
    prev = None
    for _ in range(6):
        val = _miller_down(ell, z, start)
        if prev is not None and (
            val == prev or abs(val - prev) <= 1e-14 * max(abs(val), abs(prev))
        ):
            return val
        prev = val
        start += ell // 2 + 50
    return val


def _miller_down(ell: int, z: complex, start: int) -> complex:
    inv_z = 1.0 / z
    fp = 0.0 + 0j  # f_{m+1}
    fc = 1e-280 + 0j  # f_m seed
    target = 0.0 + 0j
    f1 = 0.0 + 0j
    f0 = 0.0 + 0j
    for m in range(start, 0, -1):
        fm = (2 * m + 1) * inv_z * fc - fp
        fp, fc = fc, fm
        if m - 1 == ell:
            target = fm
        if m - 1 == 1:
            f1 = fm
        if abs(fc.real) > 1e250 or abs(fc.imag) > 1e250:
            scale = 1e-250
            fp *= scale
            fc *= scale
            target *= scale
            f1 *= scale
    f0 = fc
    j0 = _j0(z)
    j1 = _j1(z)
    # normalize against whichever of j0, j1 is better conditioned
    if abs(j0) * abs(f1) >= abs(j1) * abs(f0):
        return target * (j0 / f0)
    return target * (j1 / f1)


def spherical_j_all(ellmax: int, z: complex) -> np.ndarray:
    """j_0(z) .. j_ellmax(z) from a single downward Miller pass."""
    if ellmax < 0:
        raise ValueError("order must be >= 0")
    z = complex(z)
    if abs(z.imag) > _IM_Z_MAX:
        raise OverflowError("Im z beyond stable range for spherical_j")
    out = np.empty(ellmax + 1, dtype=complex)
    if abs(z) == 0:
        out[:] = 0.0
        out[0] = 1.0
        return out
    out[0] = _j0(z)
    if ellmax >= 1:
        out[1] = _j1(z)
    if ellmax <= 1:
        return out
    az = abs(z)
    start = ellmax + int(az) // 2 + 50
    prev = None
    for _ in range(6):
        vals = _miller_down_all(ellmax, z, start)
        if prev is not None:
            scale = np.maximum(np.abs(vals), np.abs(prev))
            ok = np.abs(vals - prev) <= 1e-14 * scale + 1e-305
            if bool(np.all(ok)):
                break
        prev = vals
        start += ellmax // 2 + 50
    out[2:] = vals[2 : ellmax + 1]
    return out


def _miller_down_all(ellmax: int, z: complex, start: int) -> np.ndarray:
    inv_z = 1.0 / z
    buf = np.zeros(start + 2, dtype=complex)
    buf[start + 1] = 0.0
    buf[start] = 1e-280
    for m in range(start, 0, -1):
        buf[m - 1] = (2 * m + 1) * inv_z * buf[m] - buf[m + 1]
        if abs(buf[m - 1].real) > 1e250 or abs(buf[m - 1].imag) > 1e250:
            buf[m - 1 :] *= 1e-250
    j0 = _j0(z)
    j1 = _j1(z)
    if abs(j0) * abs(buf[1]) >= abs(j1) * abs(buf[0]):
        norm = j0 / buf[0]
    else:
        norm = j1 / buf[1]
    vals = buf[: ellmax + 1] * norm
    # below the underflow floor of the seeded recurrence the true values are
    # numerically zero; flush escaped garbage
    vals[~np.isfinite(vals)] = 0.0
    return vals


def spherical_h2_all(ellmax: int, z: complex) -> tuple[np.ndarray, int]:
    """h2_0(z) .. h2_ellmax(z) by upward recurrence.

    Returns (values, valid) where entries at and beyond index ``valid``
    overflowed double precision and are set to inf; callers treat the
    corresponding series terms as numerically zero.  Upward recurrence on
    h2 itself is stable only for Im z <= 0 (above the axis, roundoff in
    the subdominant h1 direction is amplified by e^{2 Im z} once past the
    l ~ |z| turning point); for Im z > 0 the stable combination
    h2 = 2 j - h1 is used instead, with j from the downward pass.  Near
    the upper-half-plane zeros of h2 that subtraction loses digits, as any
    finite-precision route must.
    """
    if ellmax < 0:
        raise ValueError("order must be >= 0")
    z = complex(z)
    if z == 0:
        raise ValueError("spherical_h2 is singular at z = 0")
    if abs(z.imag) > _IM_Z_MAX:
        raise OverflowError("Im z beyond stable range for spherical_h2")
    if z.imag > 0:
        h1, valid = _hankel_up(ellmax, z, kind=1)
        j = spherical_j_all(ellmax, z)
        out = np.full(ellmax + 1, complex(math.inf, math.inf), dtype=complex)
        out[:valid] = 2.0 * j[:valid] - h1[:valid]
        return out, valid
    return _hankel_up(ellmax, z, kind=2)


def _hankel_up(ellmax: int, z: complex, kind: int) -> tuple[np.ndarray, int]:
    out = np.full(ellmax + 1, complex(math.inf, math.inf), dtype=complex)
    if kind == 2:
        e = 1j * cmath.exp(-1j * z)
        out[0] = e / z
        h1_seed = e / (z * z) + 1j * e / z
    else:
        e = -1j * cmath.exp(1j * z)
        out[0] = e / z
        h1_seed = e / (z * z) - 1j * e / z
    if ellmax == 0:
        return out, 1
    out[1] = h1_seed
    inv_z = 1.0 / z
    valid = ellmax + 1
    with np.errstate(over="ignore", invalid="ignore"):
        for m in range(1, ellmax):
            nxt = (2 * m + 1) * inv_z * out[m] - out[m - 1]
            if not (math.isfinite(nxt.real) and math.isfinite(nxt.imag)):
                valid = m + 1
                break
            out[m + 1] = nxt
    return out, valid


def spherical_h2(ell: int, z: complex) -> complex:
    """Spherical Hankel function of the second kind h2_l(z) = j_l - i y_l.

    Upward recurrence from the l = 0, 1 closed forms, run on whichever of
    h1/h2 dominates for the sign of Im z (the other is recovered by
    conjugate reflection).  Raises at z = 0, and OverflowError when the
    value exceeds double range.
    """
    if ell < 0:
        raise ValueError("order must be >= 0")
    vals, valid = spherical_h2_all(ell, z)
    if ell >= valid:
        raise OverflowError(f"spherical_h2 overflow at l={ell} for |z|={abs(z):.3g}")
    return complex(vals[ell])


def _ei_series(z: complex) -> complex:
    total = 0.0 + 0j
    term = 1.0 + 0j
    for k in range(1, 80):
        term *= z / k
        total += term / k
        if abs(term) < 1e-18 * (1.0 + abs(total)) * k:
            break
    return total


def _log_lower(z: complex) -> complex:
    # log on the branch continuous from the lower half plane: the cut sits
    # on the positive imaginary axis instead of the negative real axis
    w = cmath.log(z)
    if z.imag > 0 and z.real < 0:
        w -= 2j * math.pi
    return w


def expint_ei(z: complex, branch: BranchTag = BranchTag.LOWER_HALF_CHI) -> complex:
    """Exponential integral Ei(z) = -PV int_{-z}^inf e^{-t} dt / t.

    Both branch tags evaluate the continuation that is continuous from the
    lower half plane (cut relocated to the positive imaginary axis); on the
    negative imaginary axis this is Ci(x) - i(Si(x) + pi/2) for z = -ix.
    Relative error <= 1e-10 for 1e-6 <= |z| <= 100.
    """
    if not isinstance(branch, BranchTag):
        raise TypeError("branch must be a BranchTag")
    z = complex(z)
    if z == 0:
        raise ValueError("Ei has a logarithmic singularity at z = 0")
    if abs(z) <= 1.5:
        return euler_gamma() + _log_lower(z) + _ei_series(z)
    if z.imag == 0 and z.real > 0:
        return complex(_sp.expi(z.real))
    if z.imag == 0 and z.real < 0:
        # limit from Im z < 0
        return complex(_sp.expi(z.real)) - 1j * math.pi
    val = -_sp.exp1(-z)
    val += 1j * math.pi if z.imag > 0 else -1j * math.pi
    if z.imag > 0 and z.real < 0:
        val -= 2j * math.pi
    return complex(val)


def cosint_ci(x: float) -> float:
    """Cosine integral Ci(x) = -int_x^inf cos(t)/t dt, for x > 0."""
    if x <= 0:
        raise ValueError("Ci requires x > 0")
    return float(_sp.sici(x)[1])


def sinint_si(x: float) -> float:
    """Sine integral Si(x) = int_0^x sin(t)/t dt, for x >= 0."""
    if x < 0:
        raise ValueError("Si requires x >= 0")
    return float(_sp.sici(x)[0])


def bessel_j1(s: float) -> float:
    """Cylindrical Bessel function J1(s) for s >= 0."""
    if s < 0:
        raise ValueError("bessel_j1 requires s >= 0")
    return float(_sp.j1(s))
