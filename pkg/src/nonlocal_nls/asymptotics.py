"""Leading-order long-time evaluation along rays xi = x/(4t).

The solution along a ray decays like

    q(x, t) ~ t^{-1/2 + Im nu(-xi)} p(-xi) exp{ 4 i t xi^2 - i Re nu(-xi) ln t }

with the amplitude

    p(-xi) = sqrt(pi) exp{ -pi nu/2 + pi i/4 + 2 chi(-xi) - 3 i nu ln 2 }
             / ( r1(-xi) Gamma(-i nu) ),   nu = nu(-xi),

so the power of t carries the profile-dependent shift Im nu(-xi): rays
with different xi decay at genuinely different rates.  The remainder
order depends on the sign of Im nu and is tracked as a class tag plus an
order-of-magnitude scale (unit constant; no sharp constant is implied).

For even data r1 = conj(r2) and the formula collapses to the classical
t^{-1/2} form with |p|^2 = (sigma/4 pi) ln(1 + sigma |r|^2); the
reduction here evaluates the argument of p through the general amplitude
formula (the two agree because chi(-xi) is purely imaginary then).
"""

from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass

import numpy as np

from . import rh_data, specfun
from .rh_data import RayData, ReflectionData, classify_remainder

_NU_DEADBAND = 1e-12


class AsymptoticsError(Exception):
    pass


def _p_from(nu: complex, chi: complex, r1_at: complex) -> complex:
    if abs(nu) < _NU_DEADBAND:
        return 0.0 + 0.0j   # 1/Gamma(-i nu) -> 0
    if abs(r1_at) < 1e-14:
        raise AsymptoticsError(
            "r1(-xi) = 0 with nu != 0: amplitude formula is ill-posed")
    num = math.sqrt(math.pi) * cmath.exp(
        -0.5 * math.pi * nu + 0.25j * math.pi + 2.0 * chi
        - 3j * nu * math.log(2.0))
    return num / (r1_at * specfun.gamma(-1j * nu))


def p_amplitude(ray: RayData, r1_at: complex) -> complex:
    """Amplitude p(-xi) from the ray's nu and chi and r1 at the stationary
    point.  Returns 0 in the reflectionless nu -> 0 limit."""
    return _p_from(ray.nu, ray.chi, r1_at)


def make_ray(r: ReflectionData, xi: float) -> RayData:
    """Assemble the per-ray data (nu, chi, p, remainder class)."""
    nu = rh_data.nu_at(r, xi)
    chi = rh_data.chi_at(r, xi)
    p = _p_from(nu, chi, r.r1_at(-xi))
    return RayData(xi=float(xi), nu=nu, chi=chi, p=p,
                   remainder_class=classify_remainder(nu))


@dataclass(frozen=True)
class AsymptoticPrediction:
    x: float
    t: float
    xi: float
    q_leading: complex
    remainder_class: str
    remainder_scale: float


def remainder_scale(nu: complex, t: float) -> float:
    """Order-of-magnitude of the remainder with unit constant."""
    im = nu.imag
    if im > _NU_DEADBAND:
        return t ** (-1.0 + 2.0 * abs(im))
    if im < -_NU_DEADBAND:
        return t ** -1.0
    return math.log(t) / t if t > 1.0 else 1.0 / t


def leading_term(ray: RayData, r1_at: complex, x: float, t: float
                 ) -> AsymptoticPrediction:
    """Leading-order q at (x, t) on the ray xi = x/(4t)."""
    if t < 1.0:
        raise AsymptoticsError("leading_term needs t >= 1")
    xi = x / (4.0 * t)
    if abs(xi - ray.xi) > 1e-9 * max(1.0, abs(ray.xi)):
        raise AsymptoticsError(
            f"(x, t) = ({x}, {t}) lies on ray {xi}, not {ray.xi}")
    p = ray.p if ray.p != 0 or abs(ray.nu) < _NU_DEADBAND \
        else _p_from(ray.nu, ray.chi, r1_at)
    amp = t ** (-0.5 + ray.nu.imag)
    phase = cmath.exp(1j * (4.0 * t * xi * xi - ray.nu.real * math.log(t)))
    return AsymptoticPrediction(
        x=float(x), t=float(t), xi=xi,
        q_leading=amp * p * phase,
        remainder_class=ray.remainder_class,
        remainder_scale=remainder_scale(ray.nu, t),
    )


def local_nls_reduction(r_even: ReflectionData, xi: float, *,
                        even_tol: float = 1e-7) -> tuple[float, float, float]:
    """(nu, |p|, arg p) for even data, where the flow is the local NLS.

    Requires r1 = conj(r2) on the grid to ``even_tol``.  nu is real and
    |p|^2 = (sigma/4 pi) ln(1 + sigma |r(-xi)|^2); arg p is taken from the
    general amplitude formula evaluated on the even data.
    """
    dev = float(np.max(np.abs(r_even.r1 - np.conj(r_even.r2))))
    if dev > even_tol:
        raise AsymptoticsError(
            f"data not even: max |r1 - conj(r2)| = {dev:.2e} > {even_tol:.0e}")
    sigma = r_even.sigma
    rmod2 = abs(r_even.r1_at(-xi)) ** 2
    arg_ln = 1.0 + sigma * rmod2
    if arg_ln <= 0.0:
        raise AsymptoticsError("1 + sigma |r|^2 <= 0; reduction undefined")
    nu = -math.log(arg_ln) / (2.0 * math.pi)
    p_mod_sq = sigma * math.log(arg_ln) / (4.0 * math.pi)
    p_mod = math.sqrt(max(p_mod_sq, 0.0))
    ray = make_ray(r_even, xi)
    p_arg = cmath.phase(ray.p) if ray.p != 0 else 0.0
    return nu, p_mod, p_arg


PREDICTION_CSV_HEADER = ["x", "t", "xi", "Re q", "Im q", "abs q",
                         "remainder_class", "remainder_scale"]


def predictions_to_csv(fh, preds, comments: tuple[str, ...] = ()) -> None:
    for line in comments:
        fh.write(f"# {line}\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(PREDICTION_CSV_HEADER)
    for p in preds:
        w.writerow([repr(float(p.x)), repr(float(p.t)), repr(float(p.xi)),
                    repr(float(p.q_leading.real)),
                    repr(float(p.q_leading.imag)),
                    repr(float(abs(p.q_leading))), p.remainder_class,
                    repr(float(p.remainder_scale))])


__all__ = [
    "AsymptoticPrediction", "AsymptoticsError",
    "p_amplitude", "make_ray", "leading_term", "local_nls_reduction",
    "remainder_scale", "predictions_to_csv", "PREDICTION_CSV_HEADER",
]
