"""Explicit parabolic-cylinder solution of the constant-jump model problem.

The 2x2 matrix m0(z) solves a Riemann-Hilbert problem across the real axis
with constant jump

    j0 = [[1 + sigma r1 r2, sigma r2], [r1, 1]]

and normalization m0 ~ (I + O(1/z)) e^{-i z^2/4 sigma3} z^{i nu sigma3}.
Its diagonal entries are parabolic cylinder functions of rotated argument,

    m11 = e^{-3 pi nu/4} D_{i nu}(e^{-3 pi i/4} z)   (Im z > 0)
          e^{+pi nu/4}   D_{i nu}(e^{+pi i/4} z)     (Im z < 0)
    m22 = e^{+pi nu/4}   D_{-i nu}(e^{-pi i/4} z)    (Im z > 0)
          e^{-3 pi nu/4} D_{-i nu}(e^{+3 pi i/4} z)  (Im z < 0)

with off-diagonal entries given by first-order derivative relations, and
the coefficients

    beta  = sqrt(2 pi) e^{-pi nu/2} e^{-3 pi i/4} / (r1 Gamma(-i nu))
    gamma = sigma sqrt(2 pi) e^{-pi nu/2} e^{-pi i/4} / (r2 Gamma(+i nu))

satisfy beta gamma = nu.  The sector prefactors cancel the rotation phases
so each branch matches z^{i nu} e^{-i z^2/4} (principal logarithm) at
infinity; the half-plane assignment is validated by the jump test rather
than assumed.  ``verify_model`` bundles the ODE, jump, determinant and
normalization diagnostics.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass

import numpy as np

from . import specfun


class ModelError(Exception):
    pass


@dataclass(frozen=True)
class ModelCoefficients:
    """Coefficients of the model ODE dm/dz + [[iz/2, beta],[gamma, -iz/2]] m = 0."""
    xi: float
    beta: complex
    gamma_c: complex
    nu: complex
    r1: complex
    r2: complex
    sigma: int

    def jump_matrix(self) -> np.ndarray:
        return np.array([
            [1.0 + self.sigma * self.r1 * self.r2, self.sigma * self.r2],
            [self.r1, 1.0],
        ], dtype=complex)


def beta_gamma(r1_at: complex, r2_at: complex, nu: complex, sigma: int,
               *, xi: float = 0.0) -> ModelCoefficients:
    """Model coefficients from the reflection values at the stationary point."""
    if abs(r1_at) < 1e-14 or abs(r2_at) < 1e-14:
        raise ModelError("vanishing reflection coefficient at the stationary point")
    nu = complex(nu)
    pref = math.sqrt(2.0 * math.pi) * cmath.exp(-math.pi * nu / 2.0)
    beta = pref * cmath.exp(-3j * math.pi / 4.0) \
        / (r1_at * specfun.gamma(-1j * nu))
    gam = sigma * pref * cmath.exp(-1j * math.pi / 4.0) \
        / (r2_at * specfun.gamma(1j * nu))
    return ModelCoefficients(xi=xi, beta=beta, gamma_c=gam, nu=nu,
                             r1=complex(r1_at), r2=complex(r2_at), sigma=sigma)


def m0_eval(coeff: ModelCoefficients, z: complex, side: int | None = None
            ) -> np.ndarray:
    """The model matrix at z.  On the real axis pass side=+1 (limit from
    above) or side=-1; elsewhere the half-plane of z decides."""
    z = complex(z)
    if side is None:
        if z.imag == 0.0:
            raise ModelError("on-axis evaluation needs an explicit side")
        upper = z.imag > 0.0
    else:
        upper = side > 0
    nu = coeff.nu
    a = 1j * nu
    if upper:
        pre11, eps11 = cmath.exp(-0.75 * math.pi * nu), cmath.exp(-0.75j * math.pi)
        pre22, eps22 = cmath.exp(0.25 * math.pi * nu), cmath.exp(-0.25j * math.pi)
    else:
        pre11, eps11 = cmath.exp(0.25 * math.pi * nu), cmath.exp(0.25j * math.pi)
        pre22, eps22 = cmath.exp(-0.75 * math.pi * nu), cmath.exp(0.75j * math.pi)
    w11 = eps11 * z
    w22 = eps22 * z
    d11_v = specfun.pcf_d(a, w11)
    d22_v = specfun.pcf_d(-a, w22)
    m11 = pre11 * d11_v
    m22 = pre22 * d22_v
    # D_a'(w) = (w/2) D_a(w) - D_{a+1}(w); chain rule supplies eps.  The
    # off-diagonal numerators are O(nu), so the nu -> 0 limit is exactly
    # the diagonal Gaussian matrix; dividing rounded numerators by a
    # vanishing beta or gamma would manufacture garbage instead.
    if abs(coeff.beta) < 1e-30:
        m21 = 0.0 + 0.0j
    else:
        d11p = pre11 * eps11 * (0.5 * w11 * d11_v - specfun.pcf_d(a + 1.0, w11))
        m21 = (d11p + 0.5j * z * m11) / (-coeff.beta)
    if abs(coeff.gamma_c) < 1e-30:
        m12 = 0.0 + 0.0j
    else:
        d22p = pre22 * eps22 * (0.5 * w22 * d22_v - specfun.pcf_d(-a + 1.0, w22))
        m12 = (d22p - 0.5j * z * m22) / (-coeff.gamma_c)
    return np.array([[m11, m12], [m21, m22]], dtype=complex)


# ---------------------------------------------------------------------------
# Diagnostics
# ---------------------------------------------------------------------------

def _ode_residual(coeff: ModelCoefficients, z: complex) -> float:
    """Relative residual of dm/dz + A(z) m = 0 via 4th-order differences."""
    h = 1e-3 * max(1.0, abs(z))
    if abs(z.imag) < 2.5 * h:
        # keep the whole stencil inside one half-plane
        z = complex(z.real, math.copysign(3.0 * h, z.imag if z.imag else 1.0))
    md = (-m0_eval(coeff, z + 2 * h) + 8 * m0_eval(coeff, z + h)
          - 8 * m0_eval(coeff, z - h) + m0_eval(coeff, z - 2 * h)) / (12 * h)
    m = m0_eval(coeff, z)
    A = np.array([[0.5j * z, coeff.beta], [coeff.gamma_c, -0.5j * z]])
    num = float(np.max(np.abs(md + A @ m)))
    den = float(np.max(np.abs(A @ m)) + np.max(np.abs(md)))
    return num / max(den, 1e-30)


def _znu_phase(coeff: ModelCoefficients, z: complex) -> np.ndarray:
    """z^{-i nu sigma3} e^{i z^2/4 sigma3} with the principal logarithm."""
    lz = cmath.log(z)
    d1 = cmath.exp(-1j * coeff.nu * lz + 1j * z * z / 4.0)
    return np.array([[d1, 0.0], [0.0, 1.0 / d1]], dtype=complex)


@dataclass(frozen=True)
class ModelReport:
    ode_residual_max: float
    jump_residual_max: float
    det_drift_max: float
    normalization_residuals: tuple
    normalization_slope: float
    beta_extraction_error: float
    gamma_extraction_error: float
    beta_gamma_product_error: float

    def as_dict(self) -> dict:
        return {
            "ode_residual_max": self.ode_residual_max,
            "jump_residual_max": self.jump_residual_max,
            "det_drift_max": self.det_drift_max,
            "normalization_residuals": list(self.normalization_residuals),
            "normalization_slope": self.normalization_slope,
            "beta_extraction_error": self.beta_extraction_error,
            "gamma_extraction_error": self.gamma_extraction_error,
            "beta_gamma_product_error": self.beta_gamma_product_error,
        }

    def to_json(self, fh) -> None:
        json.dump(self.as_dict(), fh, indent=2)
        fh.write("\n")


def verify_model(coeff: ModelCoefficients, zset=None, *, seed: int = 0
                 ) -> ModelReport:
    """Run the ODE / jump / determinant / normalization checks."""
    rng = np.random.default_rng(seed)
    if zset is None:
        r = rng.uniform(0.4, 7.5, size=100)
        th = np.concatenate([rng.uniform(0.05, math.pi - 0.05, size=50),
                             rng.uniform(-math.pi + 0.05, -0.05, size=50)])
        zset = r * np.exp(1j * th)

    ode_max = max(_ode_residual(coeff, complex(z)) for z in zset)

    j0 = coeff.jump_matrix()
    jump_max = 0.0
    for zr in (1.0, -1.0, 3.0, -3.0):
        mu = m0_eval(coeff, zr, side=+1)
        ml = m0_eval(coeff, zr, side=-1)
        jump_max = max(jump_max, float(np.max(np.abs(np.linalg.solve(ml, mu) - j0))))

    dets = np.array([np.linalg.det(m0_eval(coeff, complex(z))) for z in zset])
    det_drift = float(np.max(np.abs(dets - 1.0)))

    # normalization along the standard rays; fit E ~ sum_{j=1..6} m_j / z^j
    radii = np.array([14.0, 16.0, 18.0, 20.5, 23.0, 26.0, 29.0])
    zs = np.concatenate([radii * cmath.exp(0.25j * math.pi),
                         radii * cmath.exp(0.75j * math.pi)])
    Es = []
    for z in zs:
        E = m0_eval(coeff, complex(z)) @ _znu_phase(coeff, complex(z)) - np.eye(2)
        Es.append(E)
    Es = np.array(Es)
    norms = np.array([float(np.max(np.abs(E))) for E in Es])
    # slope of log|E| vs log|z| per ray, averaged
    nray = radii.size
    s1 = np.polyfit(np.log(radii), np.log(norms[:nray]), 1)[0]
    s2 = np.polyfit(np.log(radii), np.log(norms[nray:]), 1)[0]
    slope = 0.5 * (s1 + s2)
    V = np.stack([zs ** -1, zs ** -2, zs ** -3, zs ** -4, zs ** -5, zs ** -6],
                 axis=1)
    m1 = np.empty((2, 2), dtype=complex)
    for i in range(2):
        for j in range(2):
            sol, *_ = np.linalg.lstsq(V, Es[:, i, j], rcond=None)
            m1[i, j] = sol[0]
    beta_err = abs(-1j * m1[0, 1] - coeff.beta)
    gamma_err = abs(1j * m1[1, 0] - coeff.gamma_c)
    prod_err = abs(coeff.beta * coeff.gamma_c - coeff.nu)

    return ModelReport(
        ode_residual_max=float(ode_max),
        jump_residual_max=float(jump_max),
        det_drift_max=det_drift,
        normalization_residuals=tuple(norms.tolist()),
        normalization_slope=float(slope),
        beta_extraction_error=float(beta_err),
        gamma_extraction_error=float(gamma_err),
        beta_gamma_product_error=float(prod_err),
    )


__all__ = ["ModelCoefficients", "ModelReport", "ModelError",
           "beta_gamma", "m0_eval", "verify_model"]
