"""Reflection coefficients and the phase data entering the long-time formula.

From scattering data this module forms r1 = b/a1, r2(k) = conj(b(-k))/a2,
the combination w = 1 + sigma r1 r2 with its continuously unwrapped
argument (anchored to 0 at the left grid end, where w -> 1), and evaluates

    nu(-xi)  = -(1/2 pi) ln w(-xi)                       (unwrapped branch)
    chi(-xi) = -(1/2 pi i) int_{-inf}^{-xi} ln(-xi - z) d ln w(z)
    delta(k, xi) = exp{ (1/2 pi i) int_{-inf}^{-xi} ln w(z) / (z - k) dz }

together with the admissibility gates: zero-freeness of a1 (upper
half-plane) and a2 (lower), the unwrapped-argument window |arg w| < pi,
and the L1-norm sufficient conditions.

Quadrature notes.  The chi integrand has an integrable logarithmic
singularity at the stationary point; it is resolved on dyadically graded
panels with an analytic endpoint correction.  The half-line truncation at
the grid edge is repaired by the integration-by-parts boundary term
ln(-xi - k_min) ln w(k_min); the remaining tail is O(|ln w(k_min)|/|k_min|)
and is tracked as an error estimate.  Cauchy integrals near the cut use
local subtraction of ln w so only a smooth difference is quadratured.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.interpolate import CubicSpline

from .scattering import SpectralData
from . import specfun


class RHDataError(Exception):
    pass


class SpectralZeroError(RHDataError):
    """a1 or a2 vanishes on the grid; reflection coefficients undefined."""


class PhaseStepError(RHDataError):
    """Unwrapped phase jumps by more than pi/2 between nodes."""


class AssumptionError(RHDataError):
    """The winding assumption |arg w| < pi fails where it is required."""


class QuadratureError(RHDataError):
    """Estimated quadrature error above the requested tolerance."""


_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


def _panel_points(edges: np.ndarray):
    lo, hi = edges[:-1], edges[1:]
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    pts = mid[:, None] + half[:, None] * _GL_X[None, :]
    wts = half[:, None] * _GL_W[None, :]
    return pts, wts


def _graded_edges(a: float, width: float, levels: int = 44,
                  floor: float = 1e-12) -> np.ndarray:
    """Dyadic panel edges accumulating at a from a-width (ascending)."""
    u = width * 2.0 ** (-np.arange(levels + 1, dtype=float))
    u = u[u > floor * width]
    u = np.concatenate([u, [floor * width]])
    return a - u  # ascending, ends just short of a


# ---------------------------------------------------------------------------
# Reflection data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReflectionData:
    kgrid: np.ndarray
    r1: np.ndarray
    r2: np.ndarray
    w: np.ndarray
    arg_w: np.ndarray          # unwrapped, -> 0 at the left end
    sigma: int

    @cached_property
    def _lnw_spline(self) -> CubicSpline:
        lnw = np.log(np.abs(self.w)) + 1j * self.arg_w
        return CubicSpline(self.kgrid, lnw)

    @cached_property
    def _dlnw_spline(self):
        return self._lnw_spline.derivative()

    @cached_property
    def _r1_spline(self) -> CubicSpline:
        return CubicSpline(self.kgrid, self.r1)

    @cached_property
    def _r2_spline(self) -> CubicSpline:
        return CubicSpline(self.kgrid, self.r2)

    def lnw_at(self, k):
        return self._lnw_spline(k)

    def w_at(self, k):
        return np.exp(self._lnw_spline(k))

    def r1_at(self, k):
        return complex(self._r1_spline(k)) if np.ndim(k) == 0 else self._r1_spline(k)

    def r2_at(self, k):
        return complex(self._r2_spline(k)) if np.ndim(k) == 0 else self._r2_spline(k)

    def arg_bound_ok(self, upto: float | None = None) -> bool:
        """|arg w| < pi at every node (optionally only for k <= upto)."""
        if upto is None:
            return bool(np.max(np.abs(self.arg_w)) < math.pi)
        sel = self.kgrid <= upto
        if not np.any(sel):
            return True
        return bool(np.max(np.abs(self.arg_w[sel])) < math.pi)


def reflect(s: SpectralData, *, min_modulus: float = 1e-10,
            max_phase_step: float = 0.5 * math.pi) -> ReflectionData:
    """Reflection coefficients and unwrapped arg(1 + sigma r1 r2)."""
    k = s.kgrid
    if abs(k[0] + k[-1]) > 1e-9 * (k[-1] - k[0]):
        raise RHDataError("reflect needs a k grid symmetric about 0")
    m1 = float(np.min(np.abs(s.a1)))
    m2 = float(np.min(np.abs(s.a2)))
    if m1 <= min_modulus or m2 <= min_modulus:
        raise SpectralZeroError(
            f"min |a1| = {m1:.2e}, min |a2| = {m2:.2e}: zero on the grid")
    r1 = s.b / s.a1
    r2 = np.conj(s.b[::-1]) / s.a2
    w = 1.0 + s.sigma * r1 * r2
    raw = np.angle(w)
    steps = np.angle(np.exp(1j * np.diff(raw)))   # wrapped increments
    if np.max(np.abs(steps), initial=0.0) > max_phase_step:
        raise PhaseStepError(
            "arg w jumps by more than pi/2 between nodes; refine the k grid")
    arg_w = raw[0] + np.concatenate([[0.0], np.cumsum(steps)])
    return ReflectionData(kgrid=k, r1=r1, r2=r2, w=w, arg_w=arg_w,
                          sigma=s.sigma)


# ---------------------------------------------------------------------------
# nu, chi, delta
# ---------------------------------------------------------------------------

def nu_at(r: ReflectionData, xi: float) -> complex:
    """nu(-xi) = -(1/2 pi) ln w(-xi) on the unwrapped branch."""
    a = -xi
    if not (r.kgrid[0] <= a <= r.kgrid[-1]):
        raise RHDataError(f"stationary point {a} outside the k grid")
    if not r.arg_bound_ok(upto=a):
        raise AssumptionError("|arg w| >= pi on (-inf, -xi]; nu branch invalid")
    nu = -complex(r.lnw_at(a)) / (2.0 * math.pi)
    if abs(nu.imag) >= 0.5:
        raise AssumptionError(f"|Im nu| = {abs(nu.imag):.3f} >= 1/2")
    return nu


def _chi_quad(r: ReflectionData, a: float, k: complex | None) -> complex:
    """Integral int_{-inf}^{a} ln(arg) dlnw with arg = (a - z) for k None
    (real positive log on the path) or (k - z) for general k."""
    kmin = float(r.kgrid[0])
    if a <= kmin:
        return 0.0 + 0.0j
    g = r._dlnw_spline

    def logfactor(z):
        if k is None:
            return np.log(a - z)
        return np.log(k - z)

    # one panel decomposition of [kmin, a - floor]: a quasi-uniform base,
    # dyadic grading into the log endpoint at a, and (for general k near
    # the path) dyadic grading around the interior log point Re k
    U = min(1.0, 0.5 * (a - kmin))
    floor_w = U * 1e-12
    b_reg = a - U
    parts = [np.array([kmin]), _graded_edges(a, U)]
    if b_reg > kmin:
        n_panels = max(64, int((b_reg - kmin) / max(1e-6, _panel_width(r))))
        parts.append(np.linspace(kmin, b_reg, n_panels + 1))
    if k is not None and kmin < k.real < a and abs(k.imag) < 0.5:
        around = _graded_edges(k.real, 0.5)
        around = np.concatenate([around, k.real + (k.real - around)])
        parts.append(around[(around > kmin) & (around < a - floor_w)])
    edges = np.unique(np.concatenate(parts))
    pts, wts = _panel_points(edges)
    flat = pts.ravel()
    acc = np.sum(wts.ravel() * logfactor(flat) * g(flat))
    # analytic endpoint sliver: int_{a-floor}^{a} log * g(a)
    g0 = complex(g(a))
    if k is None:
        acc += g0 * floor_w * (math.log(floor_w) - 1.0)
    elif abs(k - a) > 10.0 * floor_w:
        acc += g0 * floor_w * np.log(complex(k - a))
    # half-line tail beyond the grid: boundary term of integration by parts
    lnw_min = complex(r._lnw_spline(kmin))
    acc += logfactor(np.array([kmin]))[0] * lnw_min
    return acc


def _panel_width(r: ReflectionData) -> float:
    span = float(r.kgrid[-1] - r.kgrid[0])
    return max(span / 4000.0, 4.0 * float(np.min(np.diff(r.kgrid))))


def _tail_estimate(r: ReflectionData, a: float) -> float:
    """Bound on the dropped half-line tail beyond the grid edge.

    After the integration-by-parts boundary term the remainder is
    int_{-inf}^{kmin} ln w/(z + xi) dz; with |ln w| <= env (kmin/z)^2 on the
    tail this is bounded by env/(4 pi).  The envelope env is the maximum of
    |ln w| over the outer 5% of nodes, so a single oscillation null at the
    edge cannot fool the estimate.
    """
    n_edge = max(8, r.kgrid.size // 20)
    lnw_edge = np.log(np.abs(r.w[:n_edge])) + 1j * r.arg_w[:n_edge]
    env = float(np.max(np.abs(lnw_edge)))
    return env / (4.0 * math.pi)


def chi_at(r: ReflectionData, xi: float, *, tol: float = 1e-7) -> complex:
    """chi(-xi) by graded quadrature of ln(-xi - z) d ln w(z)."""
    a = -xi
    if not (r.kgrid[0] < a <= r.kgrid[-1]):
        raise RHDataError(f"stationary point {a} outside the k grid")
    if not r.arg_bound_ok(upto=a):
        raise AssumptionError("|arg w| >= pi on (-inf, -xi]")
    est = _tail_estimate(r, a)
    if est > tol:
        raise QuadratureError(
            f"tail estimate {est:.1e} above {tol:.0e}; extend the k grid")
    acc = _chi_quad(r, a, None)
    return complex(-acc / (2j * math.pi))


def chi_general(r: ReflectionData, xi: float, k: complex, *,
                tol: float = 1e-7) -> complex:
    """chi(k) = -(1/2 pi i) int_{-inf}^{-xi} ln(k - z) d ln w(z), principal log."""
    a = -xi
    est = _tail_estimate(r, a)
    if est > tol:
        raise QuadratureError(f"tail estimate {est:.1e} above {tol:.0e}")
    acc = _chi_quad(r, a, complex(k))
    return complex(-acc / (2j * math.pi))


def delta_at(r: ReflectionData, xi: float, k: complex, *,
             tol: float = 1e-7) -> complex:
    """delta(k, xi) = exp{(1/2 pi i) int_{-inf}^{-xi} ln w / (z - k) dz}.

    k must stay off the cut (-inf, -xi]; values arbitrarily close to the
    cut are handled by subtracting ln w at the nearest path point.
    """
    a = -xi
    k = complex(k)
    kmin = float(r.kgrid[0])
    if a <= kmin:
        return 1.0 + 0.0j
    if abs(k.imag) < 1e-12 and k.real <= a:
        raise RHDataError(f"k = {k} lies on the branch cut (-inf, {a}]")
    est = _tail_estimate(r, a)
    if est > tol:
        raise QuadratureError(f"tail estimate {est:.1e} above {tol:.0e}")
    lnw = r._lnw_spline
    c = min(max(k.real, kmin), a)
    dist = abs(k - c)
    base = np.linspace(kmin, a, max(256, int((a - kmin) / _panel_width(r)) + 1))
    if dist < 1.0:
        # cluster panels geometrically around c down to the k offset scale
        scale = max(dist, 1e-9)
        offs = scale * 2.0 ** np.arange(0, 40, dtype=float)
        offs = offs[offs < 1.0]
        cluster = np.concatenate([c - offs, c + offs, [c]])
        cluster = cluster[(cluster > kmin) & (cluster < a)]
        edges = np.sort(np.unique(np.concatenate([base, cluster])))
        lnw_c = complex(lnw(c))
    else:
        edges = base
        lnw_c = 0.0 + 0.0j
    pts, wts = _panel_points(edges)
    flat = pts.ravel()
    vals = (lnw(flat) - lnw_c) / (flat - k)
    acc = np.sum(wts.ravel() * vals)
    if lnw_c != 0.0:
        # exact integral of the subtracted constant
        acc += lnw_c * (np.log(a - k) - np.log(kmin - k))
    return complex(np.exp(acc / (2j * math.pi)))


# ---------------------------------------------------------------------------
# Principal-value Cauchy integrals on the full grid
# ---------------------------------------------------------------------------

def pv_cauchy(kgrid: np.ndarray, f: np.ndarray, x: float) -> complex:
    """PV int_grid f(z)/(z - x) dz by local subtraction of f(x)."""
    sp = CubicSpline(kgrid, f)
    fx = complex(sp(x))
    dfx = complex(sp.derivative()(x))
    lo, hi = float(kgrid[0]), float(kgrid[-1])
    if not (lo < x < hi):
        raise RHDataError("PV point outside the grid")
    base = np.linspace(lo, hi, 4097)
    offs = 2.0 ** -np.arange(1, 40, dtype=float)
    offs = offs[offs > 1e-11]
    cluster = np.concatenate([x - offs, x + offs])
    cluster = cluster[(cluster > lo) & (cluster < hi)]
    edges = np.sort(np.unique(np.concatenate([base, cluster, [x]])))
    pts, wts = _panel_points(edges)
    flat = pts.ravel()
    d = flat - x
    vals = (sp(flat) - fx) / d
    tiny = np.abs(d) < 1e-12
    if np.any(tiny):
        vals[tiny] = dfx
    acc = complex(np.sum(wts.ravel() * vals))
    acc += fx * math.log((hi - x) / (x - lo))
    return acc


def unwrapped_log_a1a2(s: SpectralData) -> np.ndarray:
    """ln(a1 a2) on the grid, continuous branch anchored to 0 at the ends."""
    prod = s.a1 * s.a2
    raw = np.angle(prod)
    steps = np.angle(np.exp(1j * np.diff(raw)))
    arg = raw[0] + np.concatenate([[0.0], np.cumsum(steps)])
    return np.log(np.abs(prod)) + 1j * arg


# ---------------------------------------------------------------------------
# Ray data and gates
# ---------------------------------------------------------------------------

_NU_DEADBAND = 1e-12


def classify_remainder(nu: complex) -> str:
    if nu.imag > _NU_DEADBAND:
        return "pos"
    if nu.imag < -_NU_DEADBAND:
        return "neg"
    return "zero"


@dataclass(frozen=True)
class RayData:
    """Per-ray quantities entering the leading-order formula."""
    xi: float
    nu: complex
    chi: complex
    p: complex
    remainder_class: str

    def __post_init__(self):
        if abs(self.nu.imag) >= 0.5:
            raise AssumptionError(f"|Im nu| = {abs(self.nu.imag):.3f} >= 1/2")
        if self.remainder_class != classify_remainder(self.nu):
            raise RHDataError("remainder class inconsistent with Im nu")


RAY_CSV_HEADER = ["xi", "Re nu", "Im nu", "Re chi", "Im chi",
                  "gate_zeros", "gate_arg"]


def rays_to_csv(fh, rays: list[RayData], gate_zeros_ok, gate_arg_ok,
                comments: tuple[str, ...] = ()) -> None:
    for line in comments:
        fh.write(f"# {line}\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(RAY_CSV_HEADER)
    gz = "" if gate_zeros_ok is None else int(bool(gate_zeros_ok))
    ga = int(bool(gate_arg_ok))
    for ray in rays:
        w.writerow([repr(float(ray.xi)),
                    repr(float(ray.nu.real)), repr(float(ray.nu.imag)),
                    repr(float(ray.chi.real)), repr(float(ray.chi.imag)),
                    gz, ga])


@dataclass(frozen=True)
class GateReport:
    zeros_a1: int | None
    zeros_a2: int | None
    max_abs_arg_w: float
    grid_spacing: float
    l1_norm: float | None
    i0_value: float | None

    @property
    def zeros_ok(self) -> bool | None:
        if self.zeros_a1 is None or self.zeros_a2 is None:
            return None
        return self.zeros_a1 == 0 and self.zeros_a2 == 0

    @property
    def arg_ok(self) -> bool:
        return self.max_abs_arg_w < math.pi

    @property
    def l1_ok(self) -> bool | None:
        return None if self.l1_norm is None else self.l1_norm < 0.817

    @property
    def i0_ok(self) -> bool | None:
        return None if self.i0_value is None else self.i0_value < 2.0

    def all_pass(self) -> bool:
        return bool(self.zeros_ok) and self.arg_ok

    def as_dict(self) -> dict:
        return {
            "zeros_a1": self.zeros_a1,
            "zeros_a2": self.zeros_a2,
            "zeros_ok": self.zeros_ok,
            "max_abs_arg_w": self.max_abs_arg_w,
            "arg_ok": self.arg_ok,
            "grid_spacing": self.grid_spacing,
            "l1_norm": self.l1_norm,
            "l1_ok": self.l1_ok,
            "i0_value": self.i0_value,
            "i0_ok": self.i0_ok,
        }


def gate_assumptions(r: ReflectionData, *, a1_fn=None, a2_conj_fn=None,
                     l1_norm: float | None = None,
                     contour_halfwidth: float | None = None) -> GateReport:
    """Diagnostic report for the admissibility assumptions.

    Zero counts are computed when analytic continuations are supplied
    (see scattering.a1_function / a2_conj_function); the argument window
    is checked at the grid nodes, whose spacing is reported alongside.
    """
    from .scattering import count_zeros_upper
    kmax = contour_halfwidth if contour_halfwidth is not None \
        else float(r.kgrid[-1])
    zeros_a1 = zeros_a2 = None
    if a1_fn is not None:
        zeros_a1 = count_zeros_upper(a1_fn, kmax)
    if a2_conj_fn is not None:
        zeros_a2 = count_zeros_upper(a2_conj_fn, kmax)
    i0_value = None
    if l1_norm is not None:
        i0_value = specfun.bessel_i0(min(2.0 * l1_norm, 50.0))
    return GateReport(
        zeros_a1=zeros_a1,
        zeros_a2=zeros_a2,
        max_abs_arg_w=float(np.max(np.abs(r.arg_w))),
        grid_spacing=float(np.max(np.diff(r.kgrid))),
        l1_norm=l1_norm,
        i0_value=i0_value,
    )


__all__ = [
    "ReflectionData", "RayData", "GateReport",
    "RHDataError", "SpectralZeroError", "PhaseStepError", "AssumptionError",
    "QuadratureError",
    "reflect", "nu_at", "chi_at", "chi_general", "delta_at",
    "gate_assumptions", "pv_cauchy", "unwrapped_log_a1a2",
    "classify_remainder", "rays_to_csv", "RAY_CSV_HEADER",
]
