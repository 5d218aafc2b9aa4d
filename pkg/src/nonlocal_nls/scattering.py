"""Direct scattering transform for the nonlocal NLS equation.

The spectral functions a1(k), a2(k), b(k) of a decaying profile q0 are
obtained by integrating the linear systems

    psi1' = q0(x) psi3,            psi3' = 2ik psi3 - sigma conj(q0(-x)) psi1
    psi2' = -2ik psi2 + q0(x) psi4, psi4' = -sigma conj(q0(-x)) psi2

with (psi1, psi3) -> (1, 0) and (psi2, psi4) -> (0, 1) as x -> -inf, then

    a1 = psi1(+inf),  b = e^{-2ikx} psi3 |_{+inf},  a2 = psi4(+inf).

For real k both systems are advanced together as one fundamental 2x2
matrix in the phase-referenced variables (psi1, e^{-2ikx} psi3; e^{2ikx}
psi2, psi4), which removes the free oscillation from the state: the
limit values are then read off directly and no large phase e^{-2ik x_max}
is ever formed, so there is no cancellation at large k x_max.  The matrix
at x_max is exactly the scattering matrix S(k).

All k nodes are integrated simultaneously with a shared adaptive step and
max-norm error control (see _rk).  Analytic continuation off the real
axis (for zero counting) uses the raw psi variables, which decay in the
relevant half-planes.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from . import _rk

DEFAULT_KMAX = 12.0
DEFAULT_KNODES = 2001
_DECAY_TOL = 1e-10


class ScatteringError(Exception):
    pass


class ProfileError(ScatteringError):
    """Invalid initial profile (asymmetric grid, no decay at the ends)."""


class ZeroOnContourError(ScatteringError):
    """a1 (or a2) vanishes on the zero-counting contour."""


# ---------------------------------------------------------------------------
# Initial data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InitialProfile:
    """Initial datum q0(x): an analytic box or symmetric complex samples."""

    kind: str                      # "box" | "sampled"
    sigma: int
    H: complex = 0.0 + 0.0j       # box amplitude
    L: float = 0.0                 # box width, support (0, L)
    xgrid: np.ndarray | None = None
    values: np.ndarray | None = None
    _spline: CubicSpline | None = field(default=None, repr=False, compare=False)

    @staticmethod
    def box(H: complex, L: float, sigma: int) -> "InitialProfile":
        if L <= 0:
            raise ProfileError("box width L must be positive")
        if sigma not in (1, -1):
            raise ProfileError("sigma must be +1 or -1")
        return InitialProfile(kind="box", sigma=sigma, H=complex(H), L=float(L))

    @staticmethod
    def sampled(xgrid, values, sigma: int,
                decay_tol: float = _DECAY_TOL) -> "InitialProfile":
        x = np.asarray(xgrid, dtype=float)
        v = np.asarray(values, dtype=complex)
        if sigma not in (1, -1):
            raise ProfileError("sigma must be +1 or -1")
        if x.ndim != 1 or x.size < 8 or x.shape != v.shape:
            raise ProfileError("need matching 1-d x grid and values")
        dx = np.diff(x)
        if not np.allclose(dx, dx[0], rtol=0, atol=1e-9 * abs(dx[0])):
            raise ProfileError("sample grid must be uniform")
        if abs(x[0] + x[-1]) > 1e-9 * (x[-1] - x[0]):
            raise ProfileError("sample grid must be symmetric about 0")
        if max(abs(v[0]), abs(v[-1])) > decay_tol:
            raise ProfileError(
                f"profile has not decayed below {decay_tol} at the grid ends")
        sp = CubicSpline(x, v, bc_type="natural")
        return InitialProfile(kind="sampled", sigma=sigma, xgrid=x, values=v,
                              _spline=sp)

    # -- evaluation --------------------------------------------------------

    def value(self, x: float) -> complex:
        """q0 at a single point (open-interval convention for the box)."""
        if self.kind == "box":
            return self.H if 0.0 < x < self.L else 0.0 + 0.0j
        if self.xgrid[0] <= x <= self.xgrid[-1]:
            return complex(self._spline(x))
        return 0.0 + 0.0j

    def support(self) -> tuple[float, float]:
        """Interval outside which both q0(x) and q0(-x) vanish (to tol)."""
        if self.kind == "box":
            return -self.L, self.L
        return float(self.xgrid[0]), float(self.xgrid[-1])

    def breakpoints(self) -> tuple[float, ...]:
        if self.kind == "box":
            return (-self.L, 0.0, self.L)
        return ()

    def l1_norm(self) -> float:
        if self.kind == "box":
            return abs(self.H) * self.L
        return float(np.trapezoid(np.abs(self.values), self.xgrid))


# ---------------------------------------------------------------------------
# Spectral data
# ---------------------------------------------------------------------------

_CSV_HEADER = ["k", "Re a1", "Im a1", "Re a2", "Im a2", "Re b", "Im b"]


@dataclass(frozen=True)
class SpectralData:
    """a1, a2, b sampled on a symmetric uniform k grid."""

    kgrid: np.ndarray
    a1: np.ndarray
    a2: np.ndarray
    b: np.ndarray
    sigma: int

    def det_relation(self) -> np.ndarray:
        """a1 a2 + sigma b(k) conj(b(-k)) - 1 on the grid."""
        return self.a1 * self.a2 + self.sigma * self.b * np.conj(self.b[::-1]) - 1.0

    def to_csv(self, fh, comments: tuple[str, ...] = ()) -> None:
        for line in comments:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(_CSV_HEADER)
        for i, k in enumerate(self.kgrid):
            w.writerow([repr(float(k)),
                        repr(float(self.a1[i].real)), repr(float(self.a1[i].imag)),
                        repr(float(self.a2[i].real)), repr(float(self.a2[i].imag)),
                        repr(float(self.b[i].real)), repr(float(self.b[i].imag))])

    @staticmethod
    def from_csv(fh, sigma: int) -> "SpectralData":
        rows = [r for r in csv.reader(l for l in fh if not l.startswith("#"))]
        if rows[0] != _CSV_HEADER:
            raise ScatteringError("unexpected spectral CSV header")
        arr = np.array(rows[1:], dtype=float)
        return SpectralData(kgrid=arr[:, 0],
                            a1=arr[:, 1] + 1j * arr[:, 2],
                            a2=arr[:, 3] + 1j * arr[:, 4],
                            b=arr[:, 5] + 1j * arr[:, 6],
                            sigma=sigma)


def default_kgrid(kmax: float = DEFAULT_KMAX, n: int = DEFAULT_KNODES) -> np.ndarray:
    return np.linspace(-kmax, kmax, n)


# ---------------------------------------------------------------------------
# Direct transform
# ---------------------------------------------------------------------------

def scatter(q0: InitialProfile, kgrid: np.ndarray, *,
            rtol: float = 1e-10, atol: float = 1e-11) -> SpectralData:
    """Compute the scattering data of q0 on a real k grid."""
    k = np.asarray(kgrid, dtype=float)
    x_lo, x_hi = q0.support()
    sigma = q0.sigma
    two_ik = 2j * k

    def rhs(x, Y):
        # Y has shape (2, 2, nk); columns are the two Jost solutions
        u = q0.value(x)
        v = np.conj(q0.value(-x))
        e = np.exp(two_ik * x)
        a01 = u * e
        a10 = -sigma * v / e
        out = np.empty_like(Y)
        out[0, 0] = a01 * Y[1, 0]
        out[0, 1] = a01 * Y[1, 1]
        out[1, 0] = a10 * Y[0, 0]
        out[1, 1] = a10 * Y[0, 1]
        return out

    Y0 = np.zeros((2, 2, k.size), dtype=complex)
    Y0[0, 0] = 1.0
    Y0[1, 1] = 1.0
    Y = _rk.integrate(rhs, x_lo, x_hi, Y0, rtol=rtol, atol=atol,
                      breakpoints=q0.breakpoints())
    return SpectralData(kgrid=k, a1=Y[0, 0], a2=Y[1, 1], b=Y[1, 0],
                        sigma=sigma)


def box_spectral(H: complex, L: float, sigma: int, k) -> tuple:
    """Closed-form box spectral functions; Taylor fallback near k = 0.

    a1 = 1 + sigma |H|^2 (e^{2ikL}-1)^2 / (4k^2),  a2 = 1,
    b  = sigma conj(H) (1 - e^{2ikL}) / (2ik).
    """
    karr = np.atleast_1d(np.asarray(k, dtype=complex))
    a1 = np.empty_like(karr)
    b = np.empty_like(karr)
    small = np.abs(karr * L) < 1e-3
    ks = karr[~small]
    if ks.size:
        ph = np.exp(2j * ks * L)
        a1[~small] = 1.0 + sigma * abs(H) ** 2 / (4.0 * ks ** 2) * (ph - 1.0) ** 2
        b[~small] = sigma * np.conj(H) / (2j * ks) * (1.0 - ph)
    kl = karr[small] * L
    if kl.size:
        # (e^{2ikL}-1)^2/(4k^2) = -L^2 (1 + 2ikL - 7/3 (kL)^2 - 2i (kL)^3 + ...)
        a1[small] = 1.0 - sigma * abs(H) ** 2 * L ** 2 * (
            1.0 + 2j * kl - (7.0 / 3.0) * kl ** 2 - 2j * kl ** 3)
        b[small] = -sigma * np.conj(H) * L * (
            1.0 + 1j * kl - (2.0 / 3.0) * kl ** 2 - (1j / 3.0) * kl ** 3)
    a2 = np.ones_like(a1)
    if np.isscalar(k) or np.ndim(k) == 0:
        return a1[0], a2[0], b[0]
    return a1, a2, b


@dataclass(frozen=True)
class PropertyReport:
    max_a1_symmetry: float     # |conj(a1(-k)) - a1(k)|
    max_a2_symmetry: float
    max_det_relation: float    # |a1 a2 + sigma b(k) conj(b(-k)) - 1|
    tail_a1: float             # |a1 - 1| at the grid ends
    tail_a2: float
    tail_b: float

    def max_violation(self) -> float:
        return max(self.max_a1_symmetry, self.max_a2_symmetry,
                   self.max_det_relation)

    def as_dict(self) -> dict:
        return {
            "max_a1_symmetry": self.max_a1_symmetry,
            "max_a2_symmetry": self.max_a2_symmetry,
            "max_det_relation": self.max_det_relation,
            "tail_a1": self.tail_a1,
            "tail_a2": self.tail_a2,
            "tail_b": self.tail_b,
        }


def check_properties(s: SpectralData) -> PropertyReport:
    """Symmetry, determinant and decay diagnostics of scattering data."""
    k = s.kgrid
    if abs(k[0] + k[-1]) > 1e-9 * (k[-1] - k[0]):
        raise ScatteringError("check_properties needs a symmetric k grid")
    sym1 = np.max(np.abs(np.conj(s.a1[::-1]) - s.a1))
    sym2 = np.max(np.abs(np.conj(s.a2[::-1]) - s.a2))
    det = np.max(np.abs(s.det_relation()))
    edge = [0, -1]
    return PropertyReport(
        max_a1_symmetry=float(sym1),
        max_a2_symmetry=float(sym2),
        max_det_relation=float(det),
        tail_a1=float(np.max(np.abs(s.a1[edge] - 1.0))),
        tail_a2=float(np.max(np.abs(s.a2[edge] - 1.0))),
        tail_b=float(np.max(np.abs(s.b[edge]))),
    )


# ---------------------------------------------------------------------------
# Analytic continuation and zero counting
# ---------------------------------------------------------------------------

def _continue_a1(q0: InitialProfile, k: np.ndarray) -> np.ndarray:
    """a1 at complex k (Im k >= 0) by integrating the raw (psi1, psi3) system."""
    x_lo, x_hi = q0.support()
    sigma = q0.sigma
    two_ik = 2j * np.asarray(k, dtype=complex)
    stiff = float(np.max(np.abs(two_ik))) if k.size else 0.0

    def rhs(x, Y):
        u = q0.value(x)
        v = np.conj(q0.value(-x))
        out = np.empty_like(Y)
        out[0] = u * Y[1]
        out[1] = two_ik * Y[1] - sigma * v * Y[0]
        return out

    Y0 = np.zeros((2, k.size), dtype=complex)
    Y0[0] = 1.0
    h_max = 2.5 / stiff if stiff > 0 else np.inf   # explicit stability budget
    Y = _rk.integrate(rhs, x_lo, x_hi, Y0, rtol=1e-10, atol=1e-12,
                      breakpoints=q0.breakpoints(), h_max=h_max)
    return Y[0]


def _continue_a2(q0: InitialProfile, k: np.ndarray) -> np.ndarray:
    """a2 at complex k (Im k <= 0) via the raw (psi2, psi4) system."""
    x_lo, x_hi = q0.support()
    sigma = q0.sigma
    two_ik = 2j * np.asarray(k, dtype=complex)
    stiff = float(np.max(np.abs(two_ik))) if k.size else 0.0

    def rhs(x, Y):
        u = q0.value(x)
        v = np.conj(q0.value(-x))
        out = np.empty_like(Y)
        out[0] = -two_ik * Y[0] + u * Y[1]
        out[1] = -sigma * v * Y[0]
        return out

    Y0 = np.zeros((2, k.size), dtype=complex)
    Y0[1] = 1.0
    h_max = 2.5 / stiff if stiff > 0 else np.inf
    Y = _rk.integrate(rhs, x_lo, x_hi, Y0, rtol=1e-10, atol=1e-12,
                      breakpoints=q0.breakpoints(), h_max=h_max)
    return Y[1]


def a1_function(q0: InitialProfile):
    """Batch-callable a1(k) analytic in the closed upper half-plane."""
    if q0.kind == "box":
        H, L, sig = q0.H, q0.L, q0.sigma

        def f(k):
            return box_spectral(H, L, sig, np.asarray(k, dtype=complex))[0]
        return f

    def f(k):
        return _continue_a1(q0, np.asarray(k, dtype=complex))
    return f


def a2_conj_function(q0: InitialProfile):
    """Batch-callable k -> conj(a2(conj k)), analytic in the closed UHP."""
    if q0.kind == "box":
        def f(k):
            return np.ones_like(np.asarray(k, dtype=complex))
        return f

    def f(k):
        kk = np.conj(np.asarray(k, dtype=complex))
        return np.conj(_continue_a2(q0, kk))
    return f


def _rect_path(kmax: float, height: float, n: int) -> np.ndarray:
    """Counterclockwise rectangle [-kmax, kmax] x [0, height]."""
    per_edge = max(n // 4, 64)
    t = np.linspace(0.0, 1.0, per_edge, endpoint=False)
    bottom = -kmax + 2.0 * kmax * t
    right = kmax + 1j * height * t
    top = kmax - 2.0 * kmax * t + 1j * height
    left = -kmax + 1j * height * (1.0 - t)
    return np.concatenate([bottom, right, top, left, [-kmax + 0.0j]])


def count_zeros_upper(a1_analytic, kmax: float, *, height: float | None = None,
                      n0: int = 1024, min_modulus: float = 1e-8,
                      max_rounds: int = 12) -> int:
    """Zeros of a1 inside [-kmax, kmax] x [0, height] by the argument principle.

    ``a1_analytic`` must accept a complex ndarray.  The contour sampling is
    refined until consecutive phase steps stay below pi/2, then the winding
    number of a1 about 0 is returned.  A zero within ``min_modulus`` of the
    contour raises ZeroOnContourError (indent the rectangle or change kmax).
    """
    height = kmax if height is None else height
    path = _rect_path(kmax, height, n0)
    vals = np.asarray(a1_analytic(path))
    m = float(np.min(np.abs(vals)))
    if m <= min_modulus:
        raise ZeroOnContourError(
            f"min |a1| = {m:.2e} on the contour; zero too close to boundary")
    for _ in range(max_rounds):
        dphi = np.angle(vals[1:] / vals[:-1])
        bad = np.abs(dphi) > 0.5 * math.pi
        if not np.any(bad):
            break
        mids = 0.5 * (path[:-1][bad] + path[1:][bad])
        mvals = np.asarray(a1_analytic(mids))
        if np.min(np.abs(mvals)) <= min_modulus:
            raise ZeroOnContourError("refinement hit a near-zero of a1")
        idx = np.nonzero(bad)[0]
        path = np.insert(path, idx + 1, mids)
        vals = np.insert(vals, idx + 1, mvals)
    else:
        raise ScatteringError("contour refinement did not settle")
    total = float(np.sum(np.angle(vals[1:] / vals[:-1])))
    wind = total / (2.0 * math.pi)
    if abs(wind - round(wind)) > 0.05:
        raise ScatteringError(f"non-integer winding {wind:.4f}")
    return int(round(wind))


__all__ = [
    "InitialProfile", "SpectralData", "PropertyReport",
    "ScatteringError", "ProfileError", "ZeroOnContourError",
    "scatter", "box_spectral", "check_properties", "count_zeros_upper",
    "a1_function", "a2_conj_function", "default_kgrid",
    "DEFAULT_KMAX", "DEFAULT_KNODES",
]
