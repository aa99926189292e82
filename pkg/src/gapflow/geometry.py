"""Gap geometry between two closely spaced rigid inclusions.

The two inclusion boundaries near the contact point are graphs

    x3 = +eps/2 + h1(|x'|)      (top face)
    x3 = -eps/2 - h2(|x'|)      (bottom face),   |x'| <= 2R,

with radial profiles h_i vanishing to second order at the axis.  The
vertical gap thickness is delta(x') = eps + h1 + h2, and every blow-up
rate in the narrow region is a power of delta.

The module also provides the Keller-type function

    k(x) = (x3 - (h1-h2)(x')/2) / delta(x'),

which is affine in x3 and equals +-1/2 on the two faces.  Profiles are
polynomials in r supplied with exact derivative chains, so all geometric
weights (delta, h1-h2, face product) and their r-derivatives are
evaluated analytically; finite differences are reserved for fields that
have no closed form.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np

__all__ = [
    "RadialPolyProfile",
    "GapGeometry",
    "KellerEval",
    "delta",
    "keller",
]


class GeometryError(ValueError):
    """Invalid geometry (closed gap, bad profile, out-of-patch point)."""


@dataclass(frozen=True)
class RadialPolyProfile:
    """Radial profile h(r) = sum_j coeffs[j] * r**(j+2).

    coeffs[0] multiplies r^2, coeffs[1] multiplies r^3, and so on.  The
    profile and its r-derivatives of any order are exact.
    """

    coeffs: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))

    @property
    def powers(self) -> tuple[int, ...]:
        return tuple(j + 2 for j in range(len(self.coeffs)))

    def value(self, r, order: int = 0):
        """h^(order)(r) for scalar or array r."""
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        for c, p in zip(self.coeffs, self.powers):
            if c == 0.0:
                continue
            if order > p:
                continue
            fac = 1.0
            for q in range(p, p - order, -1):
                fac *= q
            out = out + c * fac * r ** (p - order)
        return out

    def __call__(self, r):
        return self.value(r, 0)

    def min_odd_power(self) -> int | None:
        """Lowest odd power of r with a nonzero coefficient, if any."""
        for c, p in zip(self.coeffs, self.powers):
            if c != 0.0 and p % 2 == 1:
                return p
        return None


def _as_profile(p) -> RadialPolyProfile:
    if isinstance(p, RadialPolyProfile):
        return p
    return RadialPolyProfile(tuple(p))


# --- tiny exact term algebra used only for Keller x'-derivatives ---------
#
# A term is  c * r^poly_part(r) ... represented as
#   (poly, rinv, dinv, p, q, s)  ->  poly(r) * r^(-rinv) * delta(r)^(-dinv)
#                                      * x1^p * x2^q * x3^s
# Differentiation in x1/x2 is closed on this family because
# d/dx1 f(r) = f'(r) x1 / r and delta' is again a polynomial.


class _Term:
    __slots__ = ("poly", "rinv", "dinv", "p", "q", "s")

    def __init__(self, poly, rinv, dinv, p, q, s):
        self.poly = np.atleast_1d(np.asarray(poly, dtype=float))
        self.rinv = rinv
        self.dinv = dinv
        self.p = p
        self.q = q
        self.s = s


def _poly_mul(a, b):
    return np.convolve(a, b)


def _poly_deriv(a):
    if len(a) <= 1:
        return np.zeros(1)
    return a[1:] * np.arange(1, len(a))


def _diff_terms(terms, axis, delta_poly, ddelta_poly):
    """Differentiate a term list with respect to x1 (axis=0) or x2 (axis=1)."""
    out = []
    for t in terms:
        dp = int(axis == 0)
        dq = int(axis == 1)
        # product rule over the four r-dependent/monomial factors
        d_poly = _poly_deriv(t.poly)
        if np.any(d_poly):
            out.append(_Term(d_poly, t.rinv + 1, t.dinv, t.p + dp, t.q + dq, t.s))
        if t.rinv:
            out.append(_Term(-t.rinv * t.poly, t.rinv + 2, t.dinv, t.p + dp, t.q + dq, t.s))
        if t.dinv:
            out.append(_Term(-t.dinv * _poly_mul(t.poly, ddelta_poly),
                             t.rinv + 1, t.dinv + 1, t.p + dp, t.q + dq, t.s))
        if axis == 0 and t.p:
            out.append(_Term(t.p * t.poly, t.rinv, t.dinv, t.p - 1, t.q, t.s))
        if axis == 1 and t.q:
            out.append(_Term(t.q * t.poly, t.rinv, t.dinv, t.p, t.q - 1, t.s))
    return out


def _eval_terms(terms, delta_poly, x1, x2, x3):
    r = np.hypot(x1, x2)
    dval = np.polyval(delta_poly[::-1], r)
    acc = 0.0
    for t in terms:
        val = np.polyval(t.poly[::-1], r)
        if t.rinv:
            val = val / r**t.rinv
        if t.dinv:
            val = val / dval**t.dinv
        acc = acc + val * x1**t.p * x2**t.q * x3**t.s
    return acc


@dataclass(frozen=True)
class GapGeometry:
    """Immutable description of the two-inclusion gap.

    eps      gap width at the contact axis (> 0)
    R        patch radius; the narrow region is |x'| <= 2R
    mu       viscosity (> 0)
    profile1, profile2   radial profiles h1, h2
    """

    eps: float
    R: float
    mu: float
    profile1: RadialPolyProfile
    profile2: RadialPolyProfile
    taylor: tuple[float, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "profile1", _as_profile(self.profile1))
        object.__setattr__(self, "profile2", _as_profile(self.profile2))
        if self.eps <= 0:
            raise GeometryError("gap width eps must be positive")
        if self.R <= 0 or self.mu <= 0:
            raise GeometryError("R and mu must be positive")
        n = max(len(self.profile1.coeffs), len(self.profile2.coeffs))
        tay = tuple(
            (self.profile1.coeffs[j] if j < len(self.profile1.coeffs) else 0.0)
            + (self.profile2.coeffs[j] if j < len(self.profile2.coeffs) else 0.0)
            for j in range(n)
        )
        object.__setattr__(self, "taylor", tay)
        if not tay or tay[0] <= 0:
            raise GeometryError("sum profile must have a1 = h''(0)-coefficient > 0")
        self._check_gap_open()
        self._check_comparability()

    # -- invariant checks run at construction time ------------------------

    def _sample_radii(self, n=257):
        return np.linspace(0.0, 2 * self.R, n)

    def _check_gap_open(self):
        r = self._sample_radii()
        if np.any(self.delta(r) <= 0):
            raise GeometryError("gap closes inside |x'| <= 2R")

    def _check_comparability(self):
        # (1/C)(eps+|x'|^2) <= delta <= C(eps+|x'|^2) with the declared C
        a1 = self.taylor[0]
        C = 10.0 * max(1.0, 1.0 / a1, sum(abs(a) for a in self.taylor))
        r = self._sample_radii()
        base = self.eps + r**2
        d = self.delta(r)
        if np.any(d > C * base) or np.any(d < base / C):
            raise GeometryError("delta is not comparable to eps+|x'|^2 on the patch")

    # -- analytic radial quantities ---------------------------------------

    def h1(self, r, order: int = 0):
        return self.profile1.value(r, order)

    def h2(self, r, order: int = 0):
        return self.profile2.value(r, order)

    def delta(self, r, order: int = 0):
        """delta^(order)(r) = d^order/dr^order [eps + h1 + h2]."""
        out = self.profile1.value(r, order) + self.profile2.value(r, order)
        if order == 0:
            out = out + self.eps
        return out

    def hdiff(self, r, order: int = 0):
        """(h1 - h2)^(order)(r)."""
        return self.profile1.value(r, order) - self.profile2.value(r, order)

    def face_product(self, r, order: int = 0):
        """e(r) = (eps + 2 h1)(eps + 2 h2)/4 and its exact r-derivatives.

        This is the polynomial with (k^2 - 1/4) = (x3^2 - (h1-h2) x3 - e)/delta^2.
        """
        # exact Leibniz rule on the two polynomial factors
        out = np.zeros_like(np.asarray(r, dtype=float))
        for j in range(order + 1):
            a = self.profile1.value(r, j) * 2.0
            if j == 0:
                a = a + self.eps
            b = self.profile2.value(r, order - j) * 2.0
            if order - j == 0:
                b = b + self.eps
            out = out + comb(order, j) * a * b
        return out / 4.0

    def top_face(self, r):
        return self.eps / 2.0 + self.h1(r)

    def bottom_face(self, r):
        return -self.eps / 2.0 - self.h2(r)

    @property
    def smoothness_order(self) -> int:
        """Largest m with sum profile in C^{m+1,alpha}: odd powers cap it."""
        odd = [p.min_odd_power() for p in (self.profile1, self.profile2)]
        odd = [p for p in odd if p is not None]
        if not odd:
            return 7
        return min(odd) - 1

    @property
    def symmetric(self) -> bool:
        return self.profile1.coeffs == self.profile2.coeffs

    # -- point evaluators --------------------------------------------------

    def _require_in_patch(self, r):
        if np.any(np.asarray(r) > 2 * self.R * (1 + 1e-12)):
            raise GeometryError("point outside the patch |x'| <= 2R")

    def delta_at(self, xp):
        """delta(x') for a planar point; domain-checked."""
        xp = np.asarray(xp, dtype=float)
        r = np.hypot(xp[..., 0], xp[..., 1]) if xp.shape[-1] == 2 else np.abs(xp)
        self._require_in_patch(r)
        return self.delta(r)

    def in_gap(self, x, tol=1e-12):
        x = np.asarray(x, dtype=float)
        r = np.hypot(x[..., 0], x[..., 1])
        lo = self.bottom_face(r) - tol
        hi = self.top_face(r) + tol
        return (r <= 2 * self.R * (1 + 1e-12)) & (x[..., 2] >= lo) & (x[..., 2] <= hi)

    def keller(self, x) -> "KellerEval":
        """Keller function and gradient at a gap point (domain-checked)."""
        x = np.asarray(x, dtype=float)
        if not np.all(self.in_gap(x)):
            raise GeometryError("point outside the closed gap")
        return KellerEval._make(self, x)

    def keller_value(self, x):
        x = np.asarray(x, dtype=float)
        r = np.hypot(x[..., 0], x[..., 1])
        return (x[..., 2] - 0.5 * self.hdiff(r)) / self.delta(r)

    # -- polynomials in r used by the exact Keller term algebra -----------

    def _delta_poly(self):
        deg = max(self.profile1.powers[-1] if self.profile1.coeffs else 0,
                  self.profile2.powers[-1] if self.profile2.coeffs else 0)
        c = np.zeros(deg + 1)
        c[0] = self.eps
        for coef, p in zip(self.profile1.coeffs, self.profile1.powers):
            c[p] += coef
        for coef, p in zip(self.profile2.coeffs, self.profile2.powers):
            c[p] += coef
        return c

    def _hdiff_poly(self):
        deg = max(self.profile1.powers[-1] if self.profile1.coeffs else 0,
                  self.profile2.powers[-1] if self.profile2.coeffs else 0)
        c = np.zeros(deg + 1)
        for coef, p in zip(self.profile1.coeffs, self.profile1.powers):
            c[p] += coef
        for coef, p in zip(self.profile2.coeffs, self.profile2.powers):
            c[p] -= coef
        return c


@dataclass(frozen=True)
class KellerEval:
    """Value, gradient, and exact higher x'-derivatives of k at one point."""

    value: float
    grad: tuple[float, float, float]
    _geom: GapGeometry
    _x: tuple[float, float, float]

    @staticmethod
    def _make(geom: GapGeometry, x):
        x = np.asarray(x, dtype=float)
        r = np.hypot(x[..., 0], x[..., 1])
        d = geom.delta(r)
        k = (x[..., 2] - 0.5 * geom.hdiff(r)) / d
        # kdds: d_i k = -d_i(h1-h2)/(2 delta) - d_i(h1+h2) k / delta
        with np.errstate(invalid="ignore", divide="ignore"):
            unit = np.where(r > 0, 1.0 / np.where(r > 0, r, 1.0), 0.0)
        hd1 = geom.hdiff(r, 1)
        hs1 = geom.delta(r, 1)
        gx = (-hd1 / (2 * d) - hs1 * k / d) * x[..., 0] * unit
        gy = (-hd1 / (2 * d) - hs1 * k / d) * x[..., 1] * unit
        gz = 1.0 / d
        if x.ndim == 1:
            return KellerEval(float(k), (float(gx), float(gy), float(gz)),
                              geom, tuple(float(v) for v in x))
        return KellerEval(k, (gx, gy, gz), geom, x)

    def xprime_derivative(self, a: int, b: int):
        """Exact mixed partial d^a_{x1} d^b_{x2} k at the stored point.

        Supported up to total order m+1 of the geometry's smoothness
        declaration; the term algebra itself is exact at any order.
        """
        geom = self._geom
        dpoly = geom._delta_poly()
        ddpoly = _poly_deriv(dpoly)
        # k = x3 * delta^-1 - (1/2) hdiff * delta^-1
        terms = [
            _Term([1.0], 0, 1, 0, 0, 1),
            _Term(-0.5 * geom._hdiff_poly(), 0, 1, 0, 0, 0),
        ]
        for _ in range(a):
            terms = _diff_terms(terms, 0, dpoly, ddpoly)
        for _ in range(b):
            terms = _diff_terms(terms, 1, dpoly, ddpoly)
        x1, x2, x3 = self._x
        return float(_eval_terms(terms, dpoly, x1, x2, x3))


# -- module-level convenience wrappers matching the operation names -------

def delta(geom: GapGeometry, xp):
    return geom.delta_at(xp)


def keller(geom: GapGeometry, x) -> KellerEval:
    return geom.keller(x)


def preset_geometry(name: str, eps: float = 1e-3, R: float = 0.5, mu: float = 1.0) -> GapGeometry:
    """Shipped test geometries.

    symmetric-default   h1 = h2 = r^2/2        (equal osculating spheres)
    asymmetric-default  h1 = r^2/2 + 0.2 r^3,  h2 = r^2/2
    """
    if name == "symmetric-default":
        p = RadialPolyProfile((0.5,))
        return GapGeometry(eps, R, mu, p, p)
    if name == "asymmetric-default":
        return GapGeometry(eps, R, mu,
                           RadialPolyProfile((0.5, 0.2)),
                           RadialPolyProfile((0.5,)))
    raise GeometryError(f"unknown preset {name!r}")
