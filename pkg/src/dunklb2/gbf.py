r"""Generalized Bessel function of type B2 and its Laplace-type density.

Notation.  For ``y`` in the plane put ``Y = |y|^2``, ``A = y1^2 - y2^2`` and
``B = 2 y1 y2``.  The (u, v) integrals of the density become, after
``p = u A``, ``q = v B``, integrals over

* the rectangle ``|p| <= |A|``, ``|q| <= |B|`` (whose corners lie on the
  circle of radius ``Y``), intersected with
* the disk centred at ``(z1^2 - z2^2, 2 z1 z2)`` of radius ``|Y - |z|^2|``.

The bracket of the density is ``R^2 - |(p, q) - centre|^2`` and the prefactor
``(y1^2-y2^2)^2 (1-u^2) + 4 y1^2 y2^2 (1-v^2)`` is ``Y^2 - p^2 - q^2``.
Densities are integrated in polar coordinates about the disk centre
(:func:`density_H`); :func:`dh_density` uses iterated Cartesian integration
in (p, q) instead, and :func:`density_H_adaptive` goes through the generic
implicit-region integrator in (u, v).  The three routes share no code beyond
the 1D rules.

As a function of ``z`` the density is smooth away from a known set of lines
(tangencies of the disk with the rectangle sides, passages of the circle
through the rectangle corners, the mirrors); :func:`hull_cut_lines` returns
them and the outer integrals over ``co(y)`` are cut along them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .errors import ConvergenceError, DegenerateInputError
from .quadrature import (
    EvalResult,
    ImplicitRegion2D,
    clustered_rule,
    gauss_jacobi,
    gauss_legendre,
    integrate_polygon,
    integrate_region,
    integrate_uv_weighted,
    polygon_rule,
)
from .specfun import bessel_i_norm, ln_gamma

__all__ = [
    "Multiplicity",
    "PlanarPoint",
    "ABCCoefficients",
    "ConvexHullB2",
    "z_poly",
    "normalizing_c",
    "gbf",
    "gbf_fixed",
    "gbf_laplace",
    "abc",
    "bracket",
    "region_E",
    "region_E_contains",
    "density_H",
    "density_H_values",
    "dh_density_values",
    "density_H_adaptive",
    "convex_hull_contains",
    "convex_hull_polygon",
    "hull_cut_lines",
    "hull_integral",
    "chamber_rule",
    "dh_density",
    "dh_measure_density",
    "gt_pattern_contains",
    "gt_pattern_volume",
]

GBF_ORDERS = (16, 32, 64, 128)
HULL_ORDERS = (8, 12, 16, 24)
# (angular, radial) nodes per arc for the polar density rule, per outer order
INNER_ORDERS = {8: (16, 16), 12: (16, 16), 16: (24, 20), 24: (32, 24)}


@dataclass(frozen=True)
class Multiplicity:
    """Multiplicity values: ``k1`` on the long roots ``+-e1 +- e2``, ``k2`` on ``+-e1, +-e2``."""

    k1: float
    k2: float

    def __post_init__(self):
        if not (self.k1 > 0 and self.k2 > 0):
            raise ValueError(f"multiplicities must be positive, got ({self.k1}, {self.k2})")
        object.__setattr__(self, "k1", float(self.k1))
        object.__setattr__(self, "k2", float(self.k2))

    @property
    def gamma(self):
        return self.k1 + self.k2

    @property
    def c_k(self):
        return normalizing_c(self)

    def shifted(self, d1=0, d2=0):
        return Multiplicity(self.k1 + d1, self.k2 + d2)

    def __iter__(self):
        return iter((self.k1, self.k2))


class PlanarPoint(NamedTuple):
    c1: float
    c2: float


class ABCCoefficients(NamedTuple):
    a: float
    b: float
    c: float
    denom: float


@dataclass(frozen=True)
class ConvexHullB2:
    y: PlanarPoint
    vertices: tuple

    @property
    def s(self):
        return abs(self.y[0]) + abs(self.y[1])

    @property
    def m(self):
        return max(abs(self.y[0]), abs(self.y[1]))


def _mult(k):
    return k if isinstance(k, Multiplicity) else Multiplicity(*k)


def _point(p):
    c1, c2 = p
    c1, c2 = float(c1), float(c2)
    if not (math.isfinite(c1) and math.isfinite(c2)):
        raise ValueError("coordinates must be finite")
    return PlanarPoint(c1, c2)


# ---------------------------------------------------------------------------
# the (u, v) representation


def z_poly(x, y, u, v):
    """(x1^2+x2^2)(y1^2+y2^2) + u (x1^2-x2^2)(y1^2-y2^2) + 4 v x1 x2 y1 y2."""
    x1, x2 = x
    y1, y2 = y
    return ((x1 * x1 + x2 * x2) * (y1 * y1 + y2 * y2)
            + u * (x1 * x1 - x2 * x2) * (y1 * y1 - y2 * y2)
            + 4.0 * v * x1 * x2 * y1 * y2)


def normalizing_c(k):
    k = _mult(k)
    return math.exp(ln_gamma(k.k1 + 0.5) + ln_gamma(k.k2 + 0.5)
                    - ln_gamma(k.k1) - ln_gamma(k.k2)) / math.pi


def gbf_fixed(x, y, k, n):
    """The (u, v) representation at a fixed tensor order ``n``.

    A fixed order makes the result a smooth function of ``x``, which finite
    differences rely on.
    """
    k = _mult(k)
    nu = k.gamma - 0.5
    x, y = _point(x), _point(y)

    def integrand(U, V):
        z = np.maximum(z_poly(x, y, U, V), 0.0)
        return bessel_i_norm(nu, np.sqrt(0.5 * z))

    return k.c_k * integrate_uv_weighted(integrand, k, n)


def gbf(x, y, k, tol=1e-12, orders=GBF_ORDERS):
    """D^W_k(x, y) from the (u, v) integral of the normalized Bessel function.

    The tensor order is doubled until two successive values differ by at
    most ``tol * (1 + |value|)``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    k = _mult(k)
    if not k.gamma > 0:
        raise ValueError("gamma must be positive")
    x, y = _point(x), _point(y)
    if x == (0.0, 0.0) or y == (0.0, 0.0):
        # Z vanishes identically and the weight is normalized
        return EvalResult(1.0, 0.0, True, 0)
    prev = None
    evals = 0
    for n in orders:
        val = gbf_fixed(x, y, k, n)
        evals += n * n
        if prev is not None:
            err = abs(val - prev)
            if err <= tol * (1.0 + abs(val)):
                return EvalResult(val, err, True, evals)
        prev = val
    return EvalResult(val, err, False, evals)


def gbf_order(x, y, k, tol=1e-12, orders=GBF_ORDERS):
    """Smallest tensor order on the ladder at which :func:`gbf` converges."""
    prev = None
    for n in orders:
        val = gbf_fixed(x, y, k, n)
        if prev is not None and abs(val - prev) <= tol * (1.0 + abs(val)):
            return n
        prev = val
    raise ConvergenceError("GBF quadrature did not converge")


def abc(y, u, v):
    """The coefficients (a, b, c) with sqrt(Z/2) = a sqrt((x1 + c x2)^2 + b^2 x2^2)."""
    y1, y2 = _point(y)
    Y = y1 * y1 + y2 * y2
    A = y1 * y1 - y2 * y2
    denom = Y + u * A
    if not denom > 1e-12 * Y:
        raise DegenerateInputError("denominator y1^2 + y2^2 + u (y1^2 - y2^2) vanishes")
    P = A * A * (1.0 - u * u) + 4.0 * y1 * y1 * y2 * y2 * (1.0 - v * v)
    a = math.sqrt(0.5 * denom)
    b = math.sqrt(max(P, 0.0)) / denom
    c = 2.0 * v * y1 * y2 / denom
    return ABCCoefficients(a, b, c, denom)


def bracket(y, z, u, v):
    y1, y2 = y
    z1, z2 = z
    r = y1 * y1 + y2 * y2 - (z1 * z1 + z2 * z2)
    s = z1 * z1 - z2 * z2 - u * (y1 * y1 - y2 * y2)
    t = z1 * z2 - v * y1 * y2
    return r * r - s * s - 4.0 * t * t


def region_E(y, z):
    y, z = _point(y), _point(z)
    return ImplicitRegion2D(lambda u, v: bracket(y, z, u, v))


def region_E_contains(y, z, u, v):
    if not (-1.0 <= u <= 1.0 and -1.0 <= v <= 1.0):
        return False
    return bool(bracket(y, z, u, v) >= 0)


# ---------------------------------------------------------------------------
# hull geometry


def _hull_tol(y):
    return 1e-12 * (1.0 + math.hypot(*y))


def convex_hull_contains(y, z):
    y1, y2 = _point(y)
    z1, z2 = _point(z)
    eps = _hull_tol((y1, y2))
    return (abs(z1) + abs(z2) <= abs(y1) + abs(y2) + eps
            and max(abs(z1), abs(z2)) <= max(abs(y1), abs(y2)) + eps)


def convex_hull_polygon(y):
    """Extreme points of the orbit of ``y``, counterclockwise from angle 0."""
    y = _point(y)
    if y == (0.0, 0.0):
        raise DegenerateInputError("the orbit of the origin has an empty interior")
    al, be = max(abs(y[0]), abs(y[1])), min(abs(y[0]), abs(y[1]))
    orbit = {(s1 * a, s2 * b) for a, b in ((al, be), (be, al))
             for s1 in (1.0, -1.0) for s2 in (1.0, -1.0)}
    pts = sorted(orbit, key=lambda p: math.atan2(p[1], p[0]) % (2 * math.pi))
    # drop points that are not extreme (midpoints of edges when be = 0 or al = be)
    out = []
    m = len(pts)
    for i, p in enumerate(pts):
        prv, nxt = pts[i - 1], pts[(i + 1) % m]
        cross = (p[0] - prv[0]) * (nxt[1] - p[1]) - (p[1] - prv[1]) * (nxt[0] - p[0])
        if cross > 1e-14 * al * al:
            out.append(PlanarPoint(*p))
    return ConvexHullB2(y, tuple(out))


def hull_cut_lines(y):
    """Lines ``a z1 + b z2 = c`` across which the densities are not smooth."""
    y = _point(y)
    al, be = max(abs(y[0]), abs(y[1])), min(abs(y[0]), abs(y[1]))
    d = al - be
    lines = [
        (1, 0, be), (1, 0, -be), (0, 1, be), (0, 1, -be),
        (1, -1, d), (1, -1, -d), (1, 1, d), (1, 1, -d),
        (1, 0, 0), (0, 1, 0), (1, -1, 0), (1, 1, 0),
        # through the origin along the orbit directions
        (be, -al, 0), (al, -be, 0), (be, al, 0), (al, be, 0),
    ]
    return lines


def _require_regular(y):
    y1, y2 = _point(y)
    scale = 1e-9 * (y1 * y1 + y2 * y2)
    if abs(y1 * y1 - y2 * y2) < scale or abs(y1 * y2) < scale or scale == 0:
        raise DegenerateInputError(
            f"y = ({y1}, {y2}) lies on a mirror; the density is not defined there")
    return y1, y2


# ---------------------------------------------------------------------------
# density: polar rule about the disk centre


def _ray_slab(center, direction, half):
    """Parameter interval where ``|center + t direction| <= half`` (sorted)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = (-half - center) / direction
        t2 = (half - center) / direction
    lo = np.minimum(t1, t2)
    hi = np.maximum(t1, t2)
    flat = direction == 0
    inside = np.abs(center) <= half
    lo = np.where(flat, np.where(inside, -np.inf, np.inf), lo)
    hi = np.where(flat, np.where(inside, np.inf, -np.inf), hi)
    return lo, hi


def _arc_breaks(D, Q, R, Aa, Bb):
    """Arcs of angle (about the disk centre) on which the clipped ray keeps its type.

    Breakpoints are the directions of rectangle corners inside the disk, of
    the points where the circle crosses the rectangle boundary and of the
    four edge normals.  Returns
    ``(lo, hi)`` of shape ``(m, n_arcs)``, longest arcs first; trailing arcs
    may have zero length.
    """
    angs = []
    with np.errstate(invalid="ignore"):
        for pc in (Aa, -Aa):
            for qc in (Bb, -Bb):
                dx, dy = pc - D, qc - Q
                inside = dx * dx + dy * dy < R * R
                angs.append(np.where(inside, np.arctan2(dy, dx), np.nan))
        for pe in (Aa, -Aa):
            dx = pe - D
            h = np.sqrt(R * R - dx * dx)
            for sg in (1.0, -1.0):
                ok = np.abs(Q + sg * h) <= Bb
                angs.append(np.where(ok, np.arctan2(sg * h, dx), np.nan))
        for qe in (Bb, -Bb):
            dy = qe - Q
            h = np.sqrt(R * R - dy * dy)
            for sg in (1.0, -1.0):
                ok = np.abs(D + sg * h) <= Aa
                angs.append(np.where(ok, np.arctan2(dy, sg * h), np.nan))
    # edge normals: near a tangency the ray towards the foot point sees the
    # circle end and the edge singularity almost coincide
    for a in (0.5 * math.pi, math.pi, 1.5 * math.pi):
        angs.append(np.full(D.shape, a))
    angs = np.stack(angs, axis=-1) % (2 * math.pi)
    angs = np.where(np.isnan(angs), 0.0, angs)
    n = angs.shape[0]
    full = np.sort(np.concatenate([np.zeros((n, 1)), angs, np.full((n, 1), 2 * math.pi)],
                                  axis=1), axis=1)
    lo, hi = full[:, :-1], full[:, 1:]
    order = np.argsort(lo - hi, axis=1, kind="stable")
    lo = np.take_along_axis(lo, order, axis=1)
    hi = np.take_along_axis(hi, order, axis=1)
    used = int(np.max(np.sum(hi > lo, axis=1))) if n else 1
    used = max(used, 1)
    return lo[:, :used], hi[:, :used]


@lru_cache(maxsize=64)
def _radial_rules(n, left_exps, right_exps, m):
    """Rules for ``int_0^1 f(s) ds`` when ``f ~ s^le`` at 0 and ``(1-s)^re`` at 1.

    ``s = t^m / (t^m + (1-t)^m)`` clusters nodes at both ends; the mapped
    integrand behaves like ``t^(m(le+1)-1)`` and ``(1-t)^(m(re+1)-1)``, which a
    Gauss-Jacobi rule in ``t`` absorbs exactly.  Returned per (entry, exit)
    endpoint type: nodes, complements ``1 - s`` and weights.
    """
    s, c, w = [], [], []
    for le in left_exps:
        for re in right_exps:
            bl, br = m * (le + 1.0) - 1.0, m * (re + 1.0) - 1.0
            rule = gauss_jacobi(n, br, bl)
            t = 0.5 * (1.0 + rule.nodes)
            tc = 0.5 * (1.0 - rule.nodes)
            lt, ltc = np.log(t), np.log(tc)
            den = t ** m + tc ** m
            logjac = math.log(m) + (m - 1) * (lt + ltc) - 2.0 * np.log(den)
            wt = rule.weights * 0.5 ** (1.0 + bl + br)
            s.append(t ** m / den)
            c.append(tc ** m / den)
            w.append(wt * np.exp(logjac - bl * lt - br * ltc))
    return np.array(s), np.array(c), np.array(w)


def _disk_rect_integral(y, k, z1, z2, n_ang, n_rad, extra=None, chunk=256):
    r"""``int_E P^(1-g) bracket^(g-3/2) (1-u^2)^(k1-1) (1-v^2)^(k2-1) [extra] du dv``
    for each ``z``.

    ``extra(z1, z2, p, q, pa, qa)`` is an optional bounded factor; it receives
    the node coordinates and ``pa = A^2 - p^2``, ``qa = B^2 - q^2`` computed
    without cancellation.  If it returns a list of factors, the result has a
    leading axis with one integral per factor, all sharing the same nodes.
    """
    y1, y2 = y
    Y = y1 * y1 + y2 * y2
    A = y1 * y1 - y2 * y2
    B = 2.0 * y1 * y2
    Aa, Bb = abs(A), abs(B)
    g = k.gamma
    e1, e2 = k.k1 - 1.0, k.k2 - 1.0
    # for g < 1 the factor P^(1-g) has a weak zero at the corners; cluster harder
    jr_s, jr_c, jr_w = _radial_rules(n_rad, (0.0, e1, e2), (g - 1.5, e1, e2), 2 if g >= 1 else 3)
    sa, _, wa = clustered_rule(n_ang, 3)
    z1 = np.asarray(z1, dtype=float).ravel()
    z2 = np.asarray(z2, dtype=float).ravel()
    out = None
    multi = False
    D_all = (z1 - z2) * (z1 + z2)
    Q_all = 2.0 * z1 * z2
    R_all = np.abs(Y - (z1 * z1 + z2 * z2))
    lo_all, hi_all = _arc_breaks(D_all, Q_all, R_all, Aa, Bb)
    # chunks of points with equal arc counts carry no padding
    counts = np.sum(hi_all > lo_all, axis=1)
    order = np.argsort(counts, kind="stable")
    for start in range(0, len(z1), chunk):
        sel = order[start:start + chunk]
        a1, a2 = z1[sel], z2[sel]
        D, Q, R = D_all[sel], Q_all[sel], R_all[sel]
        used = max(int(counts[sel].max()), 1)
        lo, hi = lo_all[sel, :used], hi_all[sel, :used]          # (m, arcs)
        phi = lo[..., None] + (hi - lo)[..., None] * sa          # (m, arcs, na)
        wphi = (hi - lo)[..., None] * wa
        cx, cy = np.cos(phi), np.sin(phi)
        Dc, Qc, Rc = D[:, None, None], Q[:, None, None], R[:, None, None]
        plo, phi_ = _ray_slab(Dc, cx, Aa)
        qlo, qhi = _ray_slab(Qc, cy, Bb)
        r0 = np.maximum(np.maximum(plo, qlo), 0.0)
        r1 = np.minimum(np.minimum(phi_, qhi), Rc)
        ok = r1 > r0
        r0 = np.where(ok, r0, 0.0)
        r1 = np.where(ok, r1, 0.0)
        span = (r1 - r0)[..., None]
        # entry: centre (0), p side (1), q side (2); exit: circle (0), p (1), q (2)
        lt = np.where(np.maximum(plo, qlo) <= 0.0, 0, np.where(plo >= qlo, 1, 2))
        rt = np.where(Rc <= np.minimum(phi_, qhi), 0, np.where(phi_ <= qhi, 1, 2))
        idx = 3 * lt + rt
        sr, sr_c, wr = jr_s[idx], jr_c[idx], jr_w[idx]
        r = r0[..., None] + span * sr                            # (m, arcs, na, nr)
        back = span * sr_c                                       # r1 - r
        fwd = span * sr                                          # r - r0
        cx4, cy4 = cx[..., None], cy[..., None]
        p = Dc[..., None] + r * cx4
        q = Qc[..., None] + r * cy4
        # A^2 - p^2 and B^2 - q^2 from distances to the slab ends along the ray
        with np.errstate(invalid="ignore"):
            pa = np.where(np.abs(cx4) > 1e-300,
                          cx4 * cx4 * ((phi_ - r1)[..., None] + back) * ((r0 - plo)[..., None] + fwd),
                          Aa * Aa - p * p)
            qa = np.where(np.abs(cy4) > 1e-300,
                          cy4 * cy4 * ((qhi - r1)[..., None] + back) * ((r0 - qlo)[..., None] + fwd),
                          Bb * Bb - q * q)
        pa = np.maximum(np.nan_to_num(pa, nan=0.0, posinf=0.0), 0.0)
        qa = np.maximum(np.nan_to_num(qa, nan=0.0, posinf=0.0), 0.0)
        Rm = (Rc - r1)[..., None] + back                         # R - r
        with np.errstate(divide="ignore", invalid="ignore"):
            logv = (g - 1.5) * np.log(Rm * (Rc[..., None] + r)) + (1.0 - g) * np.log(pa + qa)
            if e1:
                logv += e1 * np.log(pa / (Aa * Aa))
            if e2:
                logv += e2 * np.log(qa / (Bb * Bb))
            val = r * np.exp(logv)
        wgt = ok[..., None] * (wphi[..., None] * span * wr)
        live = wgt > 0
        wv = np.where(live, wgt * val, 0.0)
        factors = [None]
        if extra is not None:
            factors = extra(a1[:, None, None, None], a2[:, None, None, None], p, q, pa, qa)
            multi = isinstance(factors, list)
            if not multi:
                factors = [factors]
        if out is None:
            out = np.empty((len(factors), len(z1)))
        for i, f in enumerate(factors):
            term = wv if f is None else np.where(live, wv * f, 0.0)
            out[i, sel] = np.sum(term, axis=(1, 2, 3)) / (Aa * Bb)
    if out is None:
        return np.empty(0)
    return out if multi else out[0]


def _density_prefactor(k):
    return (2.0 * k.gamma - 1.0) * normalizing_c(k) / math.pi


def _check_density_args(y, k):
    k = _mult(k)
    if not k.gamma > 0.5:
        raise ValueError("the Laplace representation needs k1 + k2 > 1/2")
    y = _require_regular(y)
    return y, k


def density_H_values(y, k, z1, z2, n_ang=24, n_rad=24):
    """Vectorized density H_k(y, z) at the points ``(z1, z2)`` (no error estimate)."""
    y, k = _check_density_args(y, k)
    z1 = np.asarray(z1, dtype=float)
    vals = _disk_rect_integral(y, k, z1, z2, n_ang, n_rad)
    return _density_prefactor(k) * vals.reshape(z1.shape)


def density_H(y, z, k, tol=1e-10, orders=((12, 12), (24, 20), (48, 32), (96, 64))):
    """H_k(y, z): zero outside co(y), else the polar-rule integral over E_{y,z}."""
    y, k = _check_density_args(y, k)
    z = _point(z)
    if not convex_hull_contains(y, z):
        return EvalResult(0.0, 0.0, True, 0)
    return _converge(lambda na, nr: density_H_values(y, k, [z[0]], [z[1]], na, nr)[0],
                     orders, tol)


def _converge(fn, orders, tol):
    prev = None
    evals = 0
    for na, nr in orders:
        val = float(fn(na, nr))
        evals += 13 * na * nr
        if prev is not None:
            err = abs(val - prev)
            if err <= tol * max(abs(val), 1e-300) or err == 0.0:
                return EvalResult(val, err, True, evals)
        prev = val
    return EvalResult(val, err, False, evals)


def density_H_adaptive(y, z, k, tol=1e-8, max_cells=4096):
    """H_k(y, z) through the generic implicit-region integrator in (u, v)."""
    y, k = _check_density_args(y, k)
    z = _point(z)
    if not convex_hull_contains(y, z):
        return EvalResult(0.0, 0.0, True, 0)
    y1, y2 = y
    A2 = (y1 * y1 - y2 * y2) ** 2
    B2 = 4.0 * y1 * y1 * y2 * y2
    g = k.gamma

    def f(u, v):
        P = A2 * (1.0 - u * u) + B2 * (1.0 - v * v)
        with np.errstate(divide="ignore"):
            return np.where(P > 0, np.abs(P) ** (1.0 - g), 0.0)

    if g < 1.5:
        max_cells *= 16
        tol = max(tol, 1e-3)
    res = integrate_region(f, region_E(y, z), k, tol, boundary_power=g - 1.5,
                           max_cells=max_cells)
    pref = _density_prefactor(k)
    return EvalResult(pref * res.value, pref * res.err_estimate, res.converged, res.evaluations)


# ---------------------------------------------------------------------------
# integrals over the hull


# the eight signed permutations (z1, z2) -> (s1 z_i, s2 z_j)
_SIGNED_PERMS = tuple((swap, s1, s2) for swap in (False, True)
                      for s1 in (1.0, -1.0) for s2 in (1.0, -1.0))


def _orbit_points(z1, z2):
    out = []
    for swap, s1, s2 in _SIGNED_PERMS:
        a, b = (z2, z1) if swap else (z1, z2)
        out.append((s1 * a, s2 * b))
    return out


def chamber_rule(y, n, cluster=2):
    """Nodes and weights on co(y) intersected with the chamber ``z1 >= z2 >= 0``.

    The chamber piece is cut along the lines of :func:`hull_cut_lines` that
    cross it, so each cell sees a smooth density.
    """
    y = _require_regular(y)
    al, be = max(abs(y[0]), abs(y[1])), min(abs(y[0]), abs(y[1]))
    verts = [(0.0, 0.0), (al, 0.0), (al, be), (0.5 * (al + be), 0.5 * (al + be))]
    lines = [(1, 0, be), (0, 1, be), (1, -1, al - be), (1, 1, al - be), (be, -al, 0)]
    return polygon_rule(verts, n, lines, cluster=cluster)


@lru_cache(maxsize=48)
def _hull_grid(kind, y, k, n):
    """Chamber nodes, weights and the density on the W-orbits of the nodes."""
    z1, z2, w = chamber_rule(y, n)
    na, nr = INNER_ORDERS.get(n, (32, 32))
    if kind == "H":
        vals = density_H_values(y, k, z1, z2, na, nr)[None, :]
    elif kind == "DH":
        vals = dh_density_values(y, z1, z2, max(na, nr))[None, :]
    elif kind in ("L", "L_printed"):
        variant = "printed" if kind == "L_printed" else "corrected"
        from .dunkl import density_L_orbit_values
        vals = density_L_orbit_values(y, k, z1, z2, na, nr, variant)
    else:
        raise ValueError(f"unknown density kind {kind!r}")
    for arr in (z1, z2, w, vals):
        arr.setflags(write=False)
    return z1, z2, w, vals


def hull_integral(kind, y, k, weight_fn, tol=1e-7, orders=HULL_ORDERS):
    """``int_{co(y)} weight_fn(z1, z2) * density(y, z) dz`` with order refinement.

    ``kind`` selects the density: ``"H"`` (:func:`density_H`), ``"DH"``
    (:func:`dh_density`) or ``"L"`` (the kernel density of the dunkl module).
    The hull is the union of the W-images of its chamber piece; for the
    W-invariant densities the weight is summed over the orbit of each node.
    Densities on the nodes are memoized per ``(kind, y, k, order)``.
    """
    y = _point(y)
    _require_regular(y)
    k = _mult(k) if k is not None else None
    prev = None
    err = math.inf
    evals = 0
    for n in orders:
        z1, z2, w, vals = _hull_grid(kind, y, k, n)
        fw = np.stack([weight_fn(a, b) for a, b in _orbit_points(z1, z2)])
        if vals.shape[0] == 1:
            val = float(np.dot(w, vals[0] * fw.sum(axis=0)))
        else:
            val = float(np.sum(w * vals * fw))
        evals += vals.size
        if prev is not None:
            err = abs(val - prev)
            if err <= tol * max(1.0, abs(val)):
                return EvalResult(val, err, True, evals)
        prev = val
    return EvalResult(val, err, False, evals)


def gbf_laplace(x, y, k, tol=1e-7, orders=HULL_ORDERS):
    """D^W_k(x, y) as  int_{co(y)} e^{<x, z>} H_k(y, z) dz."""
    x = _point(x)
    y, k = _check_density_args(y, k)
    return hull_integral("H", y, k, lambda a, b: np.exp(x[0] * a + x[1] * b), tol, orders)


# ---------------------------------------------------------------------------
# unit multiplicities


def _require_chamber(y):
    y1, y2 = _point(y)
    if not (y1 > y2 > 0):
        raise DegenerateInputError("this form needs y1 > y2 > 0")
    return y1, y2


def dh_density_values(y, z1, z2, n=24, chunk=512):
    """Vectorized unit-multiplicity density by iterated integration over F_{y,z}.

    The outer variable is ``q``; at fixed ``q`` the chord of the disk is
    parametrized by ``p = D + h sin(theta)`` so the square-root boundary
    behaviour becomes a smooth ``cos^2``.
    """
    y1, y2 = _require_chamber(y)
    Y = y1 * y1 + y2 * y2
    Aa = y1 * y1 - y2 * y2
    Bb = 2.0 * y1 * y2
    z1 = np.asarray(z1, dtype=float)
    shape = z1.shape
    z1 = z1.ravel()
    z2 = np.asarray(z2, dtype=float).ravel()
    sq, _, wq = clustered_rule(n, 3)
    gl = gauss_legendre(n)
    out = np.empty(z1.shape)
    for start in range(0, len(z1), chunk):
        a1 = z1[start:start + chunk]
        a2 = z2[start:start + chunk]
        D = (a1 - a2) * (a1 + a2)
        Q = 2.0 * a1 * a2
        R = np.abs(Y - (a1 * a1 + a2 * a2))
        qlo = np.maximum(-Bb, Q - R)
        qhi = np.minimum(Bb, Q + R)
        cand = [qlo, qhi]
        with np.errstate(invalid="ignore"):
            for pe in (Aa, -Aa):
                h = np.sqrt(R * R - (pe - D) ** 2)
                cand += [Q + h, Q - h]
        cand = np.stack(cand, axis=1)
        cand = np.where(np.isnan(cand), qlo[:, None], cand)
        cand = np.clip(cand, qlo[:, None], np.maximum(qhi, qlo)[:, None])
        cand = np.sort(cand, axis=1)
        lo, hi = cand[:, :-1], cand[:, 1:]                      # (m, 5)
        q = lo[..., None] + (hi - lo)[..., None] * sq            # (m, 5, n)
        wqq = (hi - lo)[..., None] * wq
        Dc, Qc, Rc = D[:, None, None], Q[:, None, None], R[:, None, None]
        h = np.sqrt(np.maximum(Rc * Rc - (q - Qc) ** 2, 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            t_lo = np.arcsin(np.clip((-Aa - Dc) / h, -1.0, 1.0))
            t_hi = np.arcsin(np.clip((Aa - Dc) / h, -1.0, 1.0))
        t_lo = np.where(h > 0, t_lo, 0.0)
        t_hi = np.where(h > 0, t_hi, 0.0)
        half = 0.5 * (t_hi - t_lo)[..., None]
        th = 0.5 * (t_hi + t_lo)[..., None] + half * gl.nodes     # (m, 5, n, n)
        p = Dc[..., None] + h[..., None] * np.sin(th)
        qq = q[..., None]
        P = (Aa * Aa - p * p) + (Bb * Bb - qq * qq)
        # sqrt(h^2 - (p - D)^2) dp = h^2 cos^2(theta) dtheta
        with np.errstate(divide="ignore", invalid="ignore"):
            val = (h[..., None] * np.cos(th)) ** 2 / P
        wgt = wqq[..., None] * half * gl.weights
        val = np.where(wgt > 0, val, 0.0)
        out[start:start + chunk] = np.sum(wgt * val, axis=(1, 2, 3))
    return 3.0 / (4.0 * math.pi * Aa * Bb) * out.reshape(shape)


def dh_density(y, z, tol=1e-10, orders=(16, 32, 64, 128)):
    """Unit-multiplicity density H_1(y, z), ``y1 > y2 > 0``, from the F_{y,z} form."""
    y = _require_chamber(y)
    z = _point(z)
    if not convex_hull_contains(y, z):
        return EvalResult(0.0, 0.0, True, 0)
    prev = None
    for n in orders:
        val = float(dh_density_values(y, [z[0]], [z[1]], n)[0])
        if prev is not None:
            err = abs(val - prev)
            if err <= tol * max(abs(val), 1e-300) or err == 0.0:
                return EvalResult(val, err, True, 5 * n * n)
        prev = val
    return EvalResult(val, err, False, 5 * n * n)


def dh_measure_density(y, z, tol=1e-10):
    """Density of the Duistermaat-Heckman measure, 2 (y1^2 - y2^2) y1 y2 H_1(y, z)."""
    y1, y2 = _require_chamber(y)
    res = dh_density(y, z, tol)
    scale = 2.0 * (y1 * y1 - y2 * y2) * y1 * y2
    return EvalResult(scale * res.value, scale * res.err_estimate, res.converged, res.evaluations)


def gt_pattern_contains(y, w1, w2, t):
    y1, y2 = _point(y)
    if not (y1 >= y2 >= 0):
        raise DegenerateInputError("needs y1 >= y2 >= 0")
    return bool(y1 >= w1 >= y2 >= w2 >= 0 and w1 >= t >= w2)


def gt_pattern_volume(y):
    """Volume of {y1 >= w1 >= y2 >= w2 >= 0, w1 >= t >= w2}: int int (w1 - w2)."""
    y1, y2 = _point(y)
    if not (y1 >= y2 >= 0):
        raise DegenerateInputError("needs y1 >= y2 >= 0")
    # int_{y2}^{y1} int_0^{y2} (w1 - w2) dw2 dw1
    return y2 * (y1 * y1 - y2 * y2) / 2.0 - (y1 - y2) * y2 * y2 / 2.0
