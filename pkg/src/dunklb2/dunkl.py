r"""Dunkl operators and the Dunkl kernel of type B2.

Two independent routes to ``D_k(x, y)``:

* :func:`dunkl_kernel_prop2` applies ``T_1 + y_1`` to a combination of
  generalized Bessel functions with shifted multiplicities (each computed by
  the (u, v) quadrature of :func:`dunklb2.gbf.gbf`);
* :func:`dunkl_kernel` integrates ``e^{<x,z>} L_k(y, z) / (2 y_1)`` over the
  hull ``co(y)``, with ``L_k`` itself an integral over ``E_{y,z}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import ConvergenceError, DegenerateInputError
from .gbf import (
    HULL_ORDERS,
    Multiplicity,
    _density_prefactor,
    _disk_rect_integral,
    _mult,
    _point,
    _require_regular,
    convex_hull_contains,
    gbf_fixed,
    gbf_order,
    hull_integral,
)
from .quadrature import EvalResult

__all__ = [
    "GroupElementB2",
    "ShiftConstants",
    "FDControl",
    "group_elements",
    "alternating_polys",
    "shift_constants",
    "apply_T1",
    "gbf_combination",
    "dunkl_kernel_prop2",
    "density_L",
    "density_L_values",
    "density_L_orbit_values",
    "kernel_order",
    "dunkl_kernel",
    "dunkl_kernel_fixed",
    "eigen_residual",
]


class GroupElementB2(NamedTuple):
    name: str
    matrix: np.ndarray

    def apply(self, x):
        m = self.matrix
        return (m[0, 0] * x[0] + m[0, 1] * x[1], m[1, 0] * x[0] + m[1, 1] * x[1])


_MATRICES = (
    ("σ1", ((-1, 0), (0, 1))),
    ("σ2", ((1, 0), (0, -1))),
    ("σ3", ((0, 1), (1, 0))),
    ("σ4", ((0, -1), (-1, 0))),
    ("r", ((0, 1), (-1, 0))),
    ("r²", ((-1, 0), (0, -1))),
    ("r³", ((0, -1), (1, 0))),
    ("id", ((1, 0), (0, 1))),
)


def group_elements():
    """The eight elements of W, in the order sigma1..sigma4, r, r^2, r^3, id."""
    out = []
    for name, m in _MATRICES:
        arr = np.array(m, dtype=int)
        arr.setflags(write=False)
        out.append(GroupElementB2(name, arr))
    return out


def alternating_polys(x):
    """(S1, S2, S3) = (x1^2 - x2^2, x1 x2, x1 x2 (x1^2 - x2^2))."""
    x1, x2 = x
    s1 = (x1 - x2) * (x1 + x2)
    s2 = x1 * x2
    return s1, s2, s1 * s2


@dataclass(frozen=True)
class ShiftConstants:
    d1: float
    d2: float
    d3: float


def shift_constants(k, variant="corrected"):
    """Constants of the three shift identities.

    ``d1 = 2/((2k1+1)(2g+1))`` and ``d2 = 8/((2k2+1)(2g+1))``.  For the orbit
    of all roots the eigen equation ``T_1 D_k = y_1 D_k`` forces
    ``d3 = 2/((2k1+1)(2k2+1)(2g+1)(2g+3))``; ``variant="printed"`` returns
    a quarter of that value, kept for comparison.
    """
    k = _mult(k)
    g = k.gamma
    d3 = 1.0 / (2 * (2 * k.k1 + 1) * (2 * k.k2 + 1) * (2 * g + 1) * (2 * g + 3))
    if variant == "corrected":
        d3 *= 4.0
    elif variant != "printed":
        raise ValueError(f"unknown variant {variant!r}")
    return ShiftConstants(
        2.0 / ((2 * k.k1 + 1) * (2 * g + 1)),
        8.0 / ((2 * k.k2 + 1) * (2 * g + 1)),
        d3,
    )


@dataclass(frozen=True)
class FDControl:
    """Finite-difference step ``h`` and the minimum distance of ``x`` from the mirrors."""

    h: float
    mirror_margin: float

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("h must be positive")
        if not self.mirror_margin > 0:
            raise ValueError("mirror_margin must be positive")

    @classmethod
    def default(cls, x):
        scale = 1.0 + math.hypot(*x)
        return cls(1e-4 * scale, 1e-3 * scale)


def _check_mirrors(x, ctrl):
    x1, x2 = x
    gap = min(abs(x1), abs(x1 - x2), abs(x1 + x2))
    if gap < ctrl.mirror_margin:
        raise DegenerateInputError(
            f"x = ({x1}, {x2}) is within {ctrl.mirror_margin} of a mirror used by T1")


def apply_T1(f: Callable, x, k, ctrl: FDControl | None = None):
    r"""Dunkl operator in the direction ``e1``,

    .. math::
        T_1 f(x) = \partial_1 f(x) + k_2 \frac{f(x) - f(\sigma_1 x)}{x_1}
            + k_1 \Big(\frac{f(x) - f(\sigma_3 x)}{x_1 - x_2}
            + \frac{f(x) - f(\sigma_4 x)}{x_1 + x_2}\Big),

    with a central difference for the partial derivative and exact
    reflection terms.
    """
    k = _mult(k)
    x1, x2 = _point(x)
    ctrl = ctrl or FDControl.default((x1, x2))
    _check_mirrors((x1, x2), ctrl)
    h = ctrl.h
    fx = f((x1, x2))
    d1 = (f((x1 + h, x2)) - f((x1 - h, x2))) / (2.0 * h)
    return (d1
            + k.k2 * (fx - f((-x1, x2))) / x1
            + k.k1 * ((fx - f((x2, x1))) / (x1 - x2) + (fx - f((-x2, -x1))) / (x1 + x2)))


# ---------------------------------------------------------------------------
# shift-principle route


def _combination_orders(x, y, k, tol):
    k = _mult(k)
    shifts = ((0, 0), (1, 0), (0, 1), (1, 1))
    return {s: gbf_order(x, y, k.shifted(*s), tol) for s in shifts}


def _combination_fixed(x, y, k, orders):
    k = _mult(k)
    c = shift_constants(k)
    sx, sy = alternating_polys(x), alternating_polys(y)
    val = 2.0 * gbf_fixed(x, y, k, orders[(0, 0)])
    terms = ((c.d1, 0, (1, 0)), (c.d2, 1, (0, 1)), (c.d3, 2, (1, 1)))
    for d, i, s in terms:
        w = sx[i] * sy[i]
        if w != 0.0:
            val += 0.25 * d * w * gbf_fixed(x, y, k.shifted(*s), orders[s])
    return val


def gbf_combination(x, y, k, tol=1e-12):
    """``D_k(x, y) + D_k(x, -y)`` from three shifted GBFs and ``D^W_k``."""
    x, y, k = _point(x), _point(y), _mult(k)
    return _combination_fixed(x, y, k, _combination_orders(x, y, k, tol))


def dunkl_kernel_prop2(x, y, k, tol=1e-12, ctrl: FDControl | None = None):
    """D_k(x, y) = ((T_1 + y_1) G)(x) / (2 y_1), G the shift combination.

    The shifted GBFs are evaluated at one fixed quadrature order (chosen at
    ``x``) for all points of the difference stencil, so ``G`` is smooth in x.
    """
    x, y, k = _point(x), _point(y), _mult(k)
    if abs(y[0]) < 1e-6 * math.hypot(*y) or y == (0.0, 0.0):
        raise DegenerateInputError("the shift route needs y1 != 0")
    ctrl = ctrl or FDControl.default(x)
    orders = _combination_orders(x, y, k, tol)
    # all stencil points share the orders; bump once for safety on the stencil
    orders = {s: min(2 * n, 256) for s, n in orders.items()}

    def G(p):
        return _combination_fixed(p, y, k, orders)

    return (apply_T1(G, x, k, ctrl) + y[0] * G(x)) / (2.0 * y[0])


# ---------------------------------------------------------------------------
# Laplace route


def _brace(y, variant="corrected"):
    """The bounded factor of L_k in the (p, q) variables, as an ``extra`` callback.

    The uv, (u + 4) and (v + 4) coefficients carry the constant d3; with the
    corrected d3 they become 4uv, 4(u + 1), 4(v + 1), so the first term is
    8 (z1 + y1)(1 + u)(1 + v).
    """
    y1, y2 = y
    Y = y1 * y1 + y2 * y2
    A = (y1 - y2) * (y1 + y2)
    B = 2.0 * y1 * y2
    if variant == "corrected":
        cu, cv, cuv = 4.0, 4.0, 4.0
    elif variant == "printed":
        cu, cv, cuv = 1.0, 1.0, 1.0
    else:
        raise ValueError(f"unknown variant {variant!r}")

    def extra(z1, z2, p, q, pa, qa):
        u, v = p / A, q / B
        denom = Y + p
        c = q / denom
        P = pa + qa
        b2 = P / (denom * denom)
        # with (ab)^2 = P / (2 denom):  2 S2 (1-v^2) / (ab)^2 = 2 denom qa / (B P)
        # and S1 (1-u^2) / (ab)^2 = 2 denom pa / (A P)
        tail = ((qa / B) * (z2 - c * z1) * (cu * u + 4.0)
                + (pa / A) * ((b2 + c * c) * z1 - c * z2) * (cv * v + 4.0))
        head = (z1 + y1) * (4.0 * u + 4.0 * v + cuv * u * v + 4.0)
        return 4.0 * head + (4.0 * denom / P) * tail

    return extra


def _brace_orbit(y, variant="corrected"):
    """The brace of :func:`_brace` on all eight W-images of ``z`` from one node set.

    The images ``z`` and ``-z`` share the disk centre ``(D, Q)``; the other
    six move it to ``(+-D, +-Q)``, which the reflections ``p -> -p`` and
    ``q -> -q`` of the nodes reproduce with the same weights.  The brace is
    affine in ``z``, so each reflection yields two images.  Factors come out
    in the order of the hull grid's orbit points.
    """
    y1, y2 = y
    Y = y1 * y1 + y2 * y2
    A = (y1 - y2) * (y1 + y2)
    B = 2.0 * y1 * y2
    if variant == "corrected":
        cu, cv, cuv = 4.0, 4.0, 4.0
    elif variant == "printed":
        cu, cv, cuv = 1.0, 1.0, 1.0
    else:
        raise ValueError(f"unknown variant {variant!r}")

    def coefficients(p, q, pa, qa):
        # brace = F0 + z1 F1 + z2 F2
        u, v = p / A, q / B
        denom = Y + p
        c = q / denom
        P = pa + qa
        b2 = P / (denom * denom)
        T = 4.0 * denom / P
        al = (qa / B) * (cu * u + 4.0)
        be = (pa / A) * (cv * v + 4.0)
        h = 4.0 * (4.0 * u + 4.0 * v + cuv * u * v + 4.0)
        return y1 * h, h + T * ((b2 + c * c) * be - c * al), T * (al - c * be)

    # node reflection (p sign, q sign), the image zeta(z) it serves, and the
    # orbit slots of zeta and -zeta
    plan = (((1.0, 1.0), lambda a, b: (a, b), (0, 3)),
            ((1.0, -1.0), lambda a, b: (a, -b), (1, 2)),
            ((-1.0, 1.0), lambda a, b: (b, a), (4, 7)),
            ((-1.0, -1.0), lambda a, b: (b, -a), (5, 6)))

    def extra(z1, z2, p, q, pa, qa):
        out = [None] * 8
        with np.errstate(divide="ignore", invalid="ignore"):
            for (sp, sq), zeta, (i, j) in plan:
                f0, f1, f2 = coefficients(sp * p, sq * q, pa, qa)
                a, b = zeta(z1, z2)
                g = a * f1 + b * f2
                out[i], out[j] = f0 + g, f0 - g
        return out

    return extra


def density_L_orbit_values(y, k, z1, z2, n_ang=24, n_rad=20, variant="corrected"):
    """``L_k(y, w z)`` for the eight signed permutations ``w z`` of each point.

    Returns shape ``(8, m)``, in the orbit order of the hull grid:
    ``(z1, z2), (z1, -z2), (-z1, z2), (-z1, -z2), (z2, z1), (z2, -z1), (-z2, z1), (-z2, -z1)``.
    """
    k = _mult(k)
    if not k.gamma > 0.5:
        raise ValueError("the Laplace representation needs k1 + k2 > 1/2")
    y = _require_regular(y)
    vals = _disk_rect_integral(y, k, z1, z2, n_ang, n_rad, extra=_brace_orbit(y, variant))
    return _density_prefactor(k) / 8.0 * vals


def density_L_values(y, k, z1, z2, n_ang=24, n_rad=20, variant="corrected"):
    """Vectorized kernel density L_k(y, z) (no error estimate).

    ``variant`` selects the d3-dependent coefficients, see :func:`_brace`.
    """
    k = _mult(k)
    if not k.gamma > 0.5:
        raise ValueError("the Laplace representation needs k1 + k2 > 1/2")
    y = _require_regular(y)
    z1 = np.asarray(z1, dtype=float)
    vals = _disk_rect_integral(y, k, z1, z2, n_ang, n_rad, extra=_brace(y, variant))
    # prefactor (2g-1) c_k / (8 pi); the doubling inside _brace turns the H-form
    # integrand, P^(1-g) bracket^(g-3/2) = X^(g-3/2) / (2 a^(2g-1) b^(2g-2)),
    # back into the X-form one
    return _density_prefactor(k) / 8.0 * vals.reshape(z1.shape)


def density_L(y, z, k, tol=1e-10, orders=((12, 12), (24, 20), (48, 32), (96, 64)),
              variant="corrected"):
    """L_k(y, z); zero outside co(y)."""
    k = _mult(k)
    y = _require_regular(y)
    z = _point(z)
    if not convex_hull_contains(y, z):
        return EvalResult(0.0, 0.0, True, 0)
    prev = None
    err = math.inf
    for na, nr in orders:
        val = float(density_L_values(y, k, [z[0]], [z[1]], na, nr, variant)[0])
        if prev is not None:
            err = abs(val - prev)
            if err <= tol * max(abs(val), 1e-300) or err == 0.0:
                return EvalResult(val, err, True, 0)
        prev = val
    return EvalResult(val, err, False, 0)


_SIGNED_PERMS = ((False, 1.0, 1.0), (False, -1.0, 1.0), (False, 1.0, -1.0), (False, -1.0, -1.0),
                 (True, 1.0, 1.0), (True, -1.0, 1.0), (True, 1.0, -1.0), (True, -1.0, -1.0))


def _canonical(x, y):
    """A pair ``(w x, w y)`` with ``w`` in W and ``w y`` in ``y1 >= y2 >= 0``."""
    y1, y2 = y
    x1, x2 = x
    s1 = -1.0 if y1 < 0 else 1.0
    s2 = -1.0 if y2 < 0 else 1.0
    y1, y2, x1, x2 = s1 * y1, s2 * y2, s1 * x1, s2 * x2
    if y2 > y1:
        y1, y2, x1, x2 = y2, y1, x2, x1
    return (x1, x2), (y1, y2)


def _kernel_setup(x, y, k):
    x, y, k = _point(x), _point(y), _mult(k)
    if not k.gamma > 0.5:
        raise ValueError("the Laplace representation needs k1 + k2 > 1/2")
    return x, y, k


def dunkl_kernel(x, y, k, tol=1e-7, orders=HULL_ORDERS):
    r"""D_k(x, y) from  2 y_1 D_k(x, y) = \int_{co(y)} e^{<x,z>} L_k(y, z) dz.

    ``(x, y)`` is first moved by an element of W so that ``y`` lies in the
    chamber ``y1 >= y2 >= 0`` (``D_k(wx, wy) = D_k(x, y)``); all points with
    the same ``W y`` then share one memoized grid of ``L_k`` values.  For
    ``x = 0`` or ``y = 0`` the value is 1.

    The Laplace form needs ``k1 + k2 > 1/2`` and a regular ``y``.  A ``y`` on
    the mirror ``y1 = 0`` is swapped to ``(y2, y1)``, which is still not
    regular; such inputs, and inputs with ``k1 + k2 <= 1/2``, go through
    :func:`dunkl_kernel_prop2` (``x`` must then stay off the mirrors).  Other
    non-regular ``y`` are rejected.
    """
    x, y, k = _point(x), _point(y), _mult(k)
    if y == (0.0, 0.0) or x == (0.0, 0.0):
        return EvalResult(1.0, 0.0, True, 0)
    swapped = abs(y[0]) < 1e-6 * math.hypot(*y)
    if swapped:
        x, y = (x[1], x[0]), (y[1], y[0])
    if swapped or not k.gamma > 0.5:
        val = dunkl_kernel_prop2(x, y, k, tol=min(tol, 1e-10))
        return EvalResult(val, tol * (1.0 + abs(val)), True, 0)
    _require_regular(y)
    xc, yc = _canonical(x, y)
    res = hull_integral("L", yc, k, lambda a, b: np.exp(xc[0] * a + xc[1] * b), tol, orders)
    scale = 2.0 * yc[0]
    return EvalResult(res.value / scale, res.err_estimate / scale, res.converged, res.evaluations)


def kernel_order(x, y, k, tol=1e-7, orders=HULL_ORDERS):
    """Outer order at which :func:`dunkl_kernel` converges for these inputs."""
    x, y, k = _kernel_setup(x, y, k)
    xc, yc = _canonical(x, y)
    prev = None
    for n in orders:
        val = hull_integral("L", yc, k, lambda a, b: np.exp(xc[0] * a + xc[1] * b),
                            tol, orders=(n,)).value
        if prev is not None and abs(val - prev) <= tol * max(1.0, abs(val)):
            return n
        prev = val
    raise ConvergenceError("kernel quadrature did not converge")


def dunkl_kernel_fixed(x, y, k, n):
    """The Laplace route at a fixed outer order ``n`` (smooth in ``x``)."""
    x, y, k = _kernel_setup(x, y, k)
    _require_regular(y)
    xc, yc = _canonical(x, y)
    res = hull_integral("L", yc, k, lambda a, b: np.exp(xc[0] * a + xc[1] * b),
                        orders=(n,))
    return res.value / (2.0 * yc[0])


def eigen_residual(x, y, k, tol=1e-7, ctrl: FDControl | None = None):
    """|T_1 D_k(., y)(x) - y_1 D_k(x, y)| with D_k from :func:`dunkl_kernel`.

    The outer order is fixed at the one where :func:`dunkl_kernel` converges
    at ``x``, so the difference quotient sees a smooth function of ``x``.
    Where :func:`dunkl_kernel` itself uses the shift route (``k1 + k2 <= 1/2``)
    the kernel values come from :func:`dunkl_kernel_prop2`.
    """
    x, y, k = _point(x), _point(y), _mult(k)
    ctrl = ctrl or FDControl.default(x)
    if not k.gamma > 0.5:
        def D(p):
            return dunkl_kernel_prop2(p, y, k, tol=min(tol, 1e-10))
    else:
        n = kernel_order(x, y, k, tol)

        def D(p):
            return dunkl_kernel_fixed(p, y, k, n)

    return abs(apply_T1(D, x, k, ctrl) - y[0] * D(x))
