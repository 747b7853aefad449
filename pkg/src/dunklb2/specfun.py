r"""Log-gamma and the normalized modified Bessel function of the first kind.

The normalized function is

.. math::
    \mathcal{I}_\nu(t) = \Gamma(\nu+1) \sum_{n \ge 0} \frac{(t/2)^{2n}}{n!\,\Gamma(n+\nu+1)},

so that :math:`\mathcal{I}_\nu(0) = 1`.  It is evaluated along three
independent routes: the power series, a one-dimensional angular integral and
a two-dimensional integral over the unit disk.  The routes are meant to be
checked against each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import zeta

from .errors import ConvergenceError
from .quadrature import gauss_jacobi

__all__ = [
    "SeriesControl",
    "T_MAX",
    "ln_gamma",
    "bessel_i_norm",
    "bessel_i_norm_theta",
    "bessel_i_norm_disk",
    "bessel_sqrt_halves_derivative",
]

#: Largest |t| accepted by the series; the partial sums grow like e^t.
T_MAX = 600.0

_EULER_GAMMA = 0.57721566490153286061
_N_ZETA = 64
# zeta(k) for k = 2 .. _N_ZETA + 1
_ZETA = zeta(np.arange(2, _N_ZETA + 2, dtype=float))
_ZETA_M1 = zeta(np.arange(2, _N_ZETA + 2, dtype=float)) - 1.0


@dataclass(frozen=True)
class SeriesControl:
    rel_tol: float = 1e-15
    max_terms: int = 500

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")


DEFAULT_SERIES = SeriesControl()


def _lgamma_near_one(eps):
    # ln G(1+e) = -gamma e + sum_{k>=2} (-1)^k zeta(k) e^k / k,  |e| <= 1/2
    acc = 0.0
    p = -eps
    for k in range(2, _N_ZETA + 2):
        p *= -eps
        term = _ZETA[k - 2] * p / k
        acc += term
        if abs(term) < 1e-17 * abs(acc):
            break
    return -_EULER_GAMMA * eps + acc


def _lgamma_near_two(eps):
    # ln G(2+e) = (1-gamma) e + sum_{k>=2} (-1)^k (zeta(k)-1) e^k / k
    acc = 0.0
    p = -eps
    for k in range(2, _N_ZETA + 2):
        p *= -eps
        term = _ZETA_M1[k - 2] * p / k
        acc += term
        if abs(term) < 1e-17 * abs(acc):
            break
    return (1.0 - _EULER_GAMMA) * eps + acc


def ln_gamma(x):
    """Natural log of Gamma(x) for x > 0.

    ``math.lgamma`` loses relative accuracy next to its zeros at 1 and 2, so
    the Taylor series in zeta values is used on [0.5, 2.5].
    """
    x = float(x)
    if not x > 0 or math.isnan(x):
        raise ValueError(f"ln_gamma needs x > 0, got {x}")
    if x < 0.5:
        return _lgamma_near_one(x) - math.log(x)
    if x < 1.5:
        return _lgamma_near_one(x - 1.0)
    if x <= 2.5:
        return _lgamma_near_two(x - 2.0)
    return math.lgamma(x)


def _check_order(nu, strict=False):
    nu = float(nu)
    if strict and not nu > 0:
        raise ValueError(f"order must be positive for this route, got {nu}")
    if not nu > -0.5:
        raise ValueError(f"order must exceed -1/2, got {nu}")
    return nu


def bessel_i_norm(nu, t, ctrl=DEFAULT_SERIES):
    """Normalized modified Bessel function by its power series.

    ``t`` may be a scalar or an array; the series is summed with a ratio
    recurrence and Neumaier compensation and each entry is frozen once two
    consecutive terms fall below ``ctrl.rel_tol`` times the partial sum.
    """
    nu = _check_order(nu)
    arr = np.asarray(t, dtype=float)
    if np.any(np.abs(arr) > T_MAX):
        raise OverflowError(f"|t| exceeds {T_MAX}; log-scaled evaluation is not provided")
    x = 0.25 * np.square(arr)
    term = np.ones_like(x)
    total = np.ones_like(x)
    comp = np.zeros_like(x)
    small = np.zeros(x.shape, dtype=int)
    active = x > 0
    for n in range(ctrl.max_terms):
        if not np.any(active):
            break
        ratio = x / ((n + 1.0) * (n + 1.0 + nu))
        term = np.where(active, term * ratio, term)
        new = total + term
        comp = np.where(active,
                        comp + np.where(np.abs(total) >= np.abs(term),
                                        (total - new) + term, (term - new) + total),
                        comp)
        total = np.where(active, new, total)
        tiny = (term <= ctrl.rel_tol * np.abs(total + comp)) & (ratio < 1.0)
        small = np.where(tiny, small + 1, 0)
        active &= small < 2
    else:
        if np.any(active):
            raise ConvergenceError(f"series did not converge in {ctrl.max_terms} terms")
    out = total + comp
    return float(out) if out.ndim == 0 else out


def _theta_sum(nu, t, n):
    rule = gauss_jacobi(n, nu - 0.5, nu - 0.5)
    return np.exp(np.multiply.outer(t, rule.nodes)) @ rule.weights


def bessel_i_norm_theta(nu, t, rel_tol=1e-14, max_nodes=512):
    r"""Angular-integral route,

    .. math::
        \mathcal{I}_\nu(t) = \frac{\Gamma(\nu+1)}{2\sqrt{\pi}\,\Gamma(\nu+1/2)}
            \int_0^{2\pi} e^{t\cos\theta} |\sin\theta|^{2\nu}\,d\theta .

    With ``s = cos(theta)`` each half period becomes
    ``int_{-1}^1 e^{ts} (1-s^2)^(nu-1/2) ds``, done by Gauss-Jacobi with
    doubling of the node count.
    """
    nu = _check_order(nu, strict=True)
    arr = np.asarray(t, dtype=float)
    if np.any(np.abs(arr) > T_MAX):
        raise OverflowError(f"|t| exceeds {T_MAX}")
    pref = math.exp(ln_gamma(nu + 1.0) - ln_gamma(nu + 0.5)) / math.sqrt(math.pi)
    n = 32
    prev = _theta_sum(nu, arr, n)
    while True:
        n *= 2
        if n > max_nodes:
            raise ConvergenceError("angular quadrature did not converge")
        cur = _theta_sum(nu, arr, n)
        if np.all(np.abs(cur - prev) <= rel_tol * np.abs(cur)):
            break
        prev = cur
    out = pref * cur
    return float(out) if out.ndim == 0 else out


def _disk_sum(nu, z1, z2, n_rad, n_ang):
    # w = s^2 on [0, 1], (1 - w)^(nu-1) absorbed by Gauss-Jacobi in xi = 2w - 1
    rule = gauss_jacobi(n_rad, nu - 1.0, 0.0)
    s = np.sqrt(0.5 * (1.0 + rule.nodes))
    theta = 2.0 * math.pi * np.arange(n_ang) / n_ang
    proj = np.outer(s, z1 * np.cos(theta) + z2 * np.sin(theta))
    ang = np.exp(proj).sum(axis=1) * (2.0 * math.pi / n_ang)
    # dy = s ds dtheta = dw dtheta / 2,  dw = dxi / 2,  (1-w)^(nu-1) = 2^(1-nu) (1-xi)^(nu-1)
    return 0.25 * 2.0 ** (1.0 - nu) * float(np.dot(rule.weights, ang))


def bessel_i_norm_disk(nu, z, rel_tol=1e-13, max_nodes=512):
    r"""Disk-integral route,

    .. math::
        \mathcal{I}_\nu(\|z\|) = \frac{\nu}{\pi} \int_{\|y\| \le 1}
            e^{\langle z, y\rangle} (1-\|y\|^2)^{\nu-1}\,dy ,

    in polar coordinates: Gauss-Jacobi in ``w = s^2`` (absorbing the
    possibly singular radial weight) times the trapezoid rule in the angle.
    """
    nu = _check_order(nu, strict=True)
    z1, z2 = (float(c) for c in z)
    r = math.hypot(z1, z2)
    if r > T_MAX:
        raise OverflowError(f"|z| exceeds {T_MAX}")
    n_rad, n_ang = 16, 32
    prev = _disk_sum(nu, z1, z2, n_rad, n_ang)
    while True:
        n_rad, n_ang = 2 * n_rad, 2 * n_ang
        if n_rad > max_nodes:
            raise ConvergenceError("disk quadrature did not converge")
        cur = _disk_sum(nu, z1, z2, n_rad, n_ang)
        if abs(cur - prev) <= rel_tol * abs(cur):
            break
        prev = cur
    return nu / math.pi * cur


def bessel_sqrt_halves_derivative(nu, t, ctrl=DEFAULT_SERIES):
    """d/dt I_nu(sqrt(t/2)), which equals I_{nu+1}(sqrt(t/2)) / (8 (nu+1))."""
    nu = _check_order(nu)
    t = float(t)
    if not t > 0:
        raise ValueError("t must be positive")
    return bessel_i_norm(nu + 1.0, math.sqrt(0.5 * t), ctrl) / (8.0 * (nu + 1.0))
