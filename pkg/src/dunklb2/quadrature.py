"""Gauss-type rules and the 2D integrators built on them.

Rules on [-1, 1] come from the Golub-Welsch eigenvalue method applied to the
Jacobi three-term recurrence.  On top of them sit

* a tensor rule for the product weight (1-u^2)^(k1-1) (1-v^2)^(k2-1),
* an adaptive integrator over implicitly defined subsets of [-1, 1]^2,
* an integrator over convex polygons (optionally cut along known lines of
  non-smoothness) using collapsed (Duffy) coordinates on a centroid fan.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import brentq

__all__ = [
    "QuadratureRule1D",
    "EvalResult",
    "ImplicitRegion2D",
    "gauss_legendre",
    "gauss_jacobi",
    "interval_rule",
    "clustered_rule",
    "integrate_uv_weighted",
    "integrate_region",
    "split_polygon",
    "polygon_rule",
    "integrate_polygon",
]

MAX_ORDER = 512


@dataclass(frozen=True)
class QuadratureRule1D:
    nodes: np.ndarray
    weights: np.ndarray
    kind: str = "legendre"
    alpha: float = 0.0
    beta: float = 0.0

    def __len__(self):
        return len(self.nodes)

    def integrate(self, f):
        return float(np.dot(self.weights, f(self.nodes)))


@dataclass
class EvalResult:
    """A value with an a-posteriori error estimate."""

    value: float
    err_estimate: float
    converged: bool
    evaluations: int = 0

    def __float__(self):
        return float(self.value)


@dataclass
class ImplicitRegion2D:
    """The set ``{(u, v) in bbox : g(u, v) >= 0}``.

    ``g`` must accept numpy arrays and broadcast.
    """

    g: Callable[[np.ndarray, np.ndarray], np.ndarray]
    bbox: tuple = (-1.0, 1.0, -1.0, 1.0)

    def contains(self, u, v):
        u0, u1, v0, v1 = self.bbox
        inside = (u >= u0) & (u <= u1) & (v >= v0) & (v <= v1)
        return inside & (np.asarray(self.g(u, v)) >= 0)


# ---------------------------------------------------------------------------
# 1D rules


def _jacobi_recurrence(n, alpha, beta):
    """Diagonal and off-diagonal of the Jacobi matrix for weight (1-x)^a (1+x)^b."""
    a, b = float(alpha), float(beta)
    ab = a + b
    i = np.arange(n, dtype=float)
    diag = np.empty(n)
    with np.errstate(divide="ignore", invalid="ignore"):
        diag[:] = (b * b - a * a) / ((2 * i + ab) * (2 * i + ab + 2))
    # the general formula is 0/0 at i = 0 when a + b = 0
    diag[0] = (b - a) / (ab + 2)
    off = np.empty(max(n - 1, 0))
    if n > 1:
        j = np.arange(1, n, dtype=float)
        s = 2 * j + ab
        with np.errstate(divide="ignore", invalid="ignore"):
            beta_j = 4 * j * (j + a) * (j + b) * (j + ab) / (s * s * (s + 1) * (s - 1))
        # j = 1 term simplified so that a + b = -1 is not a removable 0/0
        beta_j[0] = 4 * (1 + a) * (1 + b) / ((2 + ab) ** 2 * (3 + ab))
        off[:] = np.sqrt(beta_j)
    mu0 = math.exp((ab + 1) * math.log(2.0) + math.lgamma(a + 1) + math.lgamma(b + 1)
                   - math.lgamma(ab + 2))
    return diag, off, mu0


def _orthonormal_values(x, diag, off, mu0, n):
    """p_0 .. p_n (orthonormal) and p_n' at the points x."""
    p_prev = np.zeros_like(x)
    p = np.full_like(x, 1.0 / math.sqrt(mu0))
    dp_prev = np.zeros_like(x)
    dp = np.zeros_like(x)
    sq = np.zeros_like(x)
    for j in range(n):
        sq += p * p
        b_prev = off[j - 1] if j > 0 else 0.0
        p_next = ((x - diag[j]) * p - b_prev * p_prev) / off[j]
        dp_next = (p + (x - diag[j]) * dp - b_prev * dp_prev) / off[j]
        p_prev, p = p, p_next
        dp_prev, dp = dp, dp_next
    return p, dp, sq


@lru_cache(maxsize=256)
def _golub_welsch(n, alpha, beta):
    diag, off, mu0 = _jacobi_recurrence(n + 1, alpha, beta)
    if n == 1:
        x = diag[:1].copy()
        w = np.array([mu0])
    else:
        x = eigh_tridiagonal(diag[:n], off[:n - 1], eigvals_only=True)
        # one Newton step on p_n, then Christoffel weights 1 / sum p_j^2,
        # which keep relative accuracy where eigenvector components do not
        pn, dpn, _ = _orthonormal_values(x, diag, off, mu0, n)
        x = x - pn / dpn
        _, _, sq = _orthonormal_values(x, diag, off, mu0, n)
        w = 1.0 / sq
    # exact reflection symmetry for symmetric weights
    if alpha == beta:
        x = 0.5 * (x - x[::-1])
        w = 0.5 * (w + w[::-1])
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_jacobi(n, alpha, beta):
    """n-point Gauss rule for the weight (1-x)^alpha (1+x)^beta on [-1, 1]."""
    if not (isinstance(n, (int, np.integer)) and 1 <= n <= MAX_ORDER):
        raise ValueError(f"rule size must be an integer in [1, {MAX_ORDER}], got {n!r}")
    if not (alpha > -1 and beta > -1):
        raise ValueError(f"Jacobi exponents must exceed -1, got ({alpha}, {beta})")
    x, w = _golub_welsch(int(n), float(alpha), float(beta))
    kind = "legendre" if alpha == 0 and beta == 0 else "jacobi"
    return QuadratureRule1D(x, w, kind, float(alpha), float(beta))


def gauss_legendre(n):
    return gauss_jacobi(n, 0.0, 0.0)


def interval_rule(a, b, n, left=0.0, right=0.0):
    """Nodes/weights for  int_a^b h(x) (x-a)^left (b-x)^right dx ~ sum w h(x)."""
    rule = gauss_jacobi(n, right, left)
    half = 0.5 * (b - a)
    x = a + half * (1.0 + rule.nodes)
    w = rule.weights * half ** (1.0 + left + right)
    return x, w


@lru_cache(maxsize=64)
def _clustered(n, order):
    rule = gauss_legendre(n)
    t = 0.5 * (1.0 + rule.nodes)
    wt = 0.5 * rule.weights
    tm = t ** order
    sm = (1.0 - t) ** order
    den = tm + sm
    s = tm / den
    sc = sm / den
    w = wt * order * (t * (1.0 - t)) ** (order - 1) / den ** 2
    for arr in (s, sc, w):
        arr.setflags(write=False)
    return s, sc, w


def clustered_rule(n, order=3):
    """Gauss-Legendre on [0, 1] after the sigmoidal map t^m / (t^m + (1-t)^m).

    Returns ``(s, 1 - s, w)``; the complement is computed directly so that
    distances to the right endpoint keep full relative precision.  The map
    flattens integrable algebraic endpoint singularities.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    if order == 1:
        rule = gauss_legendre(n)
        s = 0.5 * (1.0 + rule.nodes)
        return s, 0.5 * (1.0 - rule.nodes), 0.5 * rule.weights
    return _clustered(int(n), int(order))


# ---------------------------------------------------------------------------
# weighted square


def _edge_rule(a, b, n, expo):
    """Rule for int_a^b h(t) (1-t^2)^expo dt on a sub-interval of [-1, 1].

    Returns nodes and weights that already include the weight factor.
    """
    at_left = a <= -1.0 and expo != 0
    at_right = b >= 1.0 and expo != 0
    x, w = interval_rule(a, b, n, expo if at_left else 0.0, expo if at_right else 0.0)
    if expo != 0:
        if at_left and at_right:
            pass
        elif at_left:
            w = w * (1.0 - x) ** expo
        elif at_right:
            w = w * (1.0 + x) ** expo
        else:
            w = w * ((1.0 - x) * (1.0 + x)) ** expo
    return x, w


def integrate_uv_weighted(f, k, n):
    """Tensor Gauss-Jacobi approximation of
    ``int int f(u, v) (1-u^2)^(k1-1) (1-v^2)^(k2-1) du dv`` over [-1, 1]^2.

    ``f`` is called once with 2D arrays ``U[i, j] = u_i``, ``V[i, j] = v_j``.
    """
    k1, k2 = _k_pair(k)
    ru = gauss_jacobi(n, k1 - 1.0, k1 - 1.0)
    rv = gauss_jacobi(n, k2 - 1.0, k2 - 1.0)
    U, V = np.meshgrid(ru.nodes, rv.nodes, indexing="ij")
    vals = np.broadcast_to(np.asarray(f(U, V), dtype=float), U.shape)
    return float(np.sum((ru.weights[:, None] * rv.weights[None, :]) * vals))


def _k_pair(k):
    if hasattr(k, "k1"):
        return float(k.k1), float(k.k2)
    k1, k2 = k
    return float(k1), float(k2)


# ---------------------------------------------------------------------------
# implicit regions


def _sign_changes(h, ts, hs=None):
    """Roots of a scalar function of one variable bracketed by the samples ``ts``."""
    if hs is None:
        hs = np.asarray(h(ts), dtype=float)
    roots = []
    for j in range(len(ts) - 1):
        if hs[j] == 0.0 and j > 0:
            roots.append(float(ts[j]))
        elif hs[j] * hs[j + 1] < 0:
            roots.append(brentq(lambda t: float(h(np.array([t]))[0]), ts[j], ts[j + 1],
                                xtol=1e-15, rtol=1e-15))
    return roots


@dataclass(order=True)
class _Cell:
    neg_err: float
    seq: int
    box: tuple = field(compare=False)
    value: float = field(compare=False, default=0.0)
    err: float = field(compare=False, default=0.0)


def integrate_region(f, region, k, tol, boundary_power=0.0, max_cells=4096,
                     orders=(8, 16)):
    """Adaptive integral of ``f * max(g,0)^p * (1-u^2)^(k1-1) (1-v^2)^(k2-1)``
    over ``region`` (``g = region.g``, ``p = boundary_power``).

    Rectangles are split four ways, worst error first.  A cell with ``g < 0``
    at all 25 sample points contributes nothing; any other cell is integrated
    line by line in ``u`` between the roots of ``g(., v)``, with a Jacobi
    weight of exponent ``p`` absorbing the boundary behaviour.  Each cell is
    evaluated at two orders and the difference is its error estimate.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    k1, k2 = _k_pair(k)
    e1, e2 = k1 - 1.0, k2 - 1.0
    g = region.g
    u0, u1, v0, v1 = region.bbox
    u0, u1, v0, v1 = max(u0, -1.0), min(u1, 1.0), max(v0, -1.0), min(v1, 1.0)
    lo, hi = orders
    evals = 0

    def line(u_lo, u_hi, v, n):
        """int over {u : g(u, v) >= 0} in [u_lo, u_hi] at fixed v."""
        us = np.linspace(u_lo, u_hi, 17)
        gs = np.asarray(g(us, np.full_like(us, v)), dtype=float)
        cuts = [u_lo] + _sign_changes(lambda t: g(t, np.full_like(t, v)), us, gs)
        cuts.append(u_hi)
        total, count = 0.0, 0
        for a, b in zip(cuts[:-1], cuts[1:]):
            if b <= a:
                continue
            mid = 0.5 * (a + b)
            if float(g(np.array(mid), np.array(v))) < 0:
                continue
            ra = a > u_lo or gs[0] <= 0
            rb = b < u_hi or gs[-1] <= 0
            left = boundary_power if ra else (e1 if a <= -1.0 else 0.0)
            right = boundary_power if rb else (e1 if b >= 1.0 else 0.0)
            x, w = interval_rule(a, b, n, left, right)
            vv = np.full_like(x, v)
            vals = np.asarray(f(x, vv), dtype=float)
            if boundary_power:
                vals = vals * np.maximum(g(x, vv), 0.0) ** boundary_power
            # trade the factors absorbed by the Jacobi weight for the true ones
            fac = ((1.0 - x) * (1.0 + x)) ** e1 if e1 else np.ones_like(x)
            if left:
                fac = fac / (x - a) ** left
            if right:
                fac = fac / (b - x) ** right
            total += float(np.dot(w, vals * fac))
            count += len(x)
        return total, count

    def mixed(box, n):
        a, b, c, d = box
        # v where the boundary crosses the cell's vertical edges: the line
        # integrals have kinks there, so the v-rule is split at them
        vs = np.linspace(c, d, 17)
        breaks = sorted(set(_sign_changes(lambda t: g(np.full_like(t, a), t), vs)
                            + _sign_changes(lambda t: g(np.full_like(t, b), t), vs)))
        edges = [c] + [t for t in breaks if c < t < d] + [d]
        total, count = 0.0, 0
        for lo_v, hi_v in zip(edges[:-1], edges[1:]):
            xv, wv = _edge_rule(lo_v, hi_v, n, e2)
            for vj, wj in zip(xv, wv):
                val, cnt = line(a, b, float(vj), n)
                total += wj * val
                count += cnt
        return total, count

    def evaluate(box):
        nonlocal evals
        a, b, c, d = box
        su, sv = np.meshgrid(np.linspace(a, b, 5), np.linspace(c, d, 5), indexing="ij")
        gs = np.asarray(g(su, sv), dtype=float)
        evals += gs.size
        if np.all(gs < 0):
            return 0.0, 0.0
        # positive samples do not prove a cell lies inside the region, so every
        # cell that is not clearly outside is integrated between roots of g
        q_lo, n_lo = mixed(box, lo)
        q_hi, n_hi = mixed(box, hi)
        evals += n_lo + n_hi
        return q_hi, abs(q_hi - q_lo)

    heap = []
    seq = 0
    um, vm = 0.5 * (u0 + u1), 0.5 * (v0 + v1)
    for box in ((u0, um, v0, vm), (um, u1, v0, vm), (u0, um, vm, v1), (um, u1, vm, v1)):
        val, err = evaluate(box)
        heapq.heappush(heap, _Cell(-err, seq, box, val, err))
        seq += 1

    while True:
        total = math.fsum(cell.value for cell in heap)
        err = math.fsum(cell.err for cell in heap)
        if err <= tol * max(1.0, abs(total)):
            return EvalResult(total, err, True, evals)
        if len(heap) + 3 > max_cells:
            return EvalResult(total, err, False, evals)
        worst = heapq.heappop(heap)
        a, b, c, d = worst.box
        um, vm = 0.5 * (a + b), 0.5 * (c + d)
        for box in ((a, um, c, vm), (um, b, c, vm), (a, um, vm, d), (um, b, vm, d)):
            val, e = evaluate(box)
            heapq.heappush(heap, _Cell(-e, seq, box, val, e))
            seq += 1


# ---------------------------------------------------------------------------
# convex polygons


def _polygon_area(pts):
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _check_polygon(vertices):
    pts = np.asarray(vertices, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
        raise ValueError("polygon needs at least three 2D vertices")
    area = _polygon_area(pts)
    scale = float(np.max(np.abs(pts))) or 1.0
    if area <= 1e-14 * scale * scale:
        raise ValueError("degenerate or clockwise polygon (non-positive area)")
    return pts


def _split(poly, line, eps):
    a, b, c = line
    s = poly @ np.array([a, b]) - c
    if np.all(s >= -eps) or np.all(s <= eps):
        return [poly]
    pos, neg = [], []
    m = len(poly)
    for i in range(m):
        p, q = poly[i], poly[(i + 1) % m]
        sp, sq = s[i], s[(i + 1) % m]
        if sp >= -eps:
            pos.append(p)
        if sp <= eps:
            neg.append(p)
        if (sp > eps and sq < -eps) or (sp < -eps and sq > eps):
            t = sp / (sp - sq)
            x = p + t * (q - p)
            pos.append(x)
            neg.append(x)
    return [np.array(pos), np.array(neg)]


def split_polygon(vertices, lines=()):
    """Cut a convex polygon along lines ``a*z1 + b*z2 = c``; returns convex cells."""
    pts = _check_polygon(vertices)
    scale = float(np.max(np.abs(pts)))
    area = _polygon_area(pts)
    eps = 1e-12 * scale
    cells = [pts]
    for line in lines:
        a, b, c = (float(t) for t in line)
        nrm = math.hypot(a, b)
        if nrm == 0:
            continue
        line = (a / nrm, b / nrm, c / nrm)
        nxt = []
        for cell in cells:
            nxt.extend(_split(cell, line, eps))
        cells = nxt
    out = []
    for cell in cells:
        if len(cell) < 3 or _polygon_area(cell) <= 1e-13 * area:
            continue
        keep = [cell[0]]
        for p in cell[1:]:
            if np.linalg.norm(p - keep[-1]) > eps:
                keep.append(p)
        if len(keep) > 2 and np.linalg.norm(keep[0] - keep[-1]) <= eps:
            keep.pop()
        if len(keep) >= 3:
            out.append(np.array(keep))
    return out


def polygon_rule(vertices, n, lines=(), cluster=3):
    """Nodes ``(z1, z2)`` and weights for integrating over a convex polygon.

    Each cell is fanned from its centroid; each triangle is mapped from the
    unit square by collapsed coordinates ``z = P0 + s (P1 - P0) + s t (P2 - P1)``
    with the sigmoidal map applied to ``s`` and ``t``.
    """
    cells = split_polygon(vertices, lines)
    s, _, ws = clustered_rule(n, cluster)
    t, _, wt = clustered_rule(n, cluster)
    S, T = np.meshgrid(s, t, indexing="ij")
    W = ws[:, None] * wt[None, :] * S
    S, T, W = S.ravel(), T.ravel(), W.ravel()
    zs1, zs2, ws_all = [], [], []
    for cell in cells:
        c0 = cell.mean(axis=0)
        m = len(cell)
        for i in range(m):
            p1, p2 = cell[i], cell[(i + 1) % m]
            e1, e2 = p1 - c0, p2 - p1
            jac = abs(e1[0] * e2[1] - e1[1] * e2[0])
            if jac == 0:
                continue
            zs1.append(c0[0] + S * e1[0] + S * T * e2[0])
            zs2.append(c0[1] + S * e1[1] + S * T * e2[1])
            ws_all.append(W * jac)
    return np.concatenate(zs1), np.concatenate(zs2), np.concatenate(ws_all)


def integrate_polygon(f, vertices, tol, lines=(), orders=(8, 16, 32, 64), cluster=3):
    """Integral of ``f(z1, z2)`` over a convex polygon (counterclockwise vertices).

    The order is doubled along ``orders`` until two successive values agree to
    ``tol`` relative (absolute below magnitude 1).
    """
    _check_polygon(vertices)
    prev = None
    evals = 0
    for n in orders:
        z1, z2, w = polygon_rule(vertices, n, lines, cluster)
        val = float(np.dot(w, np.asarray(f(z1, z2), dtype=float)))
        evals += len(w)
        if prev is not None:
            err = abs(val - prev)
            if err <= tol * max(1.0, abs(val)):
                return EvalResult(val, err, True, evals)
        prev = val
    return EvalResult(val, err if len(orders) > 1 else float("inf"), False, evals)
