"""NumPy implementation of the two-junction constraint-curve scan.

For phases t1, t2 in [0, 2pi) the constraint

    t1 - t2 + beta1*sin(t1) - beta2*sin(t2) + k_const = 0

is solved for t2 at every point of a dense t1 grid by rewriting it as
q(t2) = t2 + beta2*sin(t2) = w(t1) and bisecting each monotone piece of q
(there are at most three on [0, 2pi]).  The total current
ic1*sin(t1) + ic2*sin(t2) is evaluated on every solution and the grid
extrema are refined by a derivative-free golden-section pass that keeps
the t2 root continued within its monotone piece.
"""
from __future__ import annotations

import math

import numpy as np

_BISECT_ITERS = 64
_GOLDEN = 0.5 * (math.sqrt(5.0) - 1.0)


def _pieces(beta2: float):
    """Monotone pieces of q(t) = t + beta2*sin(t) on [0, 2pi]."""
    if beta2 <= 1.0:
        return [(0.0, 2.0 * math.pi)]
    tc = math.acos(-1.0 / beta2)
    return [(0.0, tc), (tc, 2.0 * math.pi - tc), (2.0 * math.pi - tc, 2.0 * math.pi)]


def _q(t, beta2):
    return t + beta2 * np.sin(t)


def _bisect_piece(w, lo, hi, beta2):
    """Vectorized roots of q(t2) = w on one monotone piece.

    Returns (t2, mask) where mask marks entries of w with a root inside.
    """
    qlo = lo + beta2 * math.sin(lo)
    qhi = hi + beta2 * math.sin(hi)
    rising = qhi >= qlo
    w = np.asarray(w, dtype=float)
    if rising:
        mask = (w >= qlo) & (w <= qhi)
    else:
        mask = (w <= qlo) & (w >= qhi)
    t_lo = np.full(w.shape, lo)
    t_hi = np.full(w.shape, hi)
    wm = w
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (t_lo + t_hi)
        val = _q(mid, beta2)
        go_right = (val < wm) if rising else (val > wm)
        t_lo = np.where(go_right, mid, t_lo)
        t_hi = np.where(go_right, t_hi, mid)
    return 0.5 * (t_lo + t_hi), mask


def _root_in_piece(w: float, lo: float, hi: float, beta2: float):
    """Scalar root of q(t2) = w inside [lo, hi], or None."""
    qlo = lo + beta2 * math.sin(lo)
    qhi = hi + beta2 * math.sin(hi)
    rising = qhi >= qlo
    if rising:
        if not (qlo <= w <= qhi):
            return None
    elif not (qhi <= w <= qlo):
        return None
    a, b = lo, hi
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (a + b)
        val = mid + beta2 * math.sin(mid)
        if (val < w) if rising else (val > w):
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)


def _polish(t1_0, t2_0, beta1, beta2, ic1, ic2, k_const, half_width, sign):
    """Golden-section refinement of sign * I along one constraint sheet."""
    pieces = _pieces(beta2)
    piece = pieces[0]
    for lo, hi in pieces:
        if lo - 1e-12 <= t2_0 <= hi + 1e-12:
            piece = (lo, hi)
            break

    def objective(t1):
        w = t1 + beta1 * math.sin(t1) + k_const
        t2 = _root_in_piece(w, piece[0], piece[1], beta2)
        if t2 is None:
            return -math.inf, math.nan
        return sign * (ic1 * math.sin(t1) + ic2 * math.sin(t2)), t2

    a = t1_0 - half_width
    b = t1_0 + half_width
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, _ = objective(c)
    fd, _ = objective(d)
    for _ in range(90):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc, _ = objective(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd, _ = objective(d)
        if b - a < 1e-13:
            break
    t1_best = 0.5 * (a + b)
    f_best, t2_best = objective(t1_best)
    if not math.isfinite(f_best) or f_best < sign * (ic1 * math.sin(t1_0) + ic2 * math.sin(t2_0)):
        return t1_0, t2_0
    return t1_best, t2_best


def scan_extrema(beta1, beta2, ic1, ic2, k_const, n_theta=2048):
    """Extrema of the total current on the constraint curve.

    Returns ``(found, i_max, t1_max, t2_max, i_min, t1_min, t2_min)``.
    ``found`` is False when no (t1, t2) in [0, 2pi)^2 satisfies the
    constraint, i.e. the fluxon lobe does not reach this flux value.
    """
    t1 = np.arange(n_theta) * (2.0 * math.pi / n_theta)
    w = t1 + beta1 * np.sin(t1) + k_const
    sin_t1 = np.sin(t1)

    best_max = -math.inf
    best_min = math.inf
    arg_max = (math.nan, math.nan)
    arg_min = (math.nan, math.nan)
    found = False
    for lo, hi in _pieces(beta2):
        t2, mask = _bisect_piece(w, lo, hi, beta2)
        if not np.any(mask):
            continue
        found = True
        total = ic1 * sin_t1 + ic2 * np.sin(t2)
        total = np.where(mask, total, np.nan)
        k_hi = np.nanargmax(total)
        k_lo = np.nanargmin(total)
        if total[k_hi] > best_max:
            best_max = float(total[k_hi])
            arg_max = (float(t1[k_hi]), float(t2[k_hi]))
        if total[k_lo] < best_min:
            best_min = float(total[k_lo])
            arg_min = (float(t1[k_lo]), float(t2[k_lo]))
    if not found:
        return False, math.nan, math.nan, math.nan, math.nan, math.nan, math.nan

    half = 2.0 * math.pi / n_theta
    t1_hi, t2_hi = _polish(arg_max[0], arg_max[1], beta1, beta2, ic1, ic2, k_const, half, +1.0)
    t1_lo, t2_lo = _polish(arg_min[0], arg_min[1], beta1, beta2, ic1, ic2, k_const, half, -1.0)
    i_max = ic1 * math.sin(t1_hi) + ic2 * math.sin(t2_hi)
    i_min = ic1 * math.sin(t1_lo) + ic2 * math.sin(t2_lo)
    return True, i_max, t1_hi, t2_hi, i_min, t1_lo, t2_lo
