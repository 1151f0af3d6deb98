# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled scan of the two-junction constraint curve.

Mirrors _kernels_py.scan_extrema: same t1 grid, same monotone-piece
bisection of q(t2) = t2 + beta2*sin(t2), same golden-section polish.
"""
from libc.math cimport sin, cos, acos, isfinite, INFINITY, NAN

cdef double TWO_PI = 6.283185307179586476925287
cdef int BISECT_ITERS = 64
cdef double GOLDEN = 0.6180339887498948482045868


cdef inline double _qfun(double t, double beta2) nogil:
    return t + beta2 * sin(t)


cdef int _piece_bounds(double beta2, double* lo, double* hi) nogil:
    """Fill monotone-piece bounds of q on [0, 2pi]; returns piece count."""
    cdef double tc
    if beta2 <= 1.0:
        lo[0] = 0.0
        hi[0] = TWO_PI
        return 1
    tc = acos(-1.0 / beta2)
    lo[0] = 0.0
    hi[0] = tc
    lo[1] = tc
    hi[1] = TWO_PI - tc
    lo[2] = TWO_PI - tc
    hi[2] = TWO_PI
    return 3


cdef double _root_in_piece(double w, double lo, double hi, double beta2) nogil:
    """Root of q(t2) = w inside [lo, hi]; NAN when absent."""
    cdef double qlo = _qfun(lo, beta2)
    cdef double qhi = _qfun(hi, beta2)
    cdef bint rising = qhi >= qlo
    cdef double a, b, mid, val
    cdef int it
    if rising:
        if w < qlo or w > qhi:
            return NAN
    else:
        if w > qlo or w < qhi:
            return NAN
    a = lo
    b = hi
    for it in range(BISECT_ITERS):
        mid = 0.5 * (a + b)
        val = _qfun(mid, beta2)
        if (val < w) if rising else (val > w):
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)


cdef double _objective(double t1, double lo, double hi, double beta1, double beta2,
                       double ic1, double ic2, double k_const, double sign,
                       double* t2_out) nogil:
    cdef double w = t1 + beta1 * sin(t1) + k_const
    cdef double t2 = _root_in_piece(w, lo, hi, beta2)
    t2_out[0] = t2
    if t2 != t2:  # NaN: sheet ended
        return -INFINITY
    return sign * (ic1 * sin(t1) + ic2 * sin(t2))


cdef void _polish(double t1_0, double t2_0, double beta1, double beta2,
                  double ic1, double ic2, double k_const, double half_width,
                  double sign, double* t1_best, double* t2_best) nogil:
    cdef double plo[3]
    cdef double phi[3]
    cdef int n_pieces = _piece_bounds(beta2, plo, phi)
    cdef double lo = plo[0]
    cdef double hi = phi[0]
    cdef int j
    for j in range(n_pieces):
        if plo[j] - 1e-12 <= t2_0 <= phi[j] + 1e-12:
            lo = plo[j]
            hi = phi[j]
            break
    cdef double a = t1_0 - half_width
    cdef double b = t1_0 + half_width
    cdef double c = b - GOLDEN * (b - a)
    cdef double d = a + GOLDEN * (b - a)
    cdef double t2_tmp
    cdef double fc = _objective(c, lo, hi, beta1, beta2, ic1, ic2, k_const, sign, &t2_tmp)
    cdef double fd = _objective(d, lo, hi, beta1, beta2, ic1, ic2, k_const, sign, &t2_tmp)
    cdef int it
    for it in range(90):
        if fc >= fd:
            b = d
            d = c
            fd = fc
            c = b - GOLDEN * (b - a)
            fc = _objective(c, lo, hi, beta1, beta2, ic1, ic2, k_const, sign, &t2_tmp)
        else:
            a = c
            c = d
            fc = fd
            d = a + GOLDEN * (b - a)
            fd = _objective(d, lo, hi, beta1, beta2, ic1, ic2, k_const, sign, &t2_tmp)
        if b - a < 1e-13:
            break
    cdef double t1_mid = 0.5 * (a + b)
    cdef double f_mid = _objective(t1_mid, lo, hi, beta1, beta2, ic1, ic2, k_const, sign, &t2_tmp)
    cdef double f_start = sign * (ic1 * sin(t1_0) + ic2 * sin(t2_0))
    if isfinite(f_mid) and f_mid >= f_start:
        t1_best[0] = t1_mid
        t2_best[0] = t2_tmp
    else:
        t1_best[0] = t1_0
        t2_best[0] = t2_0


def scan_extrema(double beta1, double beta2, double ic1, double ic2,
                 double k_const, int n_theta=2048):
    """Extrema of the carried current on the constraint curve.

    Returns (found, i_max, t1_max, t2_max, i_min, t1_min, t2_min).
    """
    cdef double plo[3]
    cdef double phi[3]
    cdef int n_pieces = _piece_bounds(beta2, plo, phi)
    cdef double step = TWO_PI / n_theta
    cdef double best_max = -INFINITY
    cdef double best_min = INFINITY
    cdef double t1_hi = NAN, t2_hi = NAN, t1_lo = NAN, t2_lo = NAN
    cdef bint found = False
    cdef int i, j
    cdef double t1, w, t2, total, s1
    for i in range(n_theta):
        t1 = i * step
        s1 = sin(t1)
        w = t1 + beta1 * s1 + k_const
        for j in range(n_pieces):
            t2 = _root_in_piece(w, plo[j], phi[j], beta2)
            if t2 != t2:
                continue
            found = True
            total = ic1 * s1 + ic2 * sin(t2)
            if total > best_max:
                best_max = total
                t1_hi = t1
                t2_hi = t2
            if total < best_min:
                best_min = total
                t1_lo = t1
                t2_lo = t2
    if not found:
        return False, NAN, NAN, NAN, NAN, NAN, NAN
    cdef double r_t1 = 0.0, r_t2 = 0.0
    _polish(t1_hi, t2_hi, beta1, beta2, ic1, ic2, k_const, step, 1.0, &r_t1, &r_t2)
    t1_hi = r_t1
    t2_hi = r_t2
    _polish(t1_lo, t2_lo, beta1, beta2, ic1, ic2, k_const, step, -1.0, &r_t1, &r_t2)
    t1_lo = r_t1
    t2_lo = r_t2
    cdef double i_max = ic1 * sin(t1_hi) + ic2 * sin(t2_hi)
    cdef double i_min = ic1 * sin(t1_lo) + ic2 * sin(t2_lo)
    return True, i_max, t1_hi, t2_hi, i_min, t1_lo, t2_lo
