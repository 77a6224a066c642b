# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled twins of the kernels in ``_kernels_py``.

Exponent keys stay Python tuples (they are dict keys), but the key arithmetic
and degree bookkeeping run on C integers.  Coefficients remain Python objects
so big integers and Fractions keep working.
"""

from fractions import Fraction


cdef inline tuple _add_keys(tuple a, tuple b, Py_ssize_t n):
    cdef Py_ssize_t i
    cdef list out = [None] * n
    for i in range(n):
        out[i] = <long long>a[i] + <long long>b[i]
    return tuple(out)


cdef inline long long _deg(tuple key, Py_ssize_t nd):
    cdef long long s = 0
    cdef Py_ssize_t i
    for i in range(nd, len(key)):
        s += <long long>key[i]
    return s


def degree(key, nd):
    return _deg(key, nd)


def mul_terms(dict a, dict b, Py_ssize_t nd, long long order):
    if len(a) > len(b):
        a, b = b, a
    cdef list bkeys = []
    cdef list bcoef = []
    cdef list bdeg_py = []
    cdef Py_ssize_t nb, j, n
    cdef long long da, room
    cdef tuple ka, kb, key
    for kb, cb in b.items():
        bkeys.append(kb)
        bcoef.append(cb)
        bdeg_py.append(_deg(kb, nd))
    nb = len(bkeys)
    cdef dict out = {}
    for ka, ca in a.items():
        n = len(ka)
        da = _deg(ka, nd)
        room = order - da
        if room <= 0:
            continue
        for j in range(nb):
            if <long long>bdeg_py[j] >= room:
                continue
            key = _add_keys(ka, <tuple>bkeys[j], n)
            v = out.get(key, 0) + ca * bcoef[j]
            if v:
                out[key] = v
            else:
                out.pop(key, None)
    return out


def upow(coeffs, long long e, Py_ssize_t n):
    cdef list f = [1] + list(coeffs[:n])
    while len(f) < n + 1:
        f.append(0)
    cdef list h = [1] + [0] * n
    cdef Py_ssize_t m, j
    for m in range(1, n + 1):
        acc = 0
        for j in range(1, m + 1):
            fj = f[j]
            if fj:
                acc += ((e + 1) * j - m) * fj * h[m - j]
        if isinstance(acc, int) and acc % m == 0:
            h[m] = acc // m
        else:
            q = Fraction(acc) / m
            h[m] = q.numerator if q.denominator == 1 else q
    return h


def shift_accumulate(dict out, tuple key, c, tuple w, long long wdeg, list hcoeffs, long long room):
    cdef tuple cur = key
    cdef Py_ssize_t i = 0
    cdef Py_ssize_t nh = len(hcoeffs)
    cdef Py_ssize_t n = len(key)
    while i < nh and i * wdeg < room:
        h = hcoeffs[i]
        if h:
            v = out.get(cur, 0) + c * h
            if v:
                out[cur] = v
            else:
                out.pop(cur, None)
        i += 1
        cur = _add_keys(cur, w, n)
    return out


# Integers stay Python objects here: point denominators can grow past 64 bits.


cdef bint _lex_less(tuple ta, qa, tuple tb, qb):
    """``ta/qa < tb/qb`` level by level (denominators positive)."""
    for x, y in zip(ta, tb):
        lhs = x * qb
        rhs = y * qa
        if lhs != rhs:
            return lhs < rhs
    return False


cdef int _lex_sign(tuple v):
    for x in v:
        if x:
            return 1 if x > 0 else -1
    return 0


def first_crossing(list table, tuple P, den, D, last):
    """First wall hit walking from a point along ``D`` (time ``t >= 0``).

    ``table`` rows are ``(nx, ny, cn, cd, ray, dx, dy, bn, bd)`` for a wall with
    normal ``n``, ``base.n = cn/cd``, support direction ``d`` and
    ``base.d = bn/bd``.  The point is ``P/den`` with ``P`` holding three
    perturbation levels ``(x0, y0, x1, y1, x2, y2)``.  Crossings at time zero
    only count for walls collinear with ``last`` and of larger index.

    Returns ``(0, idx, (T0, T1, T2), Q)`` with time ``T/Q``, ``None`` when no
    wall is ahead, or ``(code, idx, None, 0)`` for a degenerate path: code 1
    runs along a wall, 2 meets a joint, 3 hits the apex of a ray.
    """
    Dx, Dy = D
    x0, y0, x1, y1, x2, y2 = P
    best = None
    best_t = None
    best_q = 0
    clash = None
    cdef Py_ssize_t idx
    cdef int st, sa
    for idx in range(len(table)):
        row = table[idx]
        nx, ny, cn, cd, ray, dx, dy, bn, bd = row
        nd = Dx * nx + Dy * ny
        v0 = (x0 * nx + y0 * ny) * cd - cn * den
        v1 = x1 * nx + y1 * ny
        v2 = x2 * nx + y2 * ny
        if nd == 0:
            if v0 == 0 and v1 == 0 and v2 == 0:
                return (1, idx, None, 0)
            continue
        # t_i = -v_i / nd, levels scaled separately by positive factors
        if nd > 0:
            T = (-v0, -v1 * cd, -v2 * cd)
            Q = nd * den * cd
        else:
            T = (v0, v1 * cd, v2 * cd)
            Q = -nd * den * cd
        st = _lex_sign(T)
        if st < 0:
            continue
        if st == 0:
            if last is None or idx == last:
                continue
            lr = table[last]
            if nx * lr[1] - ny * lr[0] != 0:
                return (2, idx, None, 0)
            if idx < last:
                continue
        if ray:
            dD = Dx * dx + Dy * dy
            a0 = (x0 * dx + y0 * dy) * Q * bd + T[0] * dD * den * bd - bn * den * Q
            a1 = (x1 * dx + y1 * dy) * Q + T[1] * dD * den
            a2 = (x2 * dx + y2 * dy) * Q + T[2] * dD * den
            sa = _lex_sign((a0, a1, a2))
            if sa < 0:
                continue
            if sa == 0:
                return (3, idx, None, 0)
        if best is None or _lex_less(T, Q, best_t, best_q):
            best, best_t, best_q, clash = idx, T, Q, None
        elif clash is None and not _lex_less(best_t, best_q, T, Q):
            b = table[best]
            if nx * b[1] - ny * b[0] != 0:
                clash = idx
    if best is None:
        return None
    if clash is not None:
        return (2, clash, None, 0)
    return (0, best, best_t, best_q)
