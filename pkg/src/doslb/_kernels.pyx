# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: dense two-phase simplex, DOSLB vertex enumeration, Jacobi.

Mirrors ``doslb._kernels_py`` operation for operation; see that module for
the reference semantics.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs
from libc.stdlib cimport malloc, free

cnp.import_array()

cdef enum:
    OPTIMAL = 0
    INFEASIBLE = 1
    UNBOUNDED = 2
    ITERATION_LIMIT = 3


cdef struct Work:
    int n, me, mu, m, nart, slack0, art0, ncol, w
    double *T
    double *sign
    double *cost
    int *basis
    int *idcol
    int *needs_art


cdef int work_alloc(Work *wk, int n, int me, int mu) except -1:
    cdef int m = me + mu
    wk.n = n
    wk.me = me
    wk.mu = mu
    wk.m = m
    wk.slack0 = 2 * n
    wk.art0 = 2 * n + mu
    # worst case: every row carries an artificial
    wk.w = wk.art0 + m + 1
    wk.T = <double *> malloc((m + 1) * wk.w * sizeof(double))
    wk.sign = <double *> malloc((m + 1) * sizeof(double))
    wk.cost = <double *> malloc(wk.w * sizeof(double))
    wk.basis = <int *> malloc((m + 1) * sizeof(int))
    wk.idcol = <int *> malloc((m + 1) * sizeof(int))
    wk.needs_art = <int *> malloc((m + 1) * sizeof(int))
    if not (wk.T and wk.sign and wk.cost and wk.basis and wk.idcol and wk.needs_art):
        work_free(wk)
        raise MemoryError()
    return 0


cdef void work_free(Work *wk) noexcept:
    free(wk.T)
    free(wk.sign)
    free(wk.cost)
    free(wk.basis)
    free(wk.idcol)
    free(wk.needs_art)
    wk.T = NULL
    wk.sign = NULL
    wk.cost = NULL
    wk.basis = NULL
    wk.idcol = NULL
    wk.needs_art = NULL


cdef inline void pivot(Work *wk, int r, int s) noexcept nogil:
    cdef int w = wk.w
    cdef int n1 = wk.ncol + 1
    cdef int m1 = wk.m + 1
    cdef double *T = wk.T
    cdef double *row = T + r * w
    cdef double *other
    cdef double p = row[s]
    cdef double f
    cdef int i, j
    for j in range(n1):
        row[j] = row[j] / p
    for i in range(m1):
        if i == r:
            continue
        other = T + i * w
        f = other[s]
        if f != 0.0:
            for j in range(n1):
                other[j] = other[j] - f * row[j]
    if r < wk.m:
        wk.basis[r] = s


cdef int run(Work *wk, int eligible, double pivot_tol, double opt_tol,
             int max_iter, int *iters) noexcept nogil:
    cdef int m = wk.m
    cdef int w = wk.w
    cdef int rhs = wk.ncol
    cdef double *T = wk.T
    cdef double *z = T + m * w
    cdef int s, r, i, j
    cdef double best, a, ratio
    while True:
        s = -1
        for j in range(eligible):
            if z[j] > opt_tol:
                s = j
                break
        if s < 0:
            return OPTIMAL
        r = -1
        best = 0.0
        for i in range(m):
            a = T[i * w + s]
            if a > pivot_tol:
                ratio = T[i * w + rhs] / a
                if r < 0 or ratio < best or (ratio == best and wk.basis[i] < wk.basis[r]):
                    r = i
                    best = ratio
        if r < 0:
            return UNBOUNDED
        pivot(wk, r, s)
        iters[0] += 1
        if iters[0] > max_iter:
            return ITERATION_LIMIT


cdef int solve_core(Work *wk, const double *c, const double *A, const double *b,
                    double feas_tol, double pivot_tol, double opt_tol,
                    double *x, double *value, double *y, int *iters) noexcept nogil:
    """A holds the me equality rows followed by the mu inequality rows."""
    cdef int n = wk.n, me = wk.me, mu = wk.mu, m = wk.m
    cdef int i, j, a, max_iter, status
    cdef double sg, bi, cb
    cdef double *T = wk.T
    cdef double *z
    cdef double *row
    cdef int w = wk.w
    cdef int nart = 0
    for i in range(m):
        wk.sign[i] = 1.0
        wk.needs_art[i] = 0
        if i < me:
            wk.needs_art[i] = 1
            if b[i] < 0.0:
                wk.sign[i] = -1.0
        elif b[i] < 0.0:
            wk.sign[i] = -1.0
            wk.needs_art[i] = 1
        nart += wk.needs_art[i]
    wk.nart = nart
    wk.ncol = wk.art0 + nart
    cdef int ncol = wk.ncol
    cdef int slack0 = wk.slack0, art0 = wk.art0
    for i in range((m + 1) * w):
        T[i] = 0.0
    a = 0
    for i in range(m):
        sg = wk.sign[i]
        bi = b[i]
        row = T + i * w
        for j in range(n):
            row[j] = sg * A[i * n + j]
            row[n + j] = -sg * A[i * n + j]
        row[ncol] = sg * bi
        if i >= me:
            row[slack0 + i - me] = sg
        if wk.needs_art[i]:
            row[art0 + a] = 1.0
            wk.basis[i] = art0 + a
            wk.idcol[i] = art0 + a
            a += 1
        else:
            wk.basis[i] = slack0 + i - me
            wk.idcol[i] = slack0 + i - me
    max_iter = 10 * (ncol + m)
    iters[0] = 0
    z = T + m * w

    if nart > 0:
        for j in range(art0, ncol):
            z[j] = -1.0
        for i in range(m):
            if wk.needs_art[i]:
                row = T + i * w
                for j in range(ncol + 1):
                    z[j] = z[j] + row[j]
        status = run(wk, art0, pivot_tol, opt_tol, max_iter, iters)
        if status == ITERATION_LIMIT:
            return status
        if z[ncol] > feas_tol:
            return INFEASIBLE
        for i in range(m):
            if wk.basis[i] >= art0:
                row = T + i * w
                for j in range(art0):
                    if fabs(row[j]) > pivot_tol:
                        pivot(wk, i, j)
                        break

    for j in range(ncol):
        wk.cost[j] = 0.0
    for j in range(n):
        wk.cost[j] = c[j]
        wk.cost[n + j] = -c[j]
    for j in range(ncol + 1):
        z[j] = 0.0
    for j in range(ncol):
        z[j] = wk.cost[j]
    for i in range(m):
        cb = wk.cost[wk.basis[i]]
        if cb != 0.0:
            row = T + i * w
            for j in range(ncol + 1):
                z[j] = z[j] - cb * row[j]
    status = run(wk, art0, pivot_tol, opt_tol, max_iter, iters)
    if status != OPTIMAL:
        return status

    for j in range(n):
        x[j] = 0.0
        x[n + j] = 0.0
    # x doubles as the split-variable buffer (length 2n); slack values are not needed
    for i in range(m):
        if wk.basis[i] < 2 * n:
            x[wk.basis[i]] = T[i * w + ncol]
    value[0] = 0.0
    for j in range(n):
        x[j] = x[j] - x[n + j]
        value[0] = value[0] + c[j] * x[j]
    if y != NULL:
        for i in range(m):
            y[i] = -wk.sign[i] * z[wk.idcol[i]]
    return OPTIMAL


def simplex(c, A_eq, b_eq, A_ub, b_ub, double feas_tol=1e-8,
            double pivot_tol=1e-10, double opt_tol=1e-10):
    """Maximize c.x subject to A_eq x = b_eq, A_ub x <= b_ub with x free.

    Returns (status, x, value, y_eq, y_ub, iterations).
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=1] cc = np.ascontiguousarray(c, dtype=np.float64)
    cdef int n = cc.shape[0]
    cdef int me = A_eq.shape[0]
    cdef int mu = A_ub.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] A = np.empty((me + mu, n))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] b = np.empty(me + mu)
    if me:
        A[:me] = A_eq
        b[:me] = b_eq
    if mu:
        A[me:] = A_ub
        b[me:] = b_ub
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xbuf = np.zeros(2 * n + 1)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] y = np.zeros(me + mu + 1)
    cdef Work wk
    cdef double value = 0.0
    cdef int iters = 0
    cdef int status
    work_alloc(&wk, n, me, mu)
    try:
        status = solve_core(&wk, &cc[0] if n else NULL, &A[0, 0] if (me + mu) * n else NULL,
                            &b[0] if me + mu else NULL, feas_tol, pivot_tol, opt_tol,
                            &xbuf[0], &value, &y[0], &iters)
    finally:
        work_free(&wk)
    if status != OPTIMAL:
        return status, None, 0.0, None, None, iters
    return status, xbuf[:n].copy(), value, y[:me].copy(), y[me:me + mu].copy(), iters


def doslb_enumerate(R, W, A_k, b_k, alpha_u, double feas_tol=1e-8,
                    double pivot_tol=1e-10, double opt_tol=1e-10):
    """Solve one LP per (reward vertex, unknown-constraint vertex combination).

    Same contract as the pure-Python reference.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=2] RR = np.ascontiguousarray(R, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=3] WW = np.ascontiguousarray(W, dtype=np.float64)
    cdef int nr = RR.shape[0]
    cdef int d = RR.shape[1]
    cdef int U = WW.shape[0]
    cdef int nv = WW.shape[1] if U > 0 else 1
    cdef int K = A_k.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] A = np.empty((K + U, d))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] b = np.empty(K + U)
    if K:
        A[:K] = A_k
        b[:K] = b_k
    if U:
        b[K:] = alpha_u
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xbuf = np.zeros(2 * d + 1)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] best_x = np.zeros(d)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] combo = np.zeros(U, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] best_combo = np.zeros(U, dtype=np.int64)
    cdef long long ncombo = 1
    cdef long long q, rem
    cdef int u, r, j, status, iters
    cdef int best_r = -1
    cdef double best_val = 0.0
    cdef double val = 0.0
    cdef long long n_feasible = 0
    cdef long long n_lps = 0
    cdef Work wk
    for u in range(U):
        ncombo *= nv
    work_alloc(&wk, d, 0, K + U)
    try:
        for q in range(ncombo):
            rem = q
            for u in range(U - 1, -1, -1):
                combo[u] = rem % nv
                rem = rem // nv
            for u in range(U):
                for j in range(d):
                    A[K + u, j] = WW[u, combo[u], j]
            for r in range(nr):
                status = solve_core(&wk, &RR[r, 0], &A[0, 0], &b[0], feas_tol, pivot_tol,
                                    opt_tol, &xbuf[0], &val, NULL, &iters)
                n_lps += 1
                if status == ITERATION_LIMIT:
                    return -2, best_combo, None, 0.0, n_feasible, n_lps
                if status == INFEASIBLE:
                    n_lps += nr - r - 1
                    break
                if status != OPTIMAL:
                    continue
                n_feasible += 1
                if best_r < 0 or val > best_val:
                    best_r = r
                    for u in range(U):
                        best_combo[u] = combo[u]
                    for j in range(d):
                        best_x[j] = xbuf[j]
                    best_val = val
    finally:
        work_free(&wk)
    if best_r < 0:
        return best_r, best_combo, None, 0.0, n_feasible, n_lps
    return best_r, best_combo, best_x, best_val, n_feasible, n_lps


def jacobi_eigh(M, double tol=1e-12, int max_sweeps=100):
    """Cyclic Jacobi eigendecomposition; eigenvalues ascending."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] A = np.array(M, dtype=np.float64, order='C')
    cdef int n = A.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Q = np.eye(n)
    cdef int i, j, k, p, qq, sweep
    cdef double fro = 0.0, off, thresh, apq, theta, t, cs, sn, x1, x2
    for i in range(n):
        for j in range(n):
            fro = fro + A[i, j] * A[i, j]
    thresh = tol * max(1.0, sqrt(fro))
    for sweep in range(max_sweeps):
        off = 0.0
        for i in range(n):
            for j in range(n):
                if i != j:
                    off = off + A[i, j] * A[i, j]
        if sqrt(off) <= thresh:
            break
        for p in range(n - 1):
            for qq in range(p + 1, n):
                apq = A[p, qq]
                if apq == 0.0:
                    continue
                theta = (A[qq, qq] - A[p, p]) / (2.0 * apq)
                if theta >= 0.0:
                    t = 1.0 / (theta + sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + sqrt(theta * theta + 1.0))
                cs = 1.0 / sqrt(t * t + 1.0)
                sn = t * cs
                for k in range(n):
                    x1 = A[k, p]
                    x2 = A[k, qq]
                    A[k, p] = cs * x1 - sn * x2
                    A[k, qq] = sn * x1 + cs * x2
                for k in range(n):
                    x1 = A[p, k]
                    x2 = A[qq, k]
                    A[p, k] = cs * x1 - sn * x2
                    A[qq, k] = sn * x1 + cs * x2
                for k in range(n):
                    x1 = Q[k, p]
                    x2 = Q[k, qq]
                    Q[k, p] = cs * x1 - sn * x2
                    Q[k, qq] = sn * x1 + cs * x2
    w = np.array([A[i, i] for i in range(n)])
    order = sorted(range(n), key=lambda i: (w[i], i))
    return w[order], Q[:, order].copy()
