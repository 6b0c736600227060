"""Pure-Python reference kernels.

The compiled module ``doslb._kernels`` implements the same three entry points
with the same floating-point operation order, so both backends return
bit-identical results on the same input.
"""

import math

import numpy as np

OPTIMAL = 0
INFEASIBLE = 1
UNBOUNDED = 2
ITERATION_LIMIT = 3


def _pivot(T, basis, r, s):
    m1, n1 = T.shape
    row = T[r]
    p = row[s]
    for j in range(n1):
        row[j] = row[j] / p
    for i in range(m1):
        if i == r:
            continue
        f = T[i, s]
        if f != 0.0:
            other = T[i]
            for j in range(n1):
                other[j] = other[j] - f * row[j]
    if r < len(basis):
        basis[r] = s


def _run(T, basis, eligible, pivot_tol, opt_tol, max_iter, iters):
    """Bland's-rule primal simplex on tableau T (objective in the last row)."""
    m = T.shape[0] - 1
    rhs = T.shape[1] - 1
    z = T[m]
    while True:
        s = -1
        for j in range(eligible):
            if z[j] > opt_tol:
                s = j
                break
        if s < 0:
            return OPTIMAL, iters
        r = -1
        best = 0.0
        for i in range(m):
            a = T[i, s]
            if a > pivot_tol:
                ratio = T[i, rhs] / a
                if r < 0 or ratio < best or (ratio == best and basis[i] < basis[r]):
                    r = i
                    best = ratio
        if r < 0:
            return UNBOUNDED, iters
        _pivot(T, basis, r, s)
        iters += 1
        if iters > max_iter:
            return ITERATION_LIMIT, iters


def simplex(c, A_eq, b_eq, A_ub, b_ub, feas_tol=1e-8, pivot_tol=1e-10, opt_tol=1e-10):
    """Maximize c.x subject to A_eq x = b_eq, A_ub x <= b_ub with x free.

    Returns (status, x, value, y_eq, y_ub, iterations).
    """
    c = np.asarray(c, dtype=np.float64)
    n = c.shape[0]
    me = A_eq.shape[0]
    mu = A_ub.shape[0]
    m = me + mu
    sign = np.ones(m)
    needs_art = np.zeros(m, dtype=bool)
    for i in range(me):
        needs_art[i] = True
        if b_eq[i] < 0.0:
            sign[i] = -1.0
    for k in range(mu):
        if b_ub[k] < 0.0:
            sign[me + k] = -1.0
            needs_art[me + k] = True
    nart = int(needs_art.sum())
    slack0 = 2 * n
    art0 = slack0 + mu
    ncol = art0 + nart
    T = np.zeros((m + 1, ncol + 1))
    basis = np.zeros(m, dtype=np.int64)
    idcol = np.zeros(m, dtype=np.int64)
    a = 0
    for i in range(m):
        if i < me:
            src = A_eq[i]
            b = b_eq[i]
        else:
            src = A_ub[i - me]
            b = b_ub[i - me]
        sg = sign[i]
        for j in range(n):
            T[i, j] = sg * src[j]
            T[i, n + j] = -sg * src[j]
        T[i, ncol] = sg * b
        if i >= me:
            T[i, slack0 + i - me] = sg
        if needs_art[i]:
            T[i, art0 + a] = 1.0
            basis[i] = art0 + a
            idcol[i] = art0 + a
            a += 1
        else:
            basis[i] = slack0 + i - me
            idcol[i] = slack0 + i - me
    max_iter = 10 * (ncol + m)
    iters = 0

    z = T[m]
    if nart > 0:
        for j in range(art0, ncol):
            z[j] = -1.0
        for i in range(m):
            if needs_art[i]:
                row = T[i]
                for j in range(ncol + 1):
                    z[j] = z[j] + row[j]
        status, iters = _run(T, basis, art0, pivot_tol, opt_tol, max_iter, iters)
        if status == ITERATION_LIMIT:
            return status, None, 0.0, None, None, iters
        if z[ncol] > feas_tol:
            return INFEASIBLE, None, 0.0, None, None, iters
        for i in range(m):
            if basis[i] >= art0:
                for j in range(art0):
                    if abs(T[i, j]) > pivot_tol:
                        _pivot(T, basis, i, j)
                        break

    cost = np.zeros(ncol)
    for j in range(n):
        cost[j] = c[j]
        cost[n + j] = -c[j]
    for j in range(ncol + 1):
        z[j] = 0.0
    for j in range(ncol):
        z[j] = cost[j]
    for i in range(m):
        cb = cost[basis[i]]
        if cb != 0.0:
            row = T[i]
            for j in range(ncol + 1):
                z[j] = z[j] - cb * row[j]
    status, iters = _run(T, basis, art0, pivot_tol, opt_tol, max_iter, iters)
    if status != OPTIMAL:
        return status, None, 0.0, None, None, iters

    xs = np.zeros(ncol)
    for i in range(m):
        xs[basis[i]] = T[i, ncol]
    x = np.zeros(n)
    value = 0.0
    for j in range(n):
        x[j] = xs[j] - xs[n + j]
        value = value + c[j] * x[j]
    y = np.zeros(m)
    for i in range(m):
        y[i] = -sign[i] * z[idcol[i]]
    return OPTIMAL, x, value, y[:me].copy(), y[me:].copy(), iters


def doslb_enumerate(R, W, A_k, b_k, alpha_u, feas_tol=1e-8, pivot_tol=1e-10, opt_tol=1e-10):
    """Solve one LP per (reward vertex, unknown-constraint vertex combination).

    R: (nr, d) reward vertices. W: (U, nv, d) constraint vertices.
    Returns (best_r, best_combo, x, value, n_feasible, n_lps); best_r is -1
    when every LP is infeasible and -2 on an iteration-cap failure. Ties keep
    the first LP visited: constraint combinations in lexicographic order,
    reward vertices innermost.
    """
    nr, d = R.shape
    U = W.shape[0]
    nv = W.shape[1] if U > 0 else 1
    K = A_k.shape[0]
    A_ub = np.empty((K + U, d))
    b_ub = np.empty(K + U)
    A_ub[:K] = A_k
    b_ub[:K] = b_k
    b_ub[K:] = alpha_u
    A_eq = np.empty((0, d))
    b_eq = np.empty(0)
    ncombo = nv ** U
    best_r = -1
    best_combo = np.zeros(U, dtype=np.int64)
    best_x = None
    best_val = 0.0
    n_feasible = 0
    n_lps = 0
    combo = np.zeros(U, dtype=np.int64)
    for q in range(ncombo):
        rem = q
        for u in range(U - 1, -1, -1):
            combo[u] = rem % nv
            rem //= nv
        for u in range(U):
            A_ub[K + u] = W[u, combo[u]]
        for r in range(nr):
            status, x, val, _, _, _ = simplex(R[r], A_eq, b_eq, A_ub, b_ub, feas_tol, pivot_tol, opt_tol)
            n_lps += 1
            if status == ITERATION_LIMIT:
                return -2, best_combo, None, 0.0, n_feasible, n_lps
            if status == INFEASIBLE:
                # the polytope does not depend on the reward vertex
                n_lps += nr - r - 1
                break
            if status != OPTIMAL:
                continue
            n_feasible += 1
            if best_r < 0 or val > best_val:
                best_r = r
                best_combo = combo.copy()
                best_x = x
                best_val = val
    return best_r, best_combo, best_x, best_val, n_feasible, n_lps


def jacobi_eigh(M, tol=1e-12, max_sweeps=100):
    """Cyclic Jacobi eigendecomposition; eigenvalues ascending."""
    A = np.array(M, dtype=np.float64)
    n = A.shape[0]
    Q = np.eye(n)
    fro = 0.0
    for i in range(n):
        for j in range(n):
            fro = fro + A[i, j] * A[i, j]
    thresh = tol * max(1.0, math.sqrt(fro))
    for _ in range(max_sweeps):
        off = 0.0
        for i in range(n):
            for j in range(n):
                if i != j:
                    off = off + A[i, j] * A[i, j]
        if math.sqrt(off) <= thresh:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                if theta >= 0.0:
                    t = 1.0 / (theta + math.sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + math.sqrt(theta * theta + 1.0))
                cs = 1.0 / math.sqrt(t * t + 1.0)
                sn = t * cs
                for k in range(n):
                    akp = A[k, p]
                    akq = A[k, q]
                    A[k, p] = cs * akp - sn * akq
                    A[k, q] = sn * akp + cs * akq
                for k in range(n):
                    apk = A[p, k]
                    aqk = A[q, k]
                    A[p, k] = cs * apk - sn * aqk
                    A[q, k] = sn * apk + cs * aqk
                for k in range(n):
                    qkp = Q[k, p]
                    qkq = Q[k, q]
                    Q[k, p] = cs * qkp - sn * qkq
                    Q[k, q] = sn * qkp + cs * qkq
    w = np.array([A[i, i] for i in range(n)])
    order = sorted(range(n), key=lambda i: (w[i], i))
    return w[order], Q[:, order].copy()
