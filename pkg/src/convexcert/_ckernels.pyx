# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops; same contract as :mod:`convexcert._pykernels`."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def away_step_fw(G_in, c_in, lam_in, double tol, long max_iter):
    cdef double[:, ::1] G = np.ascontiguousarray(G_in, dtype=np.float64)
    cdef double[::1] c = np.ascontiguousarray(c_in, dtype=np.float64)
    lam_arr = np.array(lam_in, dtype=np.float64)
    cdef double[::1] lam = lam_arr
    cdef Py_ssize_t m = G.shape[0]
    Gl_arr = np.zeros(m, dtype=np.float64)
    cdef double[::1] Gl = Gl_arr
    cdef Py_ssize_t i, j, s, a
    cdef long it = 0
    cdef double gap = 1e300, gap_away, glam, lGl, gi, gmin, gmaxv
    cdef double slope, curv, gmax, step, acc

    for i in range(m):
        acc = 0.0
        for j in range(m):
            acc += G[i, j] * lam[j]
        Gl[i] = acc

    while it < max_iter:
        if it % 64 == 63:
            for i in range(m):
                acc = 0.0
                for j in range(m):
                    acc += G[i, j] * lam[j]
                Gl[i] = acc
        glam = 0.0
        lGl = 0.0
        s = 0
        a = -1
        gmin = 1e300
        gmaxv = -1e300
        for i in range(m):
            gi = Gl[i] - c[i]
            glam += gi * lam[i]
            lGl += lam[i] * Gl[i]
            if gi < gmin:
                gmin = gi
                s = i
            if lam[i] > 0.0 and gi > gmaxv:
                gmaxv = gi
                a = i
        gap = glam - gmin
        if gap <= tol:
            break
        gap_away = gmaxv - glam
        if gap >= gap_away or a < 0 or lam[a] >= 1.0:
            slope = gmin - glam
            curv = G[s, s] - 2.0 * Gl[s] + lGl
            gmax = 1.0
            if curv <= 0.0:
                step = gmax
            else:
                step = -slope / curv
                if step > gmax:
                    step = gmax
            for i in range(m):
                lam[i] *= 1.0 - step
                Gl[i] = (1.0 - step) * Gl[i] + step * G[i, s]
            lam[s] += step
        else:
            slope = glam - gmaxv
            curv = lGl - 2.0 * Gl[a] + G[a, a]
            gmax = lam[a] / (1.0 - lam[a])
            if curv <= 0.0:
                step = gmax
            else:
                step = -slope / curv
                if step > gmax:
                    step = gmax
            for i in range(m):
                lam[i] *= 1.0 + step
                Gl[i] = (1.0 + step) * Gl[i] - step * G[i, a]
            lam[a] -= step
            if step >= gmax:
                lam[a] = 0.0
        for i in range(m):
            if lam[i] < 0.0:
                lam[i] = 0.0
        it += 1
    else:
        glam = 0.0
        gmin = 1e300
        for i in range(m):
            acc = 0.0
            for j in range(m):
                acc += G[i, j] * lam[j]
            gi = acc - c[i]
            glam += gi * lam[i]
            if gi < gmin:
                gmin = gi
        gap = glam - gmin
    return lam_arr, float(gap), int(it)


def cesaro_run(A_in, b_in, x_in, long n_steps):
    cdef double[:, ::1] A = np.ascontiguousarray(A_in, dtype=np.float64)
    cdef double[::1] b = np.ascontiguousarray(b_in, dtype=np.float64)
    x_arr = np.array(x_in, dtype=np.float64)
    cdef double[::1] x = x_arr
    cdef Py_ssize_t n = x.shape[0]
    total_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] total = total_arr
    cdef double[::1] tmp = np.zeros(n, dtype=np.float64)
    cdef Py_ssize_t i, j
    cdef long k
    cdef double acc
    for k in range(n_steps):
        for i in range(n):
            total[i] += x[i]
        for i in range(n):
            acc = b[i]
            for j in range(n):
                acc += A[i, j] * x[j]
            tmp[i] = acc
        for i in range(n):
            x[i] = tmp[i]
    return total_arr, x_arr
