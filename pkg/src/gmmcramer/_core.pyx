# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled pairwise energy kernels.

Rows of the 2-D inputs are independent problems (one per slice direction or
per batch item).  For a pair of univariate mixtures the energy terms are

    cross = sum_jk p_j q_k z_jk V((m_j - n_k) / z_jk)
    self  = sum_jk p_j p_k z_jk V((m_j - m_k) / z_jk)

with ``z_jk = sqrt(s_j^2 + t_k^2 + EPS_SOFT)``.  A pair of point masses
uses the exact limit ``z V(h / z) -> |h| / 2`` instead of the softened value.
Gradients are taken with respect to the first mixture only.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport erf, exp, sqrt, fabs, copysign

cnp.import_array()

cdef double EPS_SOFT = 1e-20
cdef double INV_SQRT2 = 0.70710678118654752440
cdef double INV_SQRT_2PI = 0.39894228040143267794


cdef inline double _pdf(double x) nogil:
    return INV_SQRT_2PI * exp(-0.5 * x * x)


cdef inline double _v(double x) nogil:
    cdef double ax = fabs(x)
    return 0.5 * ax * erf(ax * INV_SQRT2) + _pdf(ax)


cdef inline double _sign(double h) nogil:
    if h == 0.0:
        return 0.0
    return copysign(1.0, h)


def cross_energy(const double[:, ::1] p1, const double[:, ::1] m1, const double[:, ::1] s1,
                 const double[:, ::1] p2, const double[:, ::1] m2, const double[:, ::1] s2,
                 bint want_grad=False):
    cdef Py_ssize_t nb = m1.shape[0], n = m1.shape[1], nn = m2.shape[1]
    cdef Py_ssize_t b, j, k
    cdef double z, x, w, acc, pj, sj, q, h
    out = np.zeros(nb)
    cdef double[::1] val = out
    dp_arr = np.zeros((nb, n)) if want_grad else np.zeros((1, 1))
    dm_arr = np.zeros((nb, n)) if want_grad else np.zeros((1, 1))
    ds_arr = np.zeros((nb, n)) if want_grad else np.zeros((1, 1))
    cdef double[:, ::1] dp = dp_arr, dm = dm_arr, ds = ds_arr
    cdef double gp, gm, gs, e
    with nogil:
        for b in range(nb):
            acc = 0.0
            for j in range(n):
                pj = p1[b, j]
                sj = s1[b, j]
                gp = 0.0
                gm = 0.0
                gs = 0.0
                for k in range(nn):
                    q = sj * sj + s2[b, k] * s2[b, k]
                    h = m1[b, j] - m2[b, k]
                    w = p2[b, k]
                    if q == 0.0:
                        gp = gp + w * 0.5 * fabs(h)
                        if want_grad:
                            gm = gm + w * 0.5 * _sign(h)
                        continue
                    z = sqrt(q + EPS_SOFT)
                    x = h / z
                    e = _v(x)
                    gp = gp + w * z * e
                    if want_grad:
                        gm = gm + w * 0.5 * erf(x * INV_SQRT2)
                        gs = gs + w * (sj / z) * _pdf(x)
                acc = acc + pj * gp
                if want_grad:
                    dp[b, j] = gp
                    dm[b, j] = pj * gm
                    ds[b, j] = pj * gs
            val[b] = acc
    if want_grad:
        return out, dp_arr, dm_arr, ds_arr
    return out


def self_energy(const double[:, ::1] p, const double[:, ::1] m, const double[:, ::1] s,
                bint want_grad=False):
    cdef Py_ssize_t nb = m.shape[0], n = m.shape[1]
    cdef Py_ssize_t b, j, k
    cdef double z, x, acc, pj, pk, sj, sk, e, f, g, q, h
    out = np.zeros(nb)
    cdef double[::1] val = out
    dp_arr = np.zeros((nb, n)) if want_grad else np.zeros((1, 1))
    dm_arr = np.zeros((nb, n)) if want_grad else np.zeros((1, 1))
    ds_arr = np.zeros((nb, n)) if want_grad else np.zeros((1, 1))
    cdef double[:, ::1] dp = dp_arr, dm = dm_arr, ds = ds_arr
    with nogil:
        for b in range(nb):
            acc = 0.0
            for j in range(n):
                pj = p[b, j]
                sj = s[b, j]
                # diagonal: x = 0, z = sqrt(2 s_j^2 + eps); zero for a point mass
                if sj != 0.0:
                    z = sqrt(2.0 * sj * sj + EPS_SOFT)
                    e = z * INV_SQRT_2PI
                    acc = acc + pj * pj * e
                    if want_grad:
                        dp[b, j] += 2.0 * pj * e
                        ds[b, j] += 2.0 * pj * pj * (sj / z) * INV_SQRT_2PI
                for k in range(j + 1, n):
                    pk = p[b, k]
                    sk = s[b, k]
                    q = sj * sj + sk * sk
                    h = m[b, j] - m[b, k]
                    if q == 0.0:
                        e = 0.5 * fabs(h)
                        acc = acc + 2.0 * pj * pk * e
                        if want_grad:
                            dp[b, j] += 2.0 * pk * e
                            dp[b, k] += 2.0 * pj * e
                            g = pj * pk * _sign(h)
                            dm[b, j] += g
                            dm[b, k] -= g
                        continue
                    z = sqrt(q + EPS_SOFT)
                    x = h / z
                    e = z * _v(x)
                    acc = acc + 2.0 * pj * pk * e
                    if want_grad:
                        dp[b, j] += 2.0 * pk * e
                        dp[b, k] += 2.0 * pj * e
                        g = pj * pk * erf(x * INV_SQRT2)
                        dm[b, j] += g
                        dm[b, k] -= g
                        f = 2.0 * pj * pk * _pdf(x) / z
                        ds[b, j] += f * sj
                        ds[b, k] += f * sk
            val[b] = acc
    if want_grad:
        return out, dp_arr, dm_arr, ds_arr
    return out


cdef inline void _pair(double h, double sa, double sb, double* zv, double* er,
                       double* pz) noexcept nogil:
    # z V(h/z), erf(x/sqrt2) and phi(x)/z for one pair; point-mass pairs exact
    cdef double q = sa * sa + sb * sb
    cdef double z, x
    if q == 0.0:
        zv[0] = 0.5 * fabs(h)
        er[0] = _sign(h)
        pz[0] = 0.0
        return
    z = sqrt(q + EPS_SOFT)
    x = h / z
    zv[0] = z * _v(x)
    er[0] = erf(x * INV_SQRT2)
    pz[0] = _pdf(x) / z


def c2_grad(const double[:, ::1] p1, const double[:, ::1] m1, const double[:, ::1] s1,
            const double[:, ::1] p2, const double[:, ::1] m2, const double[:, ::1] s2):
    """``2 * cross - self1`` per row and its gradient for the first mixture.

    Cross and self terms of each component are accumulated side by side, so
    the gradient is exactly zero when both mixtures are bitwise equal.
    """
    cdef Py_ssize_t nb = m1.shape[0], n = m1.shape[1], nn = m2.shape[1]
    cdef Py_ssize_t b, j, k, kmax
    cdef double pj, sj, mj, zc, ec, pc, zs, es, ps, gp, gm, gs, cr, acc
    out = np.zeros(nb)
    dp_arr = np.zeros((nb, n))
    dm_arr = np.zeros((nb, n))
    ds_arr = np.zeros((nb, n))
    cdef double[::1] val = out
    cdef double[:, ::1] dp = dp_arr, dm = dm_arr, ds = ds_arr
    kmax = n if n > nn else nn
    with nogil:
        for b in range(nb):
            acc = 0.0
            for j in range(n):
                pj = p1[b, j]
                sj = s1[b, j]
                mj = m1[b, j]
                gp = 0.0
                gm = 0.0
                gs = 0.0
                cr = 0.0
                for k in range(kmax):
                    if k < nn:
                        _pair(mj - m2[b, k], sj, s2[b, k], &zc, &ec, &pc)
                        cr = cr + p2[b, k] * zc
                        gp = gp + p2[b, k] * zc
                        gm = gm + p2[b, k] * ec
                        gs = gs + p2[b, k] * pc
                    if k < n:
                        _pair(mj - m1[b, k], sj, s1[b, k], &zs, &es, &ps)
                        gp = gp - p1[b, k] * zs
                        gm = gm - p1[b, k] * es
                        gs = gs - p1[b, k] * ps
                acc = acc + pj * (cr + gp)
                dp[b, j] = 2.0 * gp
                dm[b, j] = pj * gm
                ds[b, j] = 2.0 * pj * sj * gs
            val[b] = acc
    return out, dp_arr, dm_arr, ds_arr
