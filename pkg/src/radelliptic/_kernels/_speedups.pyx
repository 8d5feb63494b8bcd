# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled assembly of the upwinded residual and its linearization.

Mirrors numpy_backend.assemble_system; see that module for the contract.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, pow

cnp.import_array()


def assemble_system(nodes, u, fvals, double alpha, double eps, double cmp_,
                    double cmm, double ctp, double ctm, int dim,
                    bint freeze_factor):
    cdef cnp.ndarray[double, ndim=1] r = np.ascontiguousarray(nodes, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] v = np.ascontiguousarray(u, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] f = np.ascontiguousarray(fvals, dtype=np.float64)
    cdef Py_ssize_t n = r.shape[0] - 1

    cdef cnp.ndarray[double, ndim=1] res = np.zeros(n + 1)
    cdef cnp.ndarray[double, ndim=1] lo = np.zeros(n + 1)
    cdef cnp.ndarray[double, ndim=1] di = np.zeros(n + 1)
    cdef cnp.ndarray[double, ndim=1] up = np.zeros(n + 1)

    cdef Py_ssize_t i
    cdef double hm, hp, denom, q, m, coef_r, cm_act, ct_act, ctmax
    cdef double dq_dn, dq_di, dq_up, dm_dn, dm_di, dm_up
    cdef double dt_dn, dt_di, dt_up, t, bracket, factor, dfactor, q2e, chain

    ctmax = ctp if ctp > ctm else ctm

    for i in range(1, n):
        hm = r[i] - r[i - 1]
        hp = r[i + 1] - r[i]
        denom = hp * hm * (hp + hm)

        q = (hm * hm * v[i + 1] + (hp * hp - hm * hm) * v[i]
             - hp * hp * v[i - 1]) / denom
        m = 2.0 * (hm * v[i + 1] - (hp + hm) * v[i] + hp * v[i - 1]) / denom

        dq_dn = -hp * hp / denom
        dq_di = (hp * hp - hm * hm) / denom
        dq_up = hm * hm / denom
        dm_dn = 2.0 * hp / denom
        dm_di = -2.0 * (hp + hm) / denom
        dm_up = 2.0 * hm / denom

        coef_r = (dim - 1) / r[i] if dim > 1 else 0.0
        cm_act = cmp_ if m >= 0.0 else cmm

        if coef_r * ctmax * hp <= 2.0 * cm_act:
            t = q
            dt_dn = dq_dn
            dt_di = dq_di
            dt_up = dq_up
        else:
            t = (v[i + 1] - v[i]) / hp
            dt_dn = 0.0
            dt_di = -1.0 / hp
            dt_up = 1.0 / hp
        ct_act = ctp if t >= 0.0 else ctm

        if m >= 0.0:
            bracket = cmp_ * m
        else:
            bracket = cmm * m
        if t >= 0.0:
            bracket += coef_r * ctp * t
        else:
            bracket += coef_r * ctm * t

        if alpha == 0.0:
            factor = 1.0
            dfactor = 0.0
        else:
            q2e = q * q + eps * eps
            factor = pow(q2e, 0.5 * alpha)
            dfactor = alpha * q * pow(q2e, 0.5 * alpha - 1.0) if q2e > 0.0 else 0.0

        res[i] = factor * bracket - f[i]
        lo[i] = factor * (cm_act * dm_dn + coef_r * ct_act * dt_dn)
        di[i] = factor * (cm_act * dm_di + coef_r * ct_act * dt_di)
        up[i] = factor * (cm_act * dm_up + coef_r * ct_act * dt_up)
        if not freeze_factor:
            chain = dfactor * bracket
            lo[i] += chain * dq_dn
            di[i] += chain * dq_di
            up[i] += chain * dq_up

    return res, lo, di, up
