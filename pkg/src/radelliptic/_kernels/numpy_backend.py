"""Pure-numpy assembly of the upwinded residual and its linearization.

The compiled extension in ``_speedups.pyx`` implements the same contract;
``radelliptic._kernels`` picks whichever is available at import time.
"""

import numpy as np


def assemble_system(nodes, u, fvals, alpha, eps, cmp_, cmm, ctp, ctm, dim,
                    freeze_factor):
    """Residual and tridiagonal linearization at the interior nodes.

    Returns arrays (res, lo, di, up) of length n+1; entries 0 and n are left
    zero for the caller to fill with boundary rows.  ``lo[i]``, ``di[i]``,
    ``up[i]`` are the derivatives of row i with respect to u[i-1], u[i],
    u[i+1].  With ``freeze_factor`` the derivative of the degenerate factor
    (q^2+eps^2)^{alpha/2} is dropped, which leaves the monotone elliptic part
    of the linearization.

    The first-difference used for the transport term (N-1)/r * q is the
    second-order centered quotient wherever that keeps the off-diagonal signs
    monotone, and the forward quotient otherwise (the transport coefficient
    is nonnegative for every variant).
    """
    r = np.asarray(nodes, dtype=float)
    u = np.asarray(u, dtype=float)
    f = np.asarray(fvals, dtype=float)
    n = len(r) - 1

    res = np.zeros(n + 1)
    lo = np.zeros(n + 1)
    di = np.zeros(n + 1)
    up = np.zeros(n + 1)

    ri = r[1:-1]
    hm = r[1:-1] - r[:-2]
    hp = r[2:] - r[1:-1]
    denom = hp * hm * (hp + hm)

    q = (hm * hm * u[2:] + (hp * hp - hm * hm) * u[1:-1] - hp * hp * u[:-2]) / denom
    m = 2.0 * (hm * u[2:] - (hp + hm) * u[1:-1] + hp * u[:-2]) / denom

    dq_dn = -hp * hp / denom
    dq_di = (hp * hp - hm * hm) / denom
    dq_up = hm * hm / denom
    dm_dn = 2.0 * hp / denom
    dm_di = -2.0 * (hp + hm) / denom
    dm_up = 2.0 * hm / denom

    coef_r = (dim - 1) / ri if dim > 1 else np.zeros_like(ri)
    cm_act = np.where(m >= 0.0, cmp_, cmm)

    # centered transport keeps the lower off-diagonal monotone iff
    # coef_r * ct * hp <= 2 * cm_act (worst transport branch)
    centered = coef_r * max(ctp, ctm) * hp <= 2.0 * cm_act
    fwd = (u[2:] - u[1:-1]) / hp
    t = np.where(centered, q, fwd)
    ct_act = np.where(t >= 0.0, ctp, ctm)
    dt_dn = np.where(centered, dq_dn, 0.0)
    dt_di = np.where(centered, dq_di, -1.0 / hp)
    dt_up = np.where(centered, dq_up, 1.0 / hp)

    bracket = (cmp_ * np.maximum(m, 0.0) - cmm * np.maximum(-m, 0.0)
               + coef_r * (ctp * np.maximum(t, 0.0) - ctm * np.maximum(-t, 0.0)))

    if alpha == 0.0:
        factor = np.ones_like(q)
        dfactor = np.zeros_like(q)
    else:
        q2e = q * q + eps * eps
        factor = q2e ** (0.5 * alpha)
        with np.errstate(divide="ignore", invalid="ignore"):
            dfactor = np.where(q2e > 0.0,
                               alpha * q * q2e ** (0.5 * alpha - 1.0), 0.0)

    res[1:-1] = factor * bracket - f[1:-1]

    lo_b = cm_act * dm_dn + coef_r * ct_act * dt_dn
    di_b = cm_act * dm_di + coef_r * ct_act * dt_di
    up_b = cm_act * dm_up + coef_r * ct_act * dt_up
    lo[1:-1] = factor * lo_b
    di[1:-1] = factor * di_b
    up[1:-1] = factor * up_b
    if not freeze_factor:
        chain = dfactor * bracket
        lo[1:-1] += chain * dq_dn
        di[1:-1] += chain * dq_di
        up[1:-1] += chain * dq_up
    return res, lo, di, up
