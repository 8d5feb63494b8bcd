"""Certification checks on computed radial profiles.

Covers the gradient-flux inequalities on monotone intervals, the
touching-paraboloid viscosity tests, the Holder exponent of u' at its
zeros, the explicit C^1 growth bounds, and the derivative-number
continuity diagnostics.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .errors import (InsufficientData, InvalidSpec, NotAZero, NotConverged)
from .grid import (DiscreteRadialFunction, derivative_numbers,
                   interior_quotients, lipschitz_constant)
from .operators import OperatorSpec, eval_radial_many
from .report import VerificationReport
from .solver import Solution, SourceFunction


def epsilon_aA(x, a: float, A: float):
    """x+/a - x-/A, the weighted positive/negative split of x."""
    if a <= 0 or A <= 0:
        raise InvalidSpec("weights must be positive")
    x = np.asarray(x, dtype=float)
    out = np.maximum(x, 0.0) / a - np.maximum(-x, 0.0) / A
    return float(out) if out.ndim == 0 else out


def gamma_exponent(op: OperatorSpec) -> tuple[float, float]:
    """The barrier exponents (gamma, gamma1).

    gamma = (A/a)(N-1)(1+alpha) governs the lower/upper flux barriers;
    gamma1 = (N-1)(1+alpha) is the convex-branch exponent, gamma1 <= gamma.
    """
    gamma1 = (op.dim - 1) * (1.0 + op.alpha)
    return (op.A / op.a) * gamma1, gamma1


class Sign(str, enum.Enum):
    POSITIVE = "Positive"
    NEGATIVE = "Negative"


@dataclass(frozen=True)
class SignInterval:
    """Maximal run of interior nodes where u' keeps one strict sign."""

    lo: float
    hi: float
    sign: Sign
    threshold: float
    # interior-node index range [i_lo, i_hi] (inclusive, 1-based into nodes)
    i_lo: int
    i_hi: int


def sign_intervals(u: DiscreteRadialFunction, threshold: float) -> list[SignInterval]:
    """Decompose the interior into runs of strictly signed discrete u'.

    Runs shorter than 3 nodes are discarded; below the threshold the sign
    of the quotient is treated as noise.
    """
    if threshold <= 0:
        raise InvalidSpec("threshold must be positive")
    q, _ = interior_quotients(u)
    nodes = u.grid.nodes
    state = np.where(q > threshold, 1, np.where(q < -threshold, -1, 0))
    intervals: list[SignInterval] = []
    start = 0
    for k in range(1, len(state) + 1):
        if k == len(state) or state[k] != state[start]:
            if state[start] != 0 and k - start >= 3:
                sign = Sign.POSITIVE if state[start] > 0 else Sign.NEGATIVE
                intervals.append(SignInterval(
                    lo=float(nodes[1 + start]), hi=float(nodes[k]),
                    sign=sign, threshold=threshold,
                    i_lo=1 + start, i_hi=k))
            start = k
    return intervals


def _as_function(u):
    if isinstance(u, Solution):
        if not u.converged:
            raise NotConverged("analysis requires a converged solution")
        return u.u, u.residual_sup
    return u, 0.0


def _pairwise_flux_checks(report, name_tol_pairs, nodes, flux, idx, op,
                          f_sup, eps_cum, increasing):
    """Worst pairwise margins of the flux inequalities on one interval.

    ``idx`` are node indices of the interval; for each left endpoint the
    integral/barrier inequality is evaluated against all right endpoints
    at once.
    """
    gamma, _ = gamma_exponent(op)
    one_p_a = 1.0 + op.alpha
    denom_loose = op.A * (op.dim - 1) * one_p_a + op.a
    denom_tight = op.A * (op.dim - 1) * one_p_a + op.A

    names = {key: (math.inf, nodes[idx[0]]) for key in
             ("integral", "barrier_loose", "barrier_tight")}
    for pos, i in enumerate(idx[:-1]):
        right = idx[pos + 1:]
        s = nodes[right]
        growth = one_p_a * (eps_cum[right] - eps_cum[i])
        if increasing:
            # flux may not grow faster than the weighted integral of f
            m_int = flux[i] + growth - flux[right]
        else:
            m_int = flux[right] - flux[i] - growth
        ratio = (nodes[i] / s) ** gamma
        decay = 1.0 - (nodes[i] / s) ** (gamma + 1.0)
        for key, denom in (("barrier_loose", denom_loose),
                           ("barrier_tight", denom_tight)):
            barrier = f_sup * one_p_a * s / denom * decay
            if increasing:
                m_bar = flux[right] - (ratio * flux[i] - barrier)
            else:
                m_bar = (ratio * flux[i] + barrier) - flux[right]
            w = int(np.argmin(m_bar))
            if m_bar[w] < names[key][0]:
                names[key] = (float(m_bar[w]), float(s[w]))
        w = int(np.argmin(m_int))
        if m_int[w] < names["integral"][0]:
            names["integral"] = (float(m_int[w]), float(s[w]))

    side = "eqA" if increasing else "eqC"
    bar = "eqB" if increasing else "eqD"
    tol_fatal, tol_advisory = name_tol_pairs
    report.add(side, names["integral"][1], names["integral"][0], tol_fatal)
    report.add(bar + "[loose]", names["barrier_loose"][1],
               names["barrier_loose"][0], tol_fatal)
    report.add(bar + "[tight]", names["barrier_tight"][1],
               names["barrier_tight"][0], tol_advisory)


def verify_flux_inequalities(u, op: OperatorSpec, f: SourceFunction,
                             threshold: float) -> VerificationReport:
    """Check the four gradient-flux inequalities on every monotone interval.

    The flux is Phi = |u'|^alpha u'.  On intervals where u' > 0, Phi(s)
    is bounded above through the weighted integral of f (eqA) and below
    by the (r/s)^gamma barrier (eqB); on intervals where u' < 0 the
    mirrored bounds (eqC), (eqD) apply.  The barrier constant is checked
    under both published denominators; the looser one is the binding
    check, the tighter one advisory.
    """
    profile, residual_sup = _as_function(u)
    nodes = profile.grid.nodes
    h = profile.grid.max_spacing
    tol = 10.0 * (h ** (1.0 / (1.0 + op.alpha)) + residual_sup)
    f_sup = float(np.max(np.abs(np.asarray(f(nodes), dtype=float))))

    q, _ = interior_quotients(profile)
    flux_int = np.abs(q) ** op.alpha * q
    flux = np.empty_like(nodes)
    flux[1:-1] = flux_int
    flux[0] = flux[-1] = 0.0  # endpoints never indexed by intervals

    fvals = np.asarray(f(nodes), dtype=float)
    cum_aA = np.concatenate(
        [[0.0], cumulative_trapezoid(epsilon_aA(fvals, op.a, op.A), nodes)])
    cum_Aa = np.concatenate(
        [[0.0], cumulative_trapezoid(epsilon_aA(fvals, op.A, op.a), nodes)])

    report = VerificationReport(
        tolerance_model="10*(h^(1/(1+alpha)) + residual_sup); "
                        "tight barrier reading advisory at the same tolerance")
    intervals = sign_intervals(profile, threshold)
    for itv in intervals:
        idx = np.arange(itv.i_lo, itv.i_hi + 1)
        if itv.sign is Sign.POSITIVE:
            _pairwise_flux_checks(report, (tol, tol), nodes, flux, idx, op,
                                  f_sup, cum_aA, increasing=True)
        else:
            _pairwise_flux_checks(report, (tol, tol), nodes, flux, idx, op,
                                  f_sup, cum_Aa, increasing=False)
    if not intervals:
        report.add("flux[vacuous]", float(nodes[0]), math.inf, tol)
    return report


def _chebyshev(lo, hi, count):
    """Chebyshev-spread points in [lo, hi], endpoints included."""
    if count == 1:
        return np.array([0.5 * (lo + hi)])
    t = np.cos(np.pi * np.arange(count) / (count - 1))[::-1]
    return lo + (hi - lo) * 0.5 * (1.0 + t)


def check_viscosity(u, op: OperatorSpec, f: SourceFunction,
                    slopes: int = 17, curvatures: int = 9,
                    tol: float | None = None) -> VerificationReport:
    """Touching-paraboloid sub/supersolution test at every interior node.

    A paraboloid anchored at (r_i, u_i) that stays below u on the 5-node
    stencil is a touching test function from below; its operator value
    must then not exceed f(r_i) (supersolution side).  Touching from
    above gives the mirrored subsolution bound.  Zero-slope paraboloids
    are excluded from the family (the viscosity definition does not test
    with vanishing gradients), so nodes are never tested at u' = 0.
    """
    if slopes < 3 or curvatures < 3:
        raise InvalidSpec("need at least 3 slopes and 3 curvatures")
    profile, residual_sup = _as_function(u)
    nodes = profile.grid.nodes
    vals = profile.values
    n = profile.grid.n
    h = profile.grid.max_spacing
    if tol is None:
        tol = 10.0 * h ** (1.0 / (1.0 + op.alpha)) + 10.0 * residual_sup

    lip = max(lipschitz_constant(profile), h)
    q_int, m_int = interior_quotients(profile)
    mmax = float(np.max(np.abs(m_int))) if len(m_int) else 1.0

    half = max(3, (slopes + 1) // 2)
    pos_slopes = _chebyshev(h, max(2.0 * lip, 2.0 * h), half)
    slope_family = np.concatenate([-pos_slopes[::-1], pos_slopes])
    half_c = max(2, (curvatures + 1) // 2)
    pos_curv = _chebyshev(0.0, max(4.0 * mmax, 1.0), half_c)
    curv_family = np.unique(np.concatenate([-pos_curv[::-1], pos_curv]))

    curv_offsets = np.array([-2.0, -1.0, -0.5, -0.25, 0.25, 0.5, 1.0, 2.0])

    fvals = np.asarray(f(nodes), dtype=float)
    scale_u = max(1.0, float(np.max(np.abs(vals))))
    eta = 1e-11 * scale_u

    # nodes where |u'| falls below the scheme's resolvable slope scale are
    # excluded: the viscosity definition does not test with vanishing
    # gradients, and discretely "vanishing" means below the accuracy of the
    # first difference quotient
    slope_floor = h ** (1.0 / (1.0 + op.alpha))

    worst_super = (math.inf, float(nodes[min(1, n)]))
    worst_sub = (math.inf, float(nodes[min(1, n)]))
    for i in range(1, n):
        if nodes[i] <= 0.0 or abs(q_int[i - 1]) < slope_floor:
            continue
        # the global families rarely graze the profile; add the node's own
        # quotients so near-tangent paraboloids are always in the family
        m_i = m_int[i - 1]
        local_curv = m_i + curv_offsets * max(abs(m_i), 1.0)
        slopes_i = np.append(slope_family, q_int[i - 1])
        curvs_i = np.concatenate([curv_family, local_curv, [m_i]])
        P, Q = np.meshgrid(slopes_i, curvs_i, indexing="ij")
        P = P.ravel()
        Q = Q.ravel()
        lo = max(0, i - 2)
        hi = min(n, i + 2)
        ds = nodes[lo:hi + 1] - nodes[i]
        du = vals[lo:hi + 1] - vals[i]
        w = P[:, None] * ds[None, :] + 0.5 * Q[:, None] * ds[None, :] ** 2
        below = np.all(w <= du[None, :] + eta, axis=1)
        above = np.all(w >= du[None, :] - eta, axis=1)
        # sub-cell crossing guard: a paraboloid can clear the nodes yet cross
        # the profile inside an adjacent cell.  Model u on the cell as the
        # quadratic with the node's second quotient; the gap to the paraboloid
        # is then gap(t) = t*gb - (dQ*hc^2/2)*t*(1-t) with dQ = Q - m_i, whose
        # extremum over the cell is explicit.
        dQ = Q - m_i
        for j in (i - 1, i + 1):
            dj = nodes[j] - nodes[i]
            hc2 = dj * dj
            gb = P * dj + 0.5 * Q * hc2 - (vals[j] - vals[i])
            denom = np.where(dQ != 0.0, dQ * hc2, 1.0)
            t_star = np.clip(0.5 - gb / denom, 0.0, 1.0)
            g_star = t_star * gb - 0.5 * dQ * hc2 * t_star * (1.0 - t_star)
            g_lo = np.minimum(np.minimum(0.0, gb), np.where(dQ > 0, g_star, 0.0))
            g_hi = np.maximum(np.maximum(0.0, gb), np.where(dQ < 0, g_star, 0.0))
            above &= g_lo >= -eta
            below &= g_hi <= eta
        if not (below.any() or above.any()):
            continue
        hvals = eval_radial_many(op, np.full_like(P, nodes[i]), P, Q)
        if below.any():
            # touching from below: H(paraboloid) must not exceed f
            m = float(np.min(fvals[i] - hvals[below]))
            if m < worst_super[0]:
                worst_super = (m, float(nodes[i]))
        if above.any():
            m = float(np.min(hvals[above] - fvals[i]))
            if m < worst_sub[0]:
                worst_sub = (m, float(nodes[i]))

    report = VerificationReport(
        tolerance_model="10*h^(1/(1+alpha)) + 10*residual_sup")
    report.add("viscosity[supersolution]", worst_super[1], worst_super[0], tol)
    report.add("viscosity[subsolution]", worst_sub[1], worst_sub[0], tol)
    return report


def _is_discrete_zero(nodes, q_int, i_star, h, lip) -> bool:
    """Whether the discrete derivative vanishes at node i_star.

    Absolute criterion |q| <= h*(1+Lip), with a scale-free fallback for
    degenerate profiles whose derivative vanishes only like a fractional
    power: the quotient at the candidate must be well below the nearby
    quotient magnitudes.
    """
    j = min(max(i_star - 1, 0), len(q_int) - 1)
    qs = abs(q_int[j])
    if qs <= h * (1.0 + lip):
        return True
    dist = np.abs(nodes[1:-1] - nodes[i_star])
    nearby = (dist >= 3.0 * h) & (dist <= 30.0 * h)
    if not nearby.any():
        return False
    return qs <= 0.3 * float(np.median(np.abs(q_int[nearby])))


@dataclass(frozen=True)
class HolderEstimate:
    r_star: float
    beta_fit: float
    C_fit: float
    fit_range: tuple[float, float]
    residual: float


def holder_exponent(u, r_star: float, decades: float = 1.0) -> HolderEstimate:
    """Fit |u'| ~ C |r - r_star|^beta around a zero of the derivative.

    Least squares on log|u'| vs log|r - r_star| over the annular window
    |r - r_star| in [3h, 3h*10^decades]; the side of r_star with more
    usable nodes wins (only the right side exists at the origin).
    """
    if decades < 1.0:
        raise InvalidSpec("need at least one decade of scales")
    profile, _ = _as_function(u)
    nodes = profile.grid.nodes
    h = profile.grid.max_spacing
    i_star = profile.grid.nearest_index(r_star)
    q_int, _ = interior_quotients(profile)
    lip = lipschitz_constant(profile)
    if not _is_discrete_zero(nodes, q_int, i_star, h, lip):
        raise NotAZero("discrete derivative does not vanish at r_star")
    r_star = float(nodes[i_star])

    dist = nodes[1:-1] - r_star
    lo, hi = 3.0 * h, 3.0 * h * 10.0 ** decades
    usable = (np.abs(dist) >= lo) & (np.abs(dist) <= hi) & (np.abs(q_int) > 0)

    best = None
    for side_mask in (usable & (dist > 0), usable & (dist < 0)):
        count = int(np.count_nonzero(side_mask))
        if best is None or count > best[0]:
            best = (count, side_mask)
    count, mask = best
    if count < 3:
        raise InsufficientData("fewer than 3 nodes in the fit window")

    x = np.log(np.abs(dist[mask]))
    y = np.log(np.abs(q_int[mask]))
    beta, logc = np.polyfit(x, y, 1)
    misfit = float(np.sqrt(np.mean((beta * x + logc - y) ** 2)))
    return HolderEstimate(r_star=r_star, beta_fit=float(beta),
                          C_fit=float(np.exp(logc)),
                          fit_range=(lo, hi), residual=misfit)


def c1_bound_check(u, op: OperatorSpec, f: SourceFunction,
                   r_star: float) -> VerificationReport:
    """Explicit growth bounds on |u'|^{1+alpha} away from a zero of u'.

    To the right of the zero the bound (1+alpha)|f|_inf/a * (s - r_star)
    is binding; to the left the barrier-derived constant is checked under
    both published denominators (advisory).
    """
    profile, residual_sup = _as_function(u)
    nodes = profile.grid.nodes
    h = profile.grid.max_spacing
    one_p_a = 1.0 + op.alpha
    tol = 10.0 * h ** (1.0 / one_p_a) + 10.0 * residual_sup

    i_star = profile.grid.nearest_index(r_star)
    q_int, _ = interior_quotients(profile)
    lip = lipschitz_constant(profile)
    if not _is_discrete_zero(nodes, q_int, i_star, h, lip):
        raise NotAZero("discrete derivative does not vanish at r_star")
    r_star = float(nodes[i_star])

    f_sup = float(np.max(np.abs(np.asarray(f(nodes), dtype=float))))
    gamma, _ = gamma_exponent(op)
    pw = np.abs(q_int) ** one_p_a
    dist = nodes[1:-1] - r_star

    report = VerificationReport(
        tolerance_model="10*h^(1/(1+alpha)) + 10*residual_sup; "
                        "left-bound readings advisory")

    right = dist > 0
    if right.any():
        bound = one_p_a * f_sup / op.a * dist[right] + tol
        m = bound - pw[right]
        w = int(np.argmin(m))
        report.add("right-bound", float(nodes[1:-1][right][w]), float(m[w]), tol)
    else:
        report.add("right-bound", r_star, math.inf, tol)

    left = (dist < 0) & (nodes[1:-1] > 0.5 * r_star)
    for name, denom in (("machin[display]", op.A),
                        ("machin[proof]",
                         op.A * (op.dim - 1) * one_p_a + op.a)):
        if left.any():
            K = 2.0 ** (gamma - 1.0) * (gamma + 1.0) * f_sup * one_p_a / denom
            m = K * (-dist[left]) + tol - pw[left]
            w = int(np.argmin(m))
            report.add(name, float(nodes[1:-1][left][w]), float(m[w]), tol)
        else:
            report.add(name, r_star, math.inf, tol)
    return report


def c1_modulus_report(u, alpha: float = 0.0, stride: int = 10,
                      scales: int = 3) -> VerificationReport:
    """Derivative-number diagnostics for C^1 behavior of the profile.

    Probes every ``stride``-th node: the spread of the four derivative
    numbers must shrink like the scheme's accuracy, the one-sided numbers
    must interlace (Lambda_g >= lambda_d and Lambda_d >= lambda_g up to
    tolerance), and wherever any number is small all four must be.
    """
    profile, _ = _as_function(u)
    grid = profile.grid
    nodes = grid.nodes
    h = grid.max_spacing
    beta = 1.0 / (1.0 + alpha)
    tol_spread = 20.0 * h ** beta
    tol_remark = 10.0 * h ** beta

    report = VerificationReport(
        tolerance_model="spread: 20*h^(1/(1+alpha)); "
                        "interlacing and zero-derivative: 10*h^(1/(1+alpha))")
    worst = {"c1-spread": (math.inf, nodes[0]),
             "interlace[Lg-ld]": (math.inf, nodes[0]),
             "interlace[Ld-lg]": (math.inf, nodes[0]),
             "zero-derivative": (math.inf, nodes[0])}
    for i in range(0, grid.n + 1, stride):
        window = 8.0 * grid.local_spacing(i)
        dn = derivative_numbers(profile, float(nodes[i]), window, scales)
        entries = {
            "c1-spread": -dn.spread,
            "interlace[Lg-ld]": dn.Lambda_g - dn.lambda_d,
            "interlace[Ld-lg]": dn.Lambda_d - dn.lambda_g,
        }
        four = (dn.lambda_g, dn.Lambda_g, dn.lambda_d, dn.Lambda_d)
        if min(abs(v) for v in four) < tol_remark:
            entries["zero-derivative"] = tol_remark - max(abs(v) for v in four)
        for key, margin in entries.items():
            if margin < worst[key][0]:
                worst[key] = (margin, float(nodes[i]))

    report.add("c1-spread", worst["c1-spread"][1],
               worst["c1-spread"][0], tol_spread)
    report.add("interlace[Lg-ld]", worst["interlace[Lg-ld]"][1],
               worst["interlace[Lg-ld]"][0], tol_remark)
    report.add("interlace[Ld-lg]", worst["interlace[Ld-lg]"][1],
               worst["interlace[Ld-lg]"][0], tol_remark)
    report.add("zero-derivative", worst["zero-derivative"][1],
               worst["zero-derivative"][0], tol_remark)
    return report
