"""Monotone finite-difference solver for H(r, u'', u') = f(r) with Dirichlet data.

The |u'|^alpha degeneracy is handled by replacing |q|^alpha with
(q^2 + eps^2)^{alpha/2} and driving eps to zero geometrically; each
regularized problem is solved by damped semismooth Newton with a
pseudo-time relaxation fallback.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import _kernels
from .errors import (Diverged, GridMismatch, InvalidSpec, PreconditionViolated)
from .grid import (DiscreteRadialFunction, Domain, DomainKind, RadialGrid)
from .operators import OperatorSpec
from .report import VerificationReport

_EXPRESSION_CATALOGUE = ("const", "step", "sine", "power")


class SourceFunction:
    """Bounded continuous radial forcing term f(r).

    Three kinds: a constant, a tabulated profile (linear interpolation), or
    a named expression from a fixed catalogue (const, step, sine, power).
    """

    def __init__(self, kind: str, *, value: float = 0.0, table_r=None,
                 table_v=None, name: str = "", params: dict | None = None):
        self.kind = kind
        self.value = float(value)
        self.table_r = None if table_r is None else np.asarray(table_r, dtype=float)
        self.table_v = None if table_v is None else np.asarray(table_v, dtype=float)
        self.name = name
        self.params = dict(params or {})
        if kind == "tabulated":
            if self.table_r is None or self.table_v is None:
                raise InvalidSpec("tabulated source needs a table")
            if not np.all(np.diff(self.table_r) > 0):
                raise InvalidSpec("table radii must be increasing")
        elif kind == "expression":
            if self.name not in _EXPRESSION_CATALOGUE:
                raise InvalidSpec(f"unknown expression {self.name!r}")
        elif kind != "constant":
            raise InvalidSpec(f"unknown source kind {kind!r}")

    @classmethod
    def constant(cls, value: float) -> "SourceFunction":
        return cls("constant", value=value)

    @classmethod
    def tabulated(cls, r, v) -> "SourceFunction":
        return cls("tabulated", table_r=r, table_v=v)

    @classmethod
    def expression(cls, name: str, **params) -> "SourceFunction":
        return cls("expression", name=name, params=params)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "constant":
            return np.full_like(r, self.value)
        if self.kind == "tabulated":
            return np.interp(r, self.table_r, self.table_v)
        p = self.params
        if self.name == "const":
            return np.full_like(r, float(p.get("value", 0.0)))
        if self.name == "step":
            # continuous ramp from `left` to `right` across [r0-w, r0+w]
            left = float(p.get("left", 0.0))
            right = float(p.get("right", 1.0))
            r0 = float(p.get("r0", 0.5))
            w = float(p.get("width", 0.1))
            s = np.clip((r - (r0 - w)) / (2.0 * w), 0.0, 1.0)
            return left + (right - left) * s
        if self.name == "sine":
            amp = float(p.get("amplitude", 1.0))
            freq = float(p.get("frequency", 1.0))
            off = float(p.get("offset", 0.0))
            return off + amp * np.sin(freq * r)
        if self.name == "power":
            coef = float(p.get("coef", 1.0))
            expo = float(p.get("exponent", 1.0))
            return coef * r ** expo
        raise InvalidSpec(f"unknown expression {self.name!r}")

    def sup_norm(self, dom: Domain) -> float:
        if self.kind == "constant":
            return abs(self.value)
        r1 = dom.R1 if dom.kind is DomainKind.ANNULUS else 0.0
        probe = np.linspace(r1, dom.R, 4097)
        return float(np.max(np.abs(self(probe))))

    def to_json_dict(self) -> dict:
        if self.kind == "constant":
            return {"kind": "constant", "value": self.value}
        if self.kind == "tabulated":
            return {"kind": "tabulated", "r": self.table_r.tolist(),
                    "v": self.table_v.tolist()}
        return {"kind": "expression", "name": self.name, "params": self.params}

    @classmethod
    def from_json_dict(cls, doc: dict) -> "SourceFunction":
        kind = doc["kind"]
        if kind == "constant":
            return cls.constant(float(doc["value"]))
        if kind == "tabulated":
            return cls.tabulated(doc["r"], doc["v"])
        return cls.expression(doc["name"], **doc.get("params", {}))


@dataclass
class SolverParams:
    eps_start: float = 1e-2
    eps_end: float = 1e-8
    eps_factor: float = 0.1
    newton_tol: float | None = None     # None: 1e-10 * max(1, |f|_inf)
    newton_max_iter: int = 200
    damping_min: float = 2.0 ** -20
    pseudo_time_dt: float | None = None  # None: per-node relaxation step
    pseudo_time_max_steps: int = 100_000

    def __post_init__(self):
        if not 0 < self.eps_end <= self.eps_start:
            raise InvalidSpec("need 0 < eps_end <= eps_start")
        if not 0 < self.eps_factor < 1:
            raise InvalidSpec("eps_factor must lie in (0, 1)")

    def to_json_dict(self) -> dict:
        return {"eps_start": self.eps_start, "eps_end": self.eps_end,
                "eps_factor": self.eps_factor, "newton_tol": self.newton_tol,
                "newton_max_iter": self.newton_max_iter,
                "damping_min": self.damping_min,
                "pseudo_time_dt": self.pseudo_time_dt}

    @classmethod
    def from_json_dict(cls, doc: dict) -> "SolverParams":
        params = cls()
        for key in doc:
            if not hasattr(params, key):
                raise InvalidSpec(f"unknown solver parameter {key!r}")
            setattr(params, key, doc[key])
        return params


@dataclass
class Solution:
    u: DiscreteRadialFunction
    residual_sup: float
    eps_final: float
    iterations: int
    converged: bool
    eps_path: list = field(default_factory=list)

    def diagnostics_dict(self) -> dict:
        return {"residual_sup": self.residual_sup, "eps_final": self.eps_final,
                "iterations": self.iterations, "converged": self.converged}


def _origin_row_weights(nodes):
    """Second-order one-sided u'(r0) weights on the first three nodes."""
    h1 = nodes[1] - nodes[0]
    h2 = nodes[2] - nodes[0]
    c0 = -(h1 + h2) / (h1 * h2)
    c1 = h2 / (h1 * (h2 - h1))
    c2 = -h1 / (h2 * (h2 - h1))
    return c0, c1, c2


class _System:
    """Assembles the full residual and Jacobian including boundary rows."""

    def __init__(self, op: OperatorSpec, dom: Domain, fvals, grid: RadialGrid):
        self.op = op
        self.dom = dom
        self.fvals = fvals
        self.grid = grid
        self.nodes = grid.nodes
        self.n = grid.n
        self.is_ball = dom.kind is DomainKind.BALL
        if self.is_ball:
            self.origin_w = _origin_row_weights(self.nodes)
        self.coefs = op.bracket_coefficients()

    def residual(self, u, eps):
        res, _, _, _ = _kernels.assemble_system(
            self.nodes, u, self.fvals, self.op.alpha, eps, *self.coefs,
            self.op.dim, True)
        self._boundary_rows(u, res)
        return res

    def system(self, u, eps, freeze):
        res, lo, di, up = _kernels.assemble_system(
            self.nodes, u, self.fvals, self.op.alpha, eps, *self.coefs,
            self.op.dim, freeze)
        self._boundary_rows(u, res)
        return res, lo, di, up

    def _boundary_rows(self, u, res):
        n = self.n
        if self.is_ball:
            c0, c1, c2 = self.origin_w
            res[0] = c0 * u[0] + c1 * u[1] + c2 * u[2]
        else:
            res[0] = u[0] - self.dom.bc_inner
        res[n] = u[n] - self.dom.bc_outer

    def jacobian(self, lo, di, up):
        n = self.n
        rows = [np.arange(1, n), np.arange(1, n), np.arange(1, n)]
        cols = [np.arange(0, n - 1), np.arange(1, n), np.arange(2, n + 1)]
        data = [lo[1:-1], di[1:-1], up[1:-1]]
        if self.is_ball:
            c0, c1, c2 = self.origin_w
            rows.append(np.array([0, 0, 0]))
            cols.append(np.array([0, 1, 2]))
            data.append(np.array([c0, c1, c2]))
        else:
            rows.append(np.array([0]))
            cols.append(np.array([0]))
            data.append(np.array([1.0]))
        rows.append(np.array([n]))
        cols.append(np.array([n]))
        data.append(np.array([1.0]))
        return sp.csc_matrix(
            (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
            shape=(n + 1, n + 1))

    def roundoff_floor(self, u, eps):
        """Attainable residual floor from cancellation in the assembly.

        The difference quotients divide O(|u|) cancellations by h^2, so on
        fine grids the discrete residual cannot be driven below a multiple
        of machine epsilon times the assembled term magnitudes.
        """
        r = self.nodes
        au = np.abs(u)
        hm = r[1:-1] - r[:-2]
        hp = r[2:] - r[1:-1]
        denom = hp * hm * (hp + hm)
        m_abs = 2.0 * (hm * au[2:] + (hp + hm) * au[1:-1] + hp * au[:-2]) / denom
        q_abs = (hm * hm * au[2:] + abs(hp * hp - hm * hm) * au[1:-1]
                 + hp * hp * au[:-2]) / denom
        q = (hm * hm * u[2:] + (hp * hp - hm * hm) * u[1:-1]
             - hp * hp * u[:-2]) / denom
        factor = (q * q + eps * eps) ** (0.5 * self.op.alpha)
        cmp_, cmm, ctp, ctm = self.coefs
        coef_r = (self.op.dim - 1) / r[1:-1]
        amp = factor * (max(cmp_, cmm) * m_abs
                        + coef_r * max(ctp, ctm) * q_abs) + np.abs(self.fvals[1:-1])
        return 64.0 * np.finfo(float).eps * float(np.max(amp))

    def monotone_structure_ok(self, lo, di, up, rel_tol=1e-10):
        """Nonnegative off-diagonals and weak diagonal dominance of -J rows."""
        scale = np.maximum.reduce([np.abs(lo[1:-1]), np.abs(di[1:-1]),
                                   np.abs(up[1:-1]), np.ones(self.n - 1)])
        tol = rel_tol * scale
        return bool(np.all(lo[1:-1] >= -tol) and np.all(up[1:-1] >= -tol)
                    and np.all(lo[1:-1] + di[1:-1] + up[1:-1] <= tol))


def discretize_residual(op: OperatorSpec, f: SourceFunction,
                        u: DiscreteRadialFunction, eps: float,
                        dom: Domain | None = None) -> np.ndarray:
    """Full residual vector H_eps - f; boundary rows when a domain is given.

    Without a domain the first row still carries the origin symmetry closure
    when the grid starts at r = 0, and the last row is zero.
    """
    nodes = u.grid.nodes
    fvals = np.asarray(f(nodes), dtype=float)
    coefs = op.bracket_coefficients()
    res, _, _, _ = _kernels.assemble_system(
        nodes, u.values, fvals, op.alpha, eps, *coefs, op.dim, True)
    n = u.grid.n
    if dom is not None:
        if not u.grid.spans(dom):
            raise GridMismatch("grid does not span the domain")
        if dom.kind is DomainKind.BALL:
            c0, c1, c2 = _origin_row_weights(nodes)
            res[0] = c0 * u.values[0] + c1 * u.values[1] + c2 * u.values[2]
        else:
            res[0] = u.values[0] - dom.bc_inner
        res[n] = u.values[n] - dom.bc_outer
    elif nodes[0] == 0.0:
        c0, c1, c2 = _origin_row_weights(nodes)
        res[0] = c0 * u.values[0] + c1 * u.values[1] + c2 * u.values[2]
    return res


def _initial_guess(op, dom, grid, fvals):
    """Boundary interpolant plus a power-profile bump scaled from mean f."""
    nodes = grid.nodes
    fbar = float(np.mean(fvals))
    if dom.kind is DomainKind.BALL:
        base = np.full_like(nodes, dom.bc_outer)
    else:
        base = np.interp(nodes, [nodes[0], nodes[-1]],
                         [dom.bc_inner, dom.bc_outer])
    if fbar == 0.0:
        return base
    alpha = op.alpha
    c_ref = 0.5 * (op.a + op.A) * op.dim
    amp = (abs(fbar) / c_ref) ** (1.0 / (1.0 + alpha))
    expo = (2.0 + alpha) / (1.0 + alpha)
    w = math.copysign(1.0, fbar) * amp / expo * nodes ** expo
    w_lin = np.interp(nodes, [nodes[0], nodes[-1]], [w[0], w[-1]])
    return base + (w - w_lin)


def solve_dirichlet(op: OperatorSpec, dom: Domain, f: SourceFunction,
                    grid: RadialGrid, params: SolverParams | None = None,
                    initial_guess: np.ndarray | None = None) -> Solution:
    """Continuation in eps, damped Newton per stage, pseudo-time fallback."""
    if params is None:
        params = SolverParams()
    if not grid.spans(dom):
        raise GridMismatch("grid does not span the domain")
    nodes = grid.nodes
    fvals = np.asarray(f(nodes), dtype=float)
    scale = max(1.0, f.sup_norm(dom))
    tol = params.newton_tol if params.newton_tol is not None else 1e-10 * scale

    system = _System(op, dom, fvals, grid)
    if initial_guess is not None:
        u = np.array(initial_guess, dtype=float)
        if u.shape != nodes.shape:
            raise GridMismatch("initial guess has wrong length")
    else:
        u = _initial_guess(op, dom, grid, fvals)

    eps_list = [params.eps_start]
    while eps_list[-1] > params.eps_end * (1 + 1e-12):
        eps_list.append(max(eps_list[-1] * params.eps_factor, params.eps_end))

    iterations = 0
    pseudo_budget = params.pseudo_time_max_steps
    eps_path = []
    u_prev_stage = u.copy()

    for eps in eps_list:
        for _ in range(params.newton_max_iter):
            res, lo, di, up = system.system(u, eps, freeze=False)
            rn = float(np.max(np.abs(res)))
            if rn <= max(tol, system.roundoff_floor(u, eps)):
                break
            delta = None
            try:
                delta = spla.spsolve(system.jacobian(lo, di, up), -res)
            except Exception:
                delta = None
            if delta is None or not np.all(np.isfinite(delta)):
                _, lo_f, di_f, up_f = system.system(u, eps, freeze=True)
                delta = spla.spsolve(system.jacobian(lo_f, di_f, up_f), -res)
            iterations += 1
            # damp on the 2-norm: the sup-norm is dominated by single rows
            # near the origin and is too kinky for an Armijo test
            rn2 = float(np.linalg.norm(res))
            lam = 1.0
            accepted = False
            while lam >= params.damping_min:
                trial = u + lam * delta
                trial_rn2 = float(np.linalg.norm(system.residual(trial, eps)))
                if trial_rn2 <= (1.0 - 1e-4 * lam) * rn2:
                    u = trial
                    accepted = True
                    break
                lam *= 0.5
            if not accepted:
                u, used = _pseudo_time(system, u, eps, rn, tol, params,
                                       min(pseudo_budget, 20 * grid.n))
                pseudo_budget -= used
                if pseudo_budget <= 0:
                    break
        res = system.residual(u, eps)
        stage_res = float(np.max(np.abs(res)))
        eps_path.append({"eps": eps, "residual_sup": stage_res,
                         "delta_from_prev": float(np.max(np.abs(u - u_prev_stage)))})
        u_prev_stage = u.copy()

    eps_final = eps_list[-1]
    res, lo_f, di_f, up_f = system.system(u, eps_final, freeze=True)
    residual_sup = float(np.max(np.abs(res)))
    converged = residual_sup <= max(tol, system.roundoff_floor(u, eps_final))
    if not converged:
        raise Diverged(
            f"residual {residual_sup:.3e} above tolerance {tol:.3e} at eps={eps_final:.1e}")
    if not system.monotone_structure_ok(lo_f, di_f, up_f):
        raise RuntimeError("final linearization lost its monotone structure")

    profile = DiscreteRadialFunction(grid, u)
    return Solution(profile, residual_sup, eps_final, iterations, converged,
                    eps_path)


def _pseudo_time(system, u, eps, rn_enter, tol, params, budget):
    """Relaxation steps until the residual halves or the budget runs out."""
    used = 0
    u = u.copy()
    while used < budget:
        res, _, di, _ = system.system(u, eps, freeze=True)
        rn = float(np.max(np.abs(res)))
        if rn <= max(0.5 * rn_enter, tol):
            break
        used += 1
        if params.pseudo_time_dt is not None:
            u[1:-1] += params.pseudo_time_dt * res[1:-1]
        else:
            # per-node relaxation: explicit Euler at the local stability limit
            denom = np.maximum(np.abs(di[1:-1]), 1e-300)
            u[1:-1] += 0.9 * res[1:-1] / denom
        # boundary rows are linear: enforce them exactly
        if system.is_ball:
            c0, c1, c2 = system.origin_w
            u[0] = -(c1 * u[1] + c2 * u[2]) / c0
        else:
            u[0] = system.dom.bc_inner
        u[-1] = system.dom.bc_outer
    return u, max(used, 1)


def _as_profile(obj):
    if isinstance(obj, Solution):
        return obj.u, obj.residual_sup
    if isinstance(obj, DiscreteRadialFunction):
        return obj, 0.0
    raise InvalidSpec("expected a Solution or DiscreteRadialFunction")


def comparison_oracle(u, v, op: OperatorSpec, fu: SourceFunction,
                      fv: SourceFunction) -> VerificationReport:
    """Check u <= v given fu >= fv and ordered boundary data.

    Larger forcing pushes solutions down for this sign convention, so the
    solution with the larger source must lie below.
    """
    pu, res_u = _as_profile(u)
    pv, res_v = _as_profile(v)
    if not pu.same_grid(pv):
        raise GridMismatch("comparison requires a common grid")
    nodes = pu.grid.nodes
    fuv = np.asarray(fu(nodes), dtype=float)
    fvv = np.asarray(fv(nodes), dtype=float)
    fscale = max(1.0, float(np.max(np.abs(fuv))), float(np.max(np.abs(fvv))))
    if np.any(fuv < fvv - 1e-12 * fscale):
        raise PreconditionViolated("need fu >= fv pointwise")
    strict_somewhere = bool(np.any(fuv > fvv + 1e-12 * fscale))
    bscale = max(1.0, float(np.max(np.abs(pu.values))), float(np.max(np.abs(pv.values))))
    for j in (0, -1):
        if pu.values[j] > pv.values[j] + 1e-12 * bscale:
            raise PreconditionViolated("boundary data must be ordered u <= v")

    tol = 10.0 * max(res_u, res_v)
    gap = pv.values[1:-1] - pu.values[1:-1]
    worst = int(np.argmin(gap))
    report = VerificationReport(
        tolerance_model="10 * max residual of the compared solutions")
    name = "comparison" if strict_somewhere else "comparison[non-strict]"
    report.add(name, nodes[1 + worst], float(gap[worst]), tol)
    return report
