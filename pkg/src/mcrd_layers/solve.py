"""Newton solver for the exact nonlocal scalar steady state.

The unknown is the u-field on the radial grid; the map is

    F(u)_i = eps^2 (Lap_r u)_i + f(u_i, S[u] - (eps/D) u_i),

with the flux-form radial Laplacian and the quadrature mean inside S. The
Jacobian is tridiagonal plus a rank-one nonlocal coupling, solved by two
banded solves and a Sherman-Morrison update per Newton step.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import NoConvergence, SingularJacobian
from .numerics import loglog_slope
from .profile import assemble

__all__ = [
    "apply_F",
    "DiscreteOperator",
    "build_operator",
    "jacobian_solve",
    "newton_solve",
    "SolveResult",
    "accuracy_report",
]


def _laplacian(grid):
    return grid.laplacian_tridiag()


def apply_F(u, grid, reaction, M, eps, D):
    """Residual of the discrete nonlocal equation at a grid field u."""
    lo, di, up = _laplacian(grid)
    lap = di * u
    lap[:-1] += up[:-1] * u[1:]
    lap[1:] += lo[1:] * u[:-1]
    S = M - (1.0 - eps / D) * grid.mean(u)
    v = S - (eps / D) * u
    return eps**2 * lap + reaction(u, v)


@dataclass
class DiscreteOperator:
    """Tridiagonal local part plus the rank-one nonlocal coupling."""

    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray
    c: np.ndarray        # column of the rank-one term
    w: np.ndarray        # row of the rank-one term (quadrature mean weights)

    def banded(self):
        n = len(self.diag)
        ab = np.zeros((3, n))
        ab[0, 1:] = self.upper[:-1]
        ab[1] = self.diag
        ab[2, :-1] = self.lower[1:]
        return ab

    def tridiagonal_solve(self, rhs):
        try:
            return sla.solve_banded((1, 1), self.banded(), rhs)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise SingularJacobian(str(exc)) from exc


def build_operator(u, grid, reaction, M, eps, D):
    """Jacobian of apply_F at u, split into tridiagonal + rank-one parts."""
    lo, di, up = _laplacian(grid)
    S = M - (1.0 - eps / D) * grid.mean(u)
    v = S - (eps / D) * u
    fu = reaction.eval_partial(1, 0, u, v)
    fv = reaction.eval_partial(0, 1, u, v)
    return DiscreteOperator(
        lower=eps**2 * lo,
        diag=eps**2 * di + fu - (eps / D) * fv,
        upper=eps**2 * up,
        c=-(1.0 - eps / D) * fv,
        w=grid.weights.copy(),
    )


def jacobian_solve(op, rhs):
    """Solve (T + c w^T) x = rhs via Sherman-Morrison on the banded T."""
    x1 = op.tridiagonal_solve(rhs)
    if not np.any(op.c):
        return x1
    x2 = op.tridiagonal_solve(op.c)
    denom = 1.0 + float(op.w @ x2)
    if abs(denom) < 1e-12:
        raise SingularJacobian(f"rank-one denominator {denom:.3e}")
    return x1 - x2 * (float(op.w @ x1) / denom)


@dataclass
class SolveResult:
    u: np.ndarray
    v: np.ndarray
    S_value: float
    iters: int
    history: list
    eps: float
    D: float
    grid: object


def _newton(u0, grid, reaction, M, eps, D, tol, max_iter, damping):
    u = np.array(u0, dtype=float)
    F = apply_F(u, grid, reaction, M, eps, D)
    history = [float(np.max(np.abs(F)))]
    # evaluating eps^2 * Lap carries ~eps_mach * eps^2/h^2 cancellation noise
    h_min = float(np.min(np.diff(grid.r)))
    floor = 64.0 * np.finfo(float).eps * eps**2 / h_min**2
    for it in range(max_iter):
        if history[-1] <= tol:
            return u, it, history
        op = build_operator(u, grid, reaction, M, eps, D)
        delta = jacobian_solve(op, -F)
        t = 1.0
        while True:
            un = u + t * delta
            Fn = apply_F(un, grid, reaction, M, eps, D)
            if np.max(np.abs(Fn)) < history[-1] or not damping:
                u, F = un, Fn
                history.append(float(np.max(np.abs(F))))
                break
            t *= 0.5
            if t < 2.0**-30:
                if history[-1] <= max(tol, floor):
                    return u, it + 1, history
                raise NoConvergence(
                    f"line search stalled at residual {history[-1]:.3e} (eps={eps})"
                )
    if history[-1] <= tol:
        return u, max_iter, history
    raise NoConvergence(
        f"Newton: {max_iter} iterations, residual {history[-1]:.3e} (eps={eps})"
    )


def newton_solve(initial, tol=1e-11, max_iter=25, damping=True, continuation=False):
    """Solve the nonlocal equation starting from an assembled approximation.

    With ``continuation`` enabled, a failed solve retries by walking eps down
    from 2*eps in at most 4 geometric steps on the same grid.
    """
    d = initial.exp_data
    reaction = d.eq.reaction
    grid, eps, D, M = initial.grid, initial.eps, initial.D, initial.M
    try:
        u, iters, history = _newton(
            initial.u, grid, reaction, M, eps, D, tol, max_iter, damping
        )
    except NoConvergence:
        if not continuation:
            raise
        ladder = np.geomspace(2 * eps, eps, 4)
        u = assemble(d, ladder[0], grid=grid).u
        iters, history = 0, []
        for e_i in ladder:
            u, its, hist = _newton(u, grid, reaction, M, e_i, D, tol, max_iter, damping)
            iters += its
            history += hist
    S = M - (1.0 - eps / D) * grid.mean(u)
    v = S - (eps / D) * u
    return SolveResult(u=u, v=v, S_value=S, iters=iters, history=history,
                       eps=eps, D=D, grid=grid)


def accuracy_report(exact_by_eps, approx_by_k_eps, k_list, eps_list):
    """Sup-norm distances between solved and approximate pairs, with slopes.

    ``exact_by_eps`` maps eps to a SolveResult; ``approx_by_k_eps`` maps
    (k, eps) to the matching assembled approximation on the same grid.
    """
    table = []
    for eps in sorted(eps_list, reverse=True):
        sol = exact_by_eps[eps]
        row = {"eps": eps}
        for k in k_list:
            ap = approx_by_k_eps[(k, eps)]
            row[f"du_k{k}"] = float(np.max(np.abs(sol.u - ap.u)))
            row[f"dv_k{k}"] = float(np.max(np.abs(sol.v - ap.v)))
        table.append(row)
    slopes = {}
    for k in k_list:
        slopes[f"u_k{k}"] = loglog_slope(
            [t["eps"] for t in table], [t[f"du_k{k}"] for t in table]
        )
        slopes[f"v_k{k}"] = loglog_slope(
            [t["eps"] for t in table], [t[f"dv_k{k}"] for t in table]
        )
    return {"table": table, "slopes": slopes}
