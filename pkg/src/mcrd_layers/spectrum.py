"""Spectral objects of the linearization about the approximate solution.

Two operators share the frozen coefficients f_u, f_v evaluated at (u_k, v_k):

* the local symmetric operator  L phi = eps^2 Lap phi + (f_u - (eps/D) f_v) phi,
  whose principal pair (mu0, phi0) concentrates on the layer;
* the nonlocal operator adding  -(1-eps/D) f_v * mean(phi),
  a rank-one perturbation whose critical eigenvalue lambda0 is the unique
  root of the scalar secular function

      sigma(lambda) = 1 - (1-eps/D) * mean((L - lambda)^{-1} f_v)

  in the window around eps*Lambda*; it scales like eps * Lambda* with the
  closed-form limit constant Lambda*.

The adjoint problem transposes the rank-one term (constant column, f_v-
weighted mean row); its secular root equals lambda0 exactly at the matrix
level and is solved independently as a cross-check.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import IterationStall, MultipleRoots, NoRootInWindow
from .geometry import ball_volume


__all__ = [
    "SpectralReport",
    "local_principal_eigenpair",
    "secular_root",
    "gamma_fixed_point",
    "limit_constants",
    "adjoint_check",
    "eigenfunction_decay_diagnostic",
    "spectral_sweep",
    "richardson_ratio",
]


def _local_tridiag(sol, reaction):
    lo, di, up = sol.grid.laplacian_tridiag()
    fu = reaction.eval_partial(1, 0, sol.u, sol.v)
    fv = reaction.eval_partial(0, 1, sol.u, sol.v)
    eps = sol.eps
    return eps**2 * lo, eps**2 * di + fu - (eps / sol.D) * fv, eps**2 * up, fv


def _sturm_count_below(d, e, x):
    """Number of eigenvalues of the symmetric tridiagonal (d, e) below x."""
    count = 0
    q = d[0] - x
    tiny = np.finfo(float).tiny
    for i in range(len(d) - 1):
        if q < 0:
            count += 1
        if q == 0.0:
            q = tiny
        q = (d[i + 1] - x) - e[i] * e[i] / q
    if q < 0:
        count += 1
    return count


def local_principal_eigenpair(sol, reaction=None):
    """Largest two eigenvalues of the local operator and the principal mode.

    Returns (mu0, phi0, next_eig_bound) with phi0 positive and normalized to
    unit L^2(Omega) norm. ``next_eig_bound`` is a Sturm-count-certified upper
    bound on the second eigenvalue mu1.
    """
    reaction = reaction or sol.exp_data.eq.reaction
    lo, di, up, _ = _local_tridiag(sol, reaction)
    masses = sol.grid.cell_masses()
    # similarity transform making the operator symmetric tridiagonal
    e_sym = up[:-1] * np.sqrt(masses[:-1] / masses[1:])
    n = len(di)
    try:
        vals, vecs = sla.eigh_tridiagonal(di, e_sym, select="i", select_range=(n - 2, n - 1))
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise IterationStall(f"tridiagonal eigensolve failed: {exc}") from exc
    mu1, mu0 = float(vals[0]), float(vals[1])
    phi = vecs[:, 1] / np.sqrt(masses)
    if phi[np.argmax(np.abs(phi))] < 0:
        phi = -phi
    phi = phi / np.sqrt(ball_volume(sol.N) * float(sol.grid.weights @ phi**2))
    # certify: exactly one eigenvalue above the reported bound on mu1
    bound = mu1 + max(1e-12, 1e-9 * abs(mu1))
    for _ in range(60):
        if _sturm_count_below(di, e_sym, bound) == n - 1:
            break
        bound = bound + 0.5 * (mu0 - bound)
    else:
        raise IterationStall("could not certify the second-eigenvalue bound")
    return mu0, phi, float(bound)


@dataclass
class LimitConstants:
    E: float
    G: float
    lambda_star: float
    Lambda_star: float


def limit_constants(eq, M, N, D, profile):
    """Closed-form sharp-interface constants E, G, lambda*, Lambda*.

    lambda* combines the outer-branch stability margins with the real part
    of the quadratic root E + sqrt(E^2 - 4G); the spectral-gap constant of
    the local operator has no closed form and is reported by sweeps instead.
    """
    from .geometry import interface_radius

    R = interface_radius(eq, M, N)
    RN = R**N
    fu_m = eq.fu_at(eq.h_plus_star)   # value on the inner branch set (h^+)
    fu_p = eq.fu_at(eq.h_minus_star)  # value on the outer branch set (h^-)
    fv_m = eq.fv_at(eq.h_plus_star)
    fv_p = eq.fv_at(eq.h_minus_star)
    E = fu_m + fu_p - RN * fv_m - (1.0 - RN) * fv_p
    G = fu_p * fu_m - RN * fu_p * fv_m - (1.0 - RN) * fu_m * fv_p
    root = np.sqrt(complex(E * E - 4.0 * G))
    lam_formula = -float(np.real(E + root)) / 4.0
    mu_hat = 0.5 * min(-fu_m, -fu_p)
    lambda_star = min(mu_hat, lam_formula)
    Lambda_star = (
        -N * R ** (N - 1) * (eq.h_plus_star - eq.h_minus_star) / profile.m
        * (fu_p * fu_m / G) * eq.J_prime_star
    )
    return LimitConstants(float(E), float(G), float(lambda_star), float(Lambda_star))


def _secular_sigma(lo, di, up, rhs_scale, rhs, weights, lam):
    n = len(di)
    ab = np.zeros((3, n))
    ab[0, 1:] = up[:-1]
    ab[1] = di - lam
    ab[2, :-1] = lo[1:]
    x = sla.solve_banded((1, 1), ab, rhs)
    return 1.0 - rhs_scale * float(weights @ x)


def _bracket_roots(fun, lo_end, hi_end, n_scan):
    xs = np.linspace(lo_end, hi_end, n_scan)
    vals = np.array([fun(x) for x in xs])
    idx = np.nonzero(vals[:-1] * vals[1:] < 0)[0]
    return [(xs[i], xs[i + 1]) for i in idx]


def secular_root(sol, reaction=None, mu0=None, phi0=None, dense_check=None):
    """Critical eigenvalue of the nonlocal operator via the secular equation.

    Scans sigma(lambda) over the window around eps*Lambda* (excluding small
    neighborhoods of the local poles mu0, mu1), solves the unique sign change
    by safeguarded bisection/secant, and optionally cross-validates against a
    dense eigensolve of the rank-one-perturbed matrix (automatic for grids
    with n <= 400).
    """
    d = sol.exp_data
    reaction = reaction or d.eq.reaction
    eps, D = sol.eps, sol.D
    if mu0 is None:
        mu0, phi0, _ = local_principal_eigenpair(sol, reaction)
    lo, di, up, fv = _local_tridiag(sol, reaction)
    if abs(1.0 - eps / D) < 1e-15:
        return float(mu0)  # nonlocal coupling vanishes; operator is local

    masses = sol.grid.cell_masses()
    e_sym = up[:-1] * np.sqrt(masses[:-1] / masses[1:])
    n = len(di)
    vals = sla.eigvalsh_tridiagonal(di, e_sym, select="i", select_range=(n - 2, n - 1))
    mu1 = float(vals[0])

    consts = limit_constants(d.eq, d.M, d.N, D, d.profile)
    scale = eps * abs(consts.Lambda_star)
    weights = sol.grid.weights
    q = 1.0 - eps / D

    def sigma(lam):
        return _secular_sigma(lo, di, up, q, fv, weights, lam)

    gap = max(1e-12, 2e-2 * scale)
    half = 4.0 * scale
    brackets = []
    for _ in range(6):
        lo_end = max(-half, mu1 + gap, -consts.lambda_star + gap)
        segs = []
        if lo_end < mu0 - gap:
            segs.append((lo_end, mu0 - gap))
        if mu0 + gap < half:
            segs.append((mu0 + gap, half))
        brackets = []
        for a, b in segs:
            brackets += _bracket_roots(sigma, a, b, 160)
        if brackets:
            break
        half *= 2.0
    if not brackets:
        raise NoRootInWindow(f"no secular sign change down to lambda_* = {consts.lambda_star}")
    if len(brackets) > 1:
        raise MultipleRoots(f"{len(brackets)} secular roots in the window")
    from scipy.optimize import brentq

    lam0 = float(brentq(sigma, brackets[0][0], brackets[0][1], xtol=1e-14, rtol=8.9e-16))

    if dense_check is None:
        dense_check = n <= 400
    if dense_check:
        if n > 400:
            raise ValueError("dense cross-check requested on a grid with n > 400")
        A = np.diag(di) + np.diag(up[:-1], 1) + np.diag(lo[1:], -1) - np.outer(q * fv, weights)
        eigs = np.linalg.eigvals(A)
        inside = eigs[eigs.real > -consts.lambda_star + gap]
        if len(inside) != 1:
            raise MultipleRoots(
                f"dense oracle finds {len(inside)} eigenvalues in the window"
            )
        if abs(inside[0].imag) > 1e-8 or abs(inside[0].real - lam0) > 1e-8:
            raise MultipleRoots(
                f"dense oracle eigenvalue {inside[0]} disagrees with secular root {lam0}"
            )
    return lam0


def gamma_fixed_point(sol, reaction=None, beta0=None, max_iter=80, tol=1e-13):
    """Critical eigenvalue by the contraction iteration on beta = lambda/eps.

    Cross-check mode for :func:`secular_root`. Decomposing the eigenvector
    as a*phi0 + eta with eta orthogonal to phi0 in the cell-mass inner
    product (where the local operator is exactly self-adjoint) gives

        beta = Gamma(beta) = mu0/eps - (1/eps) * q * mean(phi0) *
               <f_v, phi0>_m / <phi0, phi0>_m / (1 - q * mean(psi_{eps*beta}))

    with psi_lambda the projected resolvent applied to f_v; the fixed point
    coincides with the rank-one eigenvalue at the matrix level.
    """
    d = sol.exp_data
    reaction = reaction or d.eq.reaction
    eps, D = sol.eps, sol.D
    mu0, phi0, _ = local_principal_eigenpair(sol, reaction)
    q = 1.0 - eps / D
    if abs(q) < 1e-15:
        return float(mu0)
    lo, di, up, fv = _local_tridiag(sol, reaction)
    W = sol.grid.weights
    m = sol.grid.cell_masses()
    phi_m2 = float(m @ phi0**2)
    pair = float(m @ (fv * phi0)) / phi_m2
    p_fv = fv - (float(m @ (fv * phi0)) / phi_m2) * phi0  # P_m f_v

    def psi_mean(lam):
        n = len(di)
        ab = np.zeros((3, n))
        ab[0, 1:] = up[:-1]
        ab[1] = di - lam
        ab[2, :-1] = lo[1:]
        psi = sla.solve_banded((1, 1), ab, p_fv)
        psi = psi - (float(m @ (psi * phi0)) / phi_m2) * phi0
        return float(W @ psi)

    num = q * float(W @ phi0) * pair
    if beta0 is None:
        beta0 = limit_constants(d.eq, d.M, d.N, D, d.profile).Lambda_star
    beta = float(beta0)
    for _ in range(max_iter):
        beta_new = mu0 / eps - num / (eps * (1.0 - q * psi_mean(eps * beta)))
        if abs(beta_new - beta) <= tol * (1.0 + abs(beta_new)):
            return eps * beta_new
        beta = beta_new
    raise NoRootInWindow(f"fixed-point iteration did not contract (beta={beta})")


def adjoint_check(sol, reaction=None, lambda0=None):
    """Solve the transposed discrete secular problem and pair eigenfunctions.

    Returns {"lambda0_adj", "pairing", "Phi0", "Phi0_hat"}; the pairing is
    reported for unit-norm factors and Phi0_hat is rescaled afterwards so
    <Phi0_hat, Phi0> = 1.
    """
    d = sol.exp_data
    reaction = reaction or d.eq.reaction
    eps, D = sol.eps, sol.D
    mu0, phi0, _ = local_principal_eigenpair(sol, reaction)
    if lambda0 is None:
        lambda0 = secular_root(sol, reaction, mu0, phi0)
    lo, di, up, fv = _local_tridiag(sol, reaction)
    W = sol.grid.weights
    q = 1.0 - eps / D
    if abs(q) < 1e-15:
        return {"lambda0_adj": float(mu0), "pairing": 1.0, "Phi0": phi0, "Phi0_hat": phi0}

    # plain transpose of the discrete operator: identical spectrum, and the
    # rank-one term becomes (constant-column) x (f_v-weighted mean row)
    lo_t = np.zeros_like(lo)
    up_t = np.zeros_like(up)
    lo_t[1:] = up[:-1]
    up_t[:-1] = lo[1:]

    def sigma_hat(lam):
        return _secular_sigma(lo_t, di, up_t, q, W, fv, lam)

    # expand the bracket around lambda0 but never across the mu0 pole
    delta = max(1e-10, 1e-3 * abs(lambda0 - mu0))
    delta_max = max(0.9 * abs(lambda0 - mu0), 10 * delta)
    a, b = lambda0 - delta, lambda0 + delta
    for _ in range(40):
        if sigma_hat(a) * sigma_hat(b) < 0:
            break
        delta = min(2.0 * delta, delta_max)
        a, b = lambda0 - delta, lambda0 + delta
    else:
        raise NoRootInWindow("adjoint secular root not bracketed near lambda0")
    from scipy.optimize import brentq

    lam_adj = float(brentq(sigma_hat, a, b, xtol=1e-14, rtol=8.9e-16))

    def resolvent(lo_, di_, up_, rhs, lam):
        n = len(di_)
        ab = np.zeros((3, n))
        ab[0, 1:] = up_[:-1]
        ab[1] = di_ - lam
        ab[2, :-1] = lo_[1:]
        return sla.solve_banded((1, 1), ab, rhs)

    vol = ball_volume(sol.N)
    Phi0 = resolvent(lo, di, up, fv, lambda0)
    Phi0 = Phi0 / np.sqrt(vol * float(W @ Phi0**2))
    if Phi0[np.argmax(np.abs(Phi0))] < 0:
        Phi0 = -Phi0
    # the transpose eigenvector is the W-density of the adjoint eigenfunction;
    # recover field values on positive-weight nodes (r = 0 carries no measure)
    psi = resolvent(lo_t, di, up_t, W, lam_adj)
    Phi0_hat = np.zeros_like(psi)
    posw = W > 0
    Phi0_hat[posw] = psi[posw] / W[posw]
    if not posw[0]:
        Phi0_hat[0] = Phi0_hat[1]
    Phi0_hat = Phi0_hat / np.sqrt(vol * float(W @ Phi0_hat**2))
    if Phi0_hat[np.argmax(np.abs(Phi0_hat))] < 0:
        Phi0_hat = -Phi0_hat
    pairing = vol * float(W @ (Phi0_hat * Phi0))
    return {
        "lambda0_adj": lam_adj,
        "pairing": pairing,
        "Phi0": Phi0,
        "Phi0_hat": Phi0_hat / pairing,
    }


def eigenfunction_decay_diagnostic(phi0, sol, K=8.0, fit_span=10.0):
    """Exponential decay rate of phi0 away from the layer, plus mass splits.

    Fits log|phi0| against the stretched distance on both plateau sides and
    reports the per-unit-z rate (expected >= 0.8*d0) and the fraction of the
    L^2 mass outside |r - R*| > 10 eps.
    """
    d = sol.exp_data
    r = sol.grid.r
    eps = sol.eps
    z = (r - d.R_star) / eps
    rates = {}
    fl = np.abs(phi0) > 1e-13 * np.max(np.abs(phi0))
    for name, mask in (
        ("right", (z >= K) & (z <= K + fit_span) & fl),
        ("left", (z <= -K) & (z >= -K - fit_span) & fl),
    ):
        if mask.sum() >= 4:
            A = np.vstack([np.abs(z[mask]), np.ones(mask.sum())]).T
            slope, _ = np.linalg.lstsq(A, np.log(np.abs(phi0[mask])), rcond=None)[0]
            rates[name] = -float(slope)
        else:
            rates[name] = float("nan")
    far = np.abs(r - d.R_star) > 10 * eps
    vol = ball_volume(sol.N)
    total = vol * float(sol.grid.weights @ phi0**2)
    far_mass = vol * float(sol.grid.weights[far] @ phi0[far] ** 2)
    l1 = vol * float(sol.grid.weights @ np.abs(phi0))
    return {"rates": rates, "far_mass_fraction": far_mass / total, "l1_norm": l1}


@dataclass
class SpectralReport:
    eps: float
    D: float
    mu0: float
    lambda0: float
    lambda0_adjoint: float
    next_eig_bound: float
    E: float
    G: float
    lambda_star: float
    Lambda_star: float
    ratio: float               # lambda0 / eps
    pairing: float
    l1_norm: float
    decay: dict
    phi0: np.ndarray


def richardson_ratio(reports):
    """Richardson extrapolation of lambda0/eps from the two smallest eps."""
    rs = sorted(reports, key=lambda t: t.eps)
    e2, e1 = rs[0].eps, rs[1].eps
    return (e1 * rs[0].ratio - e2 * rs[1].ratio) / (e1 - e2)


def spectral_sweep(exp_data, eps_list, nodes_per_eps=24, resolution_scaling=True):
    """Full spectral analysis per eps; returns a list of SpectralReport.

    With ``resolution_scaling`` the layer resolution grows like 1/eps along
    the sweep so the eigenvalue discretization error scales like eps^2;
    otherwise the ratio mu0/eps bottoms out at a fixed mesh floor instead of
    decreasing.
    """
    from .geometry import RadialGrid
    from .profile import assemble

    reaction = exp_data.eq.reaction
    eps_max = max(eps_list)
    out = []
    for eps in sorted(eps_list, reverse=True):
        rho = nodes_per_eps * (eps_max / eps if resolution_scaling else 1.0)
        grid = RadialGrid.build(
            exp_data.N, exp_data.R_star, exp_data.r0, eps,
            nodes_per_eps=rho, fine_cap=np.inf,
        )
        sol = assemble(exp_data, eps, grid=grid)
        mu0, phi0, bound = local_principal_eigenpair(sol, reaction)
        lam0 = secular_root(sol, reaction, mu0, phi0)  # dense-checked if n <= 400
        adj = adjoint_check(sol, reaction, lam0)
        diag = eigenfunction_decay_diagnostic(phi0, sol)
        consts = limit_constants(exp_data.eq, exp_data.M, exp_data.N, exp_data.D,
                                 exp_data.profile)
        out.append(
            SpectralReport(
                eps=eps, D=exp_data.D, mu0=mu0, lambda0=lam0,
                lambda0_adjoint=adj["lambda0_adj"], next_eig_bound=bound,
                E=consts.E, G=consts.G, lambda_star=consts.lambda_star,
                Lambda_star=consts.Lambda_star, ratio=lam0 / eps,
                pairing=adj["pairing"], l1_norm=diag["l1_norm"], decay=diag,
                phi0=phi0,
            )
        )
    return out
