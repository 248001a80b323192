"""Heteroclinic front profiles Q(z; s) connecting the stable branches.

For a frozen second component s inside the bistable window, the profile and
speed (Q, c) solve

    Q_zz - c Q_z + f(Q, s) = 0,   Q(0) = h^0(s),   Q(-inf) = h^+(s),
                                  Q(+inf) = h^-(s),

with Q strictly decreasing; the speed obeys c(s) = -J(s)/m(s) where
m(s) = integral of Q_z^2. The solver is a collocation Newton iteration on a
truncated uniform z-grid: fourth-order central differences inside, linearized
asymptotic (Robin) closures at the ends with speed-dependent decay rates, and
the phase condition appended as the closing equation for the speed unknown.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import DomainTooSmall, NoConvergence
from .numerics import (
    fd_first_derivative,
    fd_second_derivative,
    simpson_integral,
)
from .reaction import balance_integral, equilibrium_roots

__all__ = ["WaveProfile", "solve_profile", "wave_mass", "check_speed_identity"]


@dataclass
class WaveProfile:
    s: float
    z: np.ndarray           # uniform grid on [-Z, Z], n_z intervals, n_z+1 points
    Q: np.ndarray
    Qz: np.ndarray
    Qzz: np.ndarray
    c: float
    m: float
    tail_rates: tuple        # (kappa_minus, kappa_plus) decay exponents at -/+ infinity
    d0: float                # 0.9 * min(tail_rates)
    h_minus: float
    h_zero: float
    h_plus: float
    m_tail_bound: float      # neglected tail contribution to m, ~ exp(-2 d0 Z)
    newton_iters: int = 0

    @property
    def Z(self):
        return float(self.z[-1])

    @property
    def h_z(self):
        return float(self.z[1] - self.z[0])

    def reflected(self):
        """The mirror profile z -> -z, rising from h^- to h^+ (speed flips)."""
        return WaveProfile(
            s=self.s,
            z=self.z.copy(),
            Q=self.Q[::-1].copy(),
            Qz=-self.Qz[::-1].copy(),
            Qzz=self.Qzz[::-1].copy(),
            c=-self.c,
            m=self.m,
            tail_rates=(self.tail_rates[1], self.tail_rates[0]),
            d0=self.d0,
            h_minus=self.h_minus,
            h_zero=self.h_zero,
            h_plus=self.h_plus,
            m_tail_bound=self.m_tail_bound,
            newton_iters=self.newton_iters,
        )


def _onesided_d1(h):
    """4th-order one-sided first-derivative stencil (5 nodes, from the edge)."""
    return np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / (12.0 * h)


def solve_profile(eq, s, Z=None, n_z=4096, initial=None, tol=1e-11, max_iter=50):
    """Solve the profile problem at frozen s; returns a :class:`WaveProfile`.

    ``n_z`` is the interval count (the grid has n_z+1 points so z=0 is a
    node). ``initial`` may supply (Q0_array, c0) to override the default
    front-shaped guess.
    """
    reaction = eq.reaction
    hm, h0, hp = equilibrium_roots(reaction, s)
    fu_hp = reaction.eval_partial(1, 0, hp, s)
    fu_hm = reaction.eval_partial(1, 0, hm, s)
    kappa_minus = float(np.sqrt(-fu_hp))   # rate toward z -> -inf (limit h^+)
    kappa_plus = float(np.sqrt(-fu_hm))    # rate toward z -> +inf (limit h^-)
    d0 = 0.9 * min(kappa_minus, kappa_plus)
    if Z is None:
        Z = max(12.0 / d0, 20.0)
    if Z < 12.0 / d0 - 1e-12:
        raise ValueError(f"Z={Z} below 12/d0={12.0 / d0:.3f}")
    if n_z < 1024 or n_z % 2:
        raise ValueError("n_z must be an even interval count >= 1024")

    n = n_z
    z = np.linspace(-Z, Z, n + 1)
    h = z[1] - z[0]
    mid = n // 2

    if initial is None:
        Q = h0 + 0.5 * (hm - hp) * np.tanh(0.5 * d0 * z)
        m0 = simpson_integral(fd_first_derivative(Q, h) ** 2, h)
        c = -balance_integral(reaction, s) / m0
    else:
        Q = np.array(initial[0], dtype=float)
        c = float(initial[1])

    e0 = _onesided_d1(h)

    def rates(cv):
        # decaying characteristic roots of nu^2 - c nu + f_u = 0 at each end
        nu_left = 0.5 * (cv + np.sqrt(cv * cv - 4.0 * fu_hp))    # > 0
        nu_right = 0.5 * (cv - np.sqrt(cv * cv - 4.0 * fu_hm))   # < 0
        dl = 0.5 * (1.0 + cv / np.sqrt(cv * cv - 4.0 * fu_hp))
        dr = 0.5 * (1.0 - cv / np.sqrt(cv * cv - 4.0 * fu_hm))
        return nu_left, nu_right, dl, dr

    def collocation_d1(Q):
        d1 = fd_first_derivative(Q, h)
        d1[1] = (Q[2] - Q[0]) / (2 * h)        # keep 3-point stencils next to
        d1[n - 1] = (Q[n] - Q[n - 2]) / (2 * h)  # the ends, matching the Jacobian
        return d1

    def residual(Q, c):
        r = np.empty(n + 2)
        d1 = collocation_d1(Q)
        d2 = fd_second_derivative(Q, h)
        r[1:n] = d2[1:n] - c * d1[1:n] + reaction(Q[1:n], s)
        nu_l, nu_r, _, _ = rates(c)
        r[0] = e0 @ Q[:5] - nu_l * (Q[0] - hp)
        r[n] = -(e0 @ Q[-5:][::-1]) - nu_r * (Q[n] - hm)
        r[n + 1] = Q[mid] - h0
        return r

    # static sparsity pattern for the collocation Jacobian
    rows, cols = [], []
    for i in range(1, n):
        sten = range(i - 2, i + 3) if 2 <= i <= n - 2 else range(i - 1, i + 2)
        for j_ in sten:
            rows.append(i)
            cols.append(j_)
        rows.append(i)
        cols.append(n + 1)
    for j_ in range(5):
        rows.append(0)
        cols.append(j_)
    for j_ in range(5):
        rows.append(n)
        cols.append(n - j_)
    rows += [0, n, n + 1]
    cols += [n + 1, n + 1, mid]
    rows = np.array(rows)
    cols = np.array(cols)

    c2_4 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / (12 * h * h)
    c1_4 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / (12 * h)
    c2_2 = np.array([1.0, -2.0, 1.0]) / (h * h)
    c1_2 = np.array([-0.5, 0.0, 0.5]) / h

    def jacobian(Q, c):
        d1 = collocation_d1(Q)
        nu_l, nu_r, dnu_l, dnu_r = rates(c)
        data = []
        for i in range(1, n):
            fu = reaction.eval_partial(1, 0, Q[i], s)
            if 2 <= i <= n - 2:
                sten = c2_4 - c * c1_4
                sten = sten.copy()
                sten[2] += fu
            else:
                sten = c2_2 - c * c1_2
                sten = sten.copy()
                sten[1] += fu
            data.extend(sten.tolist())
            data.append(-d1[i])
        row0 = e0.copy()
        row0[0] -= nu_l
        data.extend(row0.tolist())
        rowN = -e0.copy()
        rowN[0] -= nu_r
        data.extend(rowN.tolist())
        data += [-dnu_l * (Q[0] - hp), -dnu_r * (Q[n] - hm), 1.0]
        return sp.csc_matrix((data, (rows, cols)), shape=(n + 2, n + 2))

    # evaluation of the residual itself carries ~eps/h^2 cancellation noise
    roundoff_floor = 8.0 * np.finfo(float).eps * max(1.0, abs(hp), abs(hm)) / (h * h)
    r = residual(Q, c)
    iters = 0
    for iters in range(1, max_iter + 1):
        if np.max(np.abs(r)) <= tol:
            iters -= 1
            break
        J = jacobian(Q, c)
        delta = spla.spsolve(J, -r)
        t = 1.0
        base = np.max(np.abs(r))
        while t > 1e-4:
            Qn = Q + t * delta[: n + 1]
            cn = c + t * delta[n + 1]
            rn = residual(Qn, cn)
            if np.max(np.abs(rn)) < base:
                Q, c, r = Qn, cn, rn
                break
            t *= 0.5
        else:
            if base <= max(tol, roundoff_floor):
                break
            raise NoConvergence(f"wave Newton stalled at residual {base:.3e}")
    else:
        raise NoConvergence(f"wave Newton: {max_iter} iterations, residual {np.max(np.abs(r)):.3e}")

    if max(abs(Q[0] - hp), abs(Q[n] - hm)) > 1e-6:
        raise DomainTooSmall(
            f"|Q(+-Z) - h| = {max(abs(Q[0] - hp), abs(Q[n] - hm)):.3e} > 1e-6; increase Z"
        )

    Qz = fd_first_derivative(Q, h)
    Qzz = fd_second_derivative(Q, h)
    m = simpson_integral(Qz**2, h)
    amp = abs(hp - hm)
    m_tail = float(amp**2 * d0 * np.exp(-2.0 * d0 * Z))
    return WaveProfile(
        s=float(s), z=z, Q=Q, Qz=Qz, Qzz=Qzz, c=float(c), m=float(m),
        tail_rates=(kappa_minus, kappa_plus), d0=float(d0),
        h_minus=float(hm), h_zero=float(h0), h_plus=float(hp),
        m_tail_bound=m_tail, newton_iters=iters,
    )


def wave_mass(profile):
    """Quadrature of Q_z^2 over the stored grid (tail bound on the profile)."""
    return simpson_integral(profile.Qz**2, profile.h_z)


def check_speed_identity(eq, s, **opts):
    """Compare the collocation speed with -J(s)/m(s) from independent quadratures."""
    prof = solve_profile(eq, s, **opts)
    J = balance_integral(eq.reaction, s)
    rhs = -J / prof.m
    rel_err = abs(prof.c - rhs) / max(abs(prof.c), 1e-3)
    return {"c": prof.c, "rhs": rhs, "rel_err": rel_err, "profile": prof}
