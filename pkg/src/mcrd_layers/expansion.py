"""Matched-asymptotic recursion for the layered steady state.

Given the equilibrium structure and the balanced front profile, this module
runs the order-by-order construction of the approximate solution data: the
nonlocal-mean constants A_j, the outer constants U^{+-,j}, the inner
correctors w^j = a_j * w0_z + what^j, the layer moments K_j^m and the mass
matching that pins the free translation parameters a_j.

Per stage j the sequence is

  1. A_j from the solvability (Fredholm) condition <f_j, w0_z> = 0, with
     f_j assembled by truncated power-series (jet) composition of the
     reaction plus the curvature terms;
  2. outer constants U^{+-,j} from the algebraic outer recursion;
  3. a_{j-1} from the order-j coefficient of the prescribed-mass expansion
     (B_j = 0), which is linear in a_{j-1} through the zeroth layer moment;
  4. what^j as the unique solution of L0 what = -f_j orthogonal to the
     translation mode, by a bordered linear solve.

The recursion is truncation-aware: the final mass-matching coefficient
B_{k+1} omits the outer constants beyond order k (they are not part of the
glued profile) and carries A_{k+1} in its leading slot.
"""

from dataclasses import dataclass, field
from math import comb

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.interpolate import make_interp_spline

from .errors import (
    DegenerateJump,
    IndependenceViolation,
    MassOutOfRange,
    SolvabilityViolation,
    StageOrderViolation,
)
from .geometry import interface_radius
from .numerics import fd_first_derivative, simpson_weights

__all__ = [
    "EpsJet",
    "jet_compose_reaction",
    "L0Context",
    "l0_solve",
    "ExpansionData",
    "build_expansion",
]


class EpsJet:
    """Truncated power series in eps; coefficients are scalars or grid arrays."""

    def __init__(self, coeffs):
        self.coeffs = list(coeffs)

    @property
    def order(self):
        return len(self.coeffs) - 1

    def __add__(self, other):
        if isinstance(other, EpsJet):
            if other.order != self.order:
                raise ValueError("jet orders differ")
            return EpsJet([a + b for a, b in zip(self.coeffs, other.coeffs)])
        out = [c for c in self.coeffs]
        out[0] = out[0] + other
        return EpsJet(out)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (other * -1.0 if isinstance(other, EpsJet) else -other)

    def __mul__(self, other):
        if isinstance(other, EpsJet):
            if other.order != self.order:
                raise ValueError("jet orders differ")
            n = self.order
            out = []
            for j in range(n + 1):
                acc = 0.0
                for i in range(j + 1):
                    acc = acc + self.coeffs[i] * other.coeffs[j - i]
                out.append(acc)
            return EpsJet(out)
        return EpsJet([c * other for c in self.coeffs])

    __rmul__ = __mul__


def jet_compose_reaction(reaction, u_jet, v_jet):
    """Taylor coefficients in eps of f(u(eps), v(eps)) for two jets.

    Expands f about the zeroth coefficients; exact through the truncation
    order for polynomial reactions.
    """
    if u_jet.order != v_jet.order:
        raise ValueError("jet orders differ")
    J = u_jet.order
    u0, v0 = u_jet.coeffs[0], v_jet.coeffs[0]
    if isinstance(u0, np.ndarray) or isinstance(v0, np.ndarray):
        u0, v0 = np.broadcast_arrays(np.asarray(u0, dtype=float), np.asarray(v0, dtype=float))
        u0, v0 = u0.copy(), v0.copy()
    zero = u0 * 0.0
    du = EpsJet([zero] + [c + zero for c in u_jet.coeffs[1:]])
    dv = EpsJet([zero] + [c + zero for c in v_jet.coeffs[1:]])

    du_pows = [EpsJet([1.0 + zero] + [zero] * J)]
    dv_pows = [EpsJet([1.0 + zero] + [zero] * J)]
    for _ in range(J):
        du_pows.append(du_pows[-1] * du)
        dv_pows.append(dv_pows[-1] * dv)

    out = EpsJet([zero] * (J + 1))
    fact = [1.0]
    for i in range(1, J + 1):
        fact.append(fact[-1] * i)
    for p in range(J + 1):
        for q in range(J + 1 - p):
            fpq = reaction.eval_partial(p, q, u0, v0)
            if np.all(fpq == 0.0):
                continue
            term = du_pows[p] * dv_pows[q]
            out = out + term * (fpq / (fact[p] * fact[q]))
    return out


class L0Context:
    """Discretization of L0 = d^2/dz^2 + f_u(w0, v*) with a bordered factorization.

    The border enforces orthogonality to the translation mode w0_z, making
    the nearly singular operator solvable; the borders' multiplier beta
    reports the residual component along the kernel.
    """

    def __init__(self, reaction, v_star, z, w0, w0_z=None):
        self.z = np.asarray(z, dtype=float)
        self.h = float(z[1] - z[0])
        self.w0 = np.asarray(w0, dtype=float)
        self.w0_z = fd_first_derivative(self.w0, self.h) if w0_z is None else np.asarray(w0_z)
        self.fu = reaction.eval_partial(1, 0, self.w0, v_star)
        self.simpson = simpson_weights(len(self.z), self.h)
        self._lu = None

    @classmethod
    def from_wave(cls, eq, profile):
        return cls(eq.reaction, profile.s, profile.z, profile.Q, profile.Qz)

    def inner(self, f, g):
        return float(self.simpson @ (np.asarray(f) * np.asarray(g)))

    def apply(self, w):
        """Discrete L0 applied to a grid function (interior rows)."""
        h, n = self.h, len(self.z) - 1
        d2 = np.zeros_like(w)
        d2[2:-2] = (-w[:-4] + 16 * w[1:-3] - 30 * w[2:-2] + 16 * w[3:-1] - w[4:]) / (12 * h * h)
        d2[1] = (w[0] - 2 * w[1] + w[2]) / (h * h)
        d2[n - 1] = (w[n - 2] - 2 * w[n - 1] + w[n]) / (h * h)
        out = d2 + self.fu * w
        out[0] = out[-1] = 0.0
        return out

    def _factorize(self):
        n = len(self.z) - 1
        h = self.h
        rows, cols, data = [], [], []

        def put(i, j, v):
            rows.append(i)
            cols.append(j)
            data.append(v)

        c4 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / (12 * h * h)
        for i in range(1, n):
            if 2 <= i <= n - 2:
                for o, cv in zip(range(-2, 3), c4):
                    put(i, i + o, cv + (self.fu[i] if o == 0 else 0.0))
            else:
                put(i, i - 1, 1.0 / h**2)
                put(i, i, -2.0 / h**2 + self.fu[i])
                put(i, i + 1, 1.0 / h**2)
            put(i, n + 1, self.w0_z[i])  # border column: kernel direction
        put(0, 0, 1.0)
        put(n, n, 1.0)
        for j, sv in enumerate(self.simpson * self.w0_z):
            put(n + 1, j, sv)  # border row: orthogonality to w0_z
        A = sp.csc_matrix((data, (rows, cols)), shape=(n + 2, n + 2))
        self._lu = spla.splu(A)

    def solve(self, g, g_limits=None, solv_tol=1e-8):
        """Unique solution of L0 w = g orthogonal to w0_z; far field g/f_u."""
        g = np.asarray(g, dtype=float)
        norm_g = np.sqrt(self.inner(g, g))
        norm_k = np.sqrt(self.inner(self.w0_z, self.w0_z))
        proj = self.inner(g, self.w0_z)
        if abs(proj) > solv_tol * max(norm_g * norm_k, 1e-300):
            raise SolvabilityViolation(
                f"<g, w0_z> = {proj:.3e} exceeds {solv_tol:.1e} * |g||w0_z| = "
                f"{solv_tol * norm_g * norm_k:.3e}"
            )
        if self._lu is None:
            self._factorize()
        if g_limits is None:
            g_limits = (g[0], g[-1])
        rhs = np.concatenate([g, [0.0]])
        rhs[0] = g_limits[0] / self.fu[0]
        rhs[-2] = g_limits[1] / self.fu[-1]
        sol = self._lu.solve(rhs)
        w = sol[:-1]
        w = w - (self.inner(w, self.w0_z) / self.inner(self.w0_z, self.w0_z)) * self.w0_z
        return w


def l0_solve(ctx, g, g_limits=None, solv_tol=1e-8):
    """Solve L0 w = g in the orthogonal complement of the translation mode."""
    return ctx.solve(g, g_limits=g_limits, solv_tol=solv_tol)


def _spline_eval_with_tails(z_grid, values, lim_minus, lim_plus, d0, z, deriv=0, spl=None):
    """Quintic-spline evaluation, extended by exponential tails beyond the grid.

    Outside [z_grid[0], z_grid[-1]] the function is modelled as
    lim + (edge_value - lim) * exp(-d0 * distance), matching the decay class
    of the inner correctors; the extension only ever sees values of size
    exp(-d0*Z).
    """
    if spl is None:
        spl = make_interp_spline(z_grid, values, k=5)
    z = np.asarray(z, dtype=float)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    out = np.empty_like(z)
    inside = (z >= z_grid[0]) & (z <= z_grid[-1])
    out[inside] = spl.derivative(deriv)(z[inside]) if deriv else spl(z[inside])
    for mask, zedge, lim, sgn in (
        (z < z_grid[0], z_grid[0], lim_minus, 1.0),
        (z > z_grid[-1], z_grid[-1], lim_plus, -1.0),
    ):
        if not np.any(mask):
            continue
        amp = float(spl(zedge)) - lim
        decay = np.exp(-d0 * np.abs(z[mask] - zedge))
        if deriv == 0:
            out[mask] = lim + amp * decay
        else:
            out[mask] = amp * (sgn * d0) ** deriv * decay
    return float(out[0]) if scalar else out


@dataclass
class ExpansionData:
    """All coefficients of the matched expansion at truncation order k."""

    eq: object
    profile: object            # balanced wave profile (standard orientation)
    M: float
    D: float
    N: int
    k: int
    mirrored: bool
    R_star: float
    r0: float
    z: np.ndarray
    A: list                    # A_0 .. A_{k+1}
    a: list                    # a_0 .. a_k
    U_minus: list              # U^{-,0} .. U^{-,k+1} (values inside the interface)
    U_plus: list               # U^{+,0} .. U^{+,k+1}
    w: list                    # finalized inner profiles w^0 .. w^k on z
    w_hat: list                # what^1 .. what^k
    K: dict                    # layer moments {(j, m): K_j^m}
    J_tail: list               # J_0 .. J_k
    d0: float
    independence_gaps: list = field(default_factory=list)
    mass_match_residuals: list = field(default_factory=list)
    _splines: dict = field(default_factory=dict, repr=False)

    @property
    def jump(self):
        return self.U_plus[0] - self.U_minus[0]

    def w_eval(self, j, zq, deriv=0):
        """w^j at arbitrary stretched coordinates, exponential tails outside."""
        if j not in self._splines:
            self._splines[j] = make_interp_spline(self.z, self.w[j], k=5)
        return _spline_eval_with_tails(
            self.z, self.w[j], self.U_minus[j], self.U_plus[j], self.d0, zq, deriv,
            spl=self._splines[j],
        )

    def outer_value(self, side, eps):
        """Truncated outer constant sum_{j<=k} eps^j U^{side,j}."""
        U = self.U_minus if side < 0 else self.U_plus
        return sum(eps**j * U[j] for j in range(self.k + 1))

    def s_series_value(self, eps):
        """v* + sum_{j=1}^{k+1} eps^j A_j, the predicted nonlocal mean."""
        return sum(eps**j * self.A[j] for j in range(self.k + 2))


class _Builder:
    def __init__(self, eq, profile, M, D, N, k, mirrored):
        vs = eq.v_star
        lo, hi = vs + eq.h_minus_star, vs + eq.h_plus_star
        if not (lo < M < hi):
            raise MassOutOfRange(f"M={M} outside ({lo}, {hi})")
        if D <= 0 or k < 0 or N < 1:
            raise ValueError("need D > 0, k >= 0, N >= 1")
        self.eq = eq
        self.reaction = eq.reaction
        self.M, self.D, self.N, self.k = float(M), float(D), int(N), int(k)
        self.mirrored = bool(mirrored)
        self.profile = profile
        base = profile.reflected() if mirrored else profile
        self.base = base
        self.z = base.z
        self.h = base.h_z
        self.simpson = simpson_weights(len(self.z), self.h)
        self.d0 = base.d0
        self.R = interface_radius(eq, M, N, mirrored=mirrored)
        self.r0 = 0.25 * min(self.R, 1.0 - self.R)
        # branch values at the two sides of the interface
        self.Um = [base.h_plus if not mirrored else base.h_minus]
        self.Up = [base.h_minus if not mirrored else base.h_plus]
        self.sign = -1.0 if mirrored else 1.0  # integral of f_v w0_z = -sign*J'
        self.A = [vs]
        self.a = []
        self.w = []       # finalized inner profiles
        self.w_hat = []   # what^1..; index j-1
        self.K = {}
        self.J_tail = []
        self.ctx = None   # L0 context on the shifted w0
        self.independence_gaps = []
        self.mass_match_residuals = []

    # -- inner machinery -----------------------------------------------------

    def shifted_base(self, a0):
        if a0 == 0.0:
            return self.base.Q.copy()
        return _spline_eval_with_tails(
            self.z, self.base.Q, self.Um[0], self.Up[0], self.d0, self.z + a0
        )

    def w_for_stage(self, j, a_prev_override):
        """Inner profiles w^0..w^{j-1} entering f_j, with a_{j-1} overridden."""
        if j == 1:
            if a_prev_override is not None:
                return [self.shifted_base(a_prev_override)]
            if not self.w:
                raise StageOrderViolation("w^0 not finalized")
            return [self.w[0]]
        if len(self.w_hat) < j - 1 or len(self.w) < j - 1:
            raise StageOrderViolation(f"stage {j} requested before stage {j-1} finalized")
        ws = [self.w[i] for i in range(j - 1)]
        if a_prev_override is None:
            if len(self.w) < j:
                raise StageOrderViolation(f"w^{j-1} not finalized")
            ws.append(self.w[j - 1])
        else:
            ws.append(a_prev_override * self.ctx.w0_z + self.w_hat[j - 2])
        return ws

    def inner_forcing(self, j, A_j_value, a_prev_override=None):
        """f_j on the z-grid, with A_j entering linearly through the v-jet."""
        if j < 1 or j > self.k + 1:
            raise StageOrderViolation(f"stage {j} outside 1..k+1")
        if len(self.A) < j:
            raise StageOrderViolation(f"A_0..A_{j-1} must be known for stage {j}")
        ws = self.w_for_stage(j, a_prev_override)
        zeros = np.zeros_like(self.z)
        u_coeffs = list(ws) + [zeros]
        v_coeffs = [self.A[0]]
        for i in range(1, j):
            v_coeffs.append(self.A[i] - ws[i - 1] / self.D)
        v_coeffs.append(A_j_value - ws[j - 1] / self.D)
        f_jet = jet_compose_reaction(self.reaction, EpsJet(u_coeffs), EpsJet(v_coeffs))
        f_j = f_jet.coeffs[j]
        wz = [fd_first_derivative(wi, self.h) for wi in ws]
        curv = zeros.copy()
        for kk in range(j):
            curv += (-1.0) ** kk * self.z**kk / self.R ** (kk + 1) * wz[j - 1 - kk]
        return f_j + (self.N - 1) * curv

    def solvability_A(self, j):
        """A_j from <f_j, w0_z> = 0, with the a_{j-1}-independence check."""
        Jp = self.eq.J_prime_star * self.sign
        vals = []
        for ovr in (0.0, 1.0):
            if j == 1:
                kern = fd_first_derivative(self.shifted_base(ovr), self.h)
            else:
                kern = self.ctx.w0_z
            f0 = self.inner_forcing(j, 0.0, a_prev_override=ovr)
            vals.append(float(self.simpson @ (f0 * kern)) / Jp)
        A_j = vals[0]
        gap = abs(vals[1] - vals[0])
        if gap > 1e-7 * (1.0 + abs(A_j)):
            raise IndependenceViolation(
                f"A_{j} moved by {gap:.3e} when a_{j-1} changed 0 -> 1"
            )
        self.independence_gaps.append(gap)
        return A_j

    def outer_coeff(self, j):
        """Constants (U^{-,j}, U^{+,j}) of the outer algebraic recursion."""
        out = []
        for Ulist in (self.Um, self.Up):
            b0 = Ulist[0]
            fu0 = self.reaction.eval_partial(1, 0, b0, self.A[0])
            fv0 = self.reaction.eval_partial(0, 1, b0, self.A[0])
            hv = -fv0 / fu0
            if j == 1:
                out.append(hv * (self.A[1] - Ulist[0] / self.D))
                continue
            u_coeffs = [Ulist[i] for i in range(j)] + [0.0]
            v_coeffs = [self.A[0]]
            for i in range(1, j):
                v_coeffs.append(self.A[i] - Ulist[i - 1] / self.D)
            v_coeffs.append(0.0)
            f_side_j = jet_compose_reaction(
                self.reaction, EpsJet(u_coeffs), EpsJet(v_coeffs)
            ).coeffs[j]
            out.append(hv * (self.A[j] - Ulist[j - 1] / self.D) - f_side_j / fu0)
        return out[0], out[1]

    def split_integral(self, values, lim_minus, lim_plus, weight=None):
        """Simpson integral of weight*(values - Utilde), split at the z=0 jump.

        Requires the interval count to be a multiple of 4 so each half-grid
        has an even number of cells (the wave default 4096 qualifies).
        """
        w = np.ones_like(self.z) if weight is None else weight
        mid = (len(self.z) - 1) // 2
        half = simpson_weights(mid + 1, self.h)
        left = float(half @ (w[: mid + 1] * (values[: mid + 1] - lim_minus)))
        right = float(half @ (w[mid:] * (values[mid:] - lim_plus)))
        return left + right

    def layer_moment(self, j, m):
        """K_j^m = N C(N-1,m) R^{N-1-m} * integral of z^m (w^j - Utilde^j)."""
        if len(self.w) <= j:
            raise StageOrderViolation(f"w^{j} not finalized for layer moment")
        integ = self.split_integral(self.w[j], self.Um[j], self.Up[j], weight=self.z**m)
        return self.N * comb(self.N - 1, m) * self.R ** (self.N - 1 - m) * integ

    def mass_match_base(self, j):
        """B_j with the unknown zeroth moment K^0_{j-1} removed."""
        R_N = self.R**self.N
        if j <= self.k:
            base = (
                self.A[j]
                + (self.Um[j] - self.Um[j - 1] / self.D) * R_N
                + (self.Up[j] - self.Up[j - 1] / self.D) * (1.0 - R_N)
            )
            for m in range(1, min(self.N - 1, j - 1) + 1):
                base += self.K[(j - 1 - m, m)]
            for m in range(0, min(self.N - 1, j - 2) + 1):
                base -= self.K[(j - 2 - m, m)] / self.D
        elif j == self.k + 1:
            # truncation-aware final coefficient: no outer constants beyond k
            base = self.A[j] - (self.Um[self.k] * R_N + self.Up[self.k] * (1.0 - R_N)) / self.D
            for m in range(1, min(self.N - 1, self.k) + 1):
                base += self.K[(self.k - m, m)]
            for m in range(0, min(self.N - 1, self.k - 1) + 1):
                base -= self.K[(self.k - 1 - m, m)] / self.D
        else:
            raise StageOrderViolation(f"mass matching stage {j} outside 1..k+1")
        return base

    def mass_match_a(self, j):
        """a_{j-1} from B_j = 0; returns (a_{j-1}, J_{j-1})."""
        jump = self.Up[0] - self.Um[0]
        if abs(jump) <= 1e-10:
            raise DegenerateJump("h^+(v*) - h^-(v*) is numerically zero")
        if j == 1:
            J_prev = self.split_integral(self.base.Q, self.Um[0], self.Up[0])
        else:
            J_prev = self.split_integral(self.w_hat[j - 2], self.Um[j - 1], self.Up[j - 1])
        base = self.mass_match_base(j)
        NR = self.N * self.R ** (self.N - 1)
        a_prev = -(base + NR * J_prev) / (NR * jump)
        return a_prev, J_prev

    # -- drive ----------------------------------------------------------------

    def run(self):
        k = self.k
        for j in range(1, k + 2):
            self.A.append(self.solvability_A(j))
            Umj, Upj = self.outer_coeff(j)
            self.Um.append(Umj)
            self.Up.append(Upj)
            a_prev, J_prev = self.mass_match_a(j)
            self.a.append(a_prev)
            self.J_tail.append(J_prev)
            if j == 1:
                self.w.append(self.shifted_base(a_prev))
                self.ctx = L0Context(self.reaction, self.A[0], self.z, self.w[0])
            else:
                self.w.append(a_prev * self.ctx.w0_z + self.w_hat[j - 2])
            for m in range(0, self.N):
                self.K[(j - 1, m)] = self.layer_moment(j - 1, m)
            # re-evaluate B_j with the quadrature moment of the finalized
            # w^{j-1}; truncating the shifted tails at +-Z leaves an
            # exp(-d0 Z)-sized floor under the quadrature-vs-analytic match
            res = self.mass_match_base(j) + self.K[(j - 1, 0)]
            self.mass_match_residuals.append(res)
            NR = self.N * self.R ** (self.N - 1)
            tail_floor = (
                100.0 * np.exp(-self.d0 * self.z[-1]) * NR
                * (1.0 + abs(a_prev)) * max(1.0, abs(self.Up[0] - self.Um[0]))
            )
            if abs(res) > max(1e-10, tail_floor):
                raise StageOrderViolation(f"B_{j} residual {res:.3e} after substitution")
            if j <= k:
                f_j = self.inner_forcing(j, self.A[j])
                self.w_hat.append(self.ctx.solve(-f_j))
        return ExpansionData(
            eq=self.eq, profile=self.profile, M=self.M, D=self.D, N=self.N, k=k,
            mirrored=self.mirrored, R_star=self.R, r0=self.r0, z=self.z,
            A=self.A, a=self.a, U_minus=self.Um, U_plus=self.Up,
            w=self.w, w_hat=self.w_hat, K=self.K, J_tail=self.J_tail, d0=self.d0,
            independence_gaps=self.independence_gaps,
            mass_match_residuals=self.mass_match_residuals,
        )


def build_expansion(eq, profile, M, D, N, k, mirrored=False):
    """Run the full recursion; returns a complete :class:`ExpansionData`.

    ``profile`` is the balanced wave solved at s = v* in the standard
    orientation (falling from h^+ to h^-); the mirrored family reflects it
    internally.
    """
    return _Builder(eq, profile, M, D, N, k, mirrored).run()
