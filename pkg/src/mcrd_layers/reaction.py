"""Bistable reaction terms f(u, v) and their equilibrium structure.

A reaction is bistable on a v-window when f(., v) has three simple real
roots h^-(v) < h^0(v) < h^+(v) with f_u negative at the outer pair and
positive at the middle one. The balance integral

    J(v) = integral of f(s, v) ds from h^-(v) to h^+(v)

selects the balanced value v* where J(v*) = 0; its slope J'(v*) is computed
through the identity J'(v) = integral of f_v(s, v) ds over the same range,
valid because f vanishes at both endpoints.

Three kinds are supported: the cubic-linear benchmark u - u^3 + v, the
saturating Mori interconversion term -u + (delta + gamma*u^2/(1+u^2))*v,
and user polynomials in (u, v). All reduce the root problem to a polynomial
in u, solved by companion-matrix eigenvalues plus Newton polish.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import (
    DegenerateBalance,
    NoBistability,
    NoMassBalance,
    OrderUnavailable,
    SignPatternViolation,
)
from .numerics import simpson_richardson

__all__ = ["BistableReaction", "EquilibriumStructure", "find_vstar"]

_ROOT_TOL = 1e-12
_JSTAR_TOL = 1e-10
_JPRIME_TOL = 1e-8


def _inv1pu2_deriv(u, p):
    """p-th u-derivative of 1/(1+u^2), exact via complex partial fractions."""
    if p == 0:
        return 1.0 / (1.0 + u * u)
    w = (u - 1j) ** (-(p + 1))
    return (-1.0) ** p * float(math.factorial(p)) * np.imag(w)


class BistableReaction:
    """Reaction term f(u, v) with partial derivatives to arbitrary order.

    Construct through the classmethods :meth:`cubic_linear`, :meth:`mori`
    or :meth:`polynomial`.
    """

    def __init__(self, kind, params, max_derivative_order=64):
        if max_derivative_order < 2:
            raise ValueError("max_derivative_order must be >= 2")
        self.kind = kind
        self.params = params
        self.max_derivative_order = int(max_derivative_order)

    @classmethod
    def cubic_linear(cls, max_derivative_order=64):
        """f(u, v) = u - u^3 + v."""
        return cls("cubic_linear", {}, max_derivative_order)

    @classmethod
    def mori(cls, gamma, delta, max_derivative_order=64):
        """f(u, v) = -u + (delta + gamma*u^2/(1+u^2))*v, requires gamma > 8*delta > 0."""
        if not (delta > 0.0 and gamma > 8.0 * delta):
            raise NoBistability(
                f"Mori reaction needs gamma > 8*delta > 0, got gamma={gamma}, delta={delta}"
            )
        return cls("mori", {"gamma": float(gamma), "delta": float(delta)}, max_derivative_order)

    @classmethod
    def polynomial(cls, coeffs, max_derivative_order=64):
        """f(u, v) = sum_{p,q} coeffs[p][q] * u^p * v^q."""
        c = np.atleast_2d(np.asarray(coeffs, dtype=float))
        if c.ndim != 2:
            raise ValueError("polynomial coefficients must be a 2-D array")
        return cls("polynomial", {"coeffs": c}, max_derivative_order)

    # -- evaluation ---------------------------------------------------------

    def __call__(self, u, v):
        return self.eval_partial(0, 0, u, v)

    def eval_partial(self, p, q, u, v):
        """Return d^{p+q} f / du^p dv^q at (u, v); (0,0) is f itself."""
        if p < 0 or q < 0:
            raise ValueError("derivative orders must be nonnegative")
        if p + q > self.max_derivative_order:
            raise OrderUnavailable(
                f"order {p}+{q} exceeds max_derivative_order={self.max_derivative_order}"
            )
        u = np.asarray(u, dtype=float) if not np.isscalar(u) else u
        if self.kind == "cubic_linear":
            return self._cubic_partial(p, q, u, v)
        if self.kind == "mori":
            return self._mori_partial(p, q, u, v)
        return self._poly_partial(p, q, u, v)

    def _cubic_partial(self, p, q, u, v):
        zero = np.zeros_like(u * 1.0) if not np.isscalar(u) else 0.0
        if q == 0:
            if p == 0:
                return u - u**3 + v
            if p == 1:
                return 1.0 - 3.0 * u * u
            if p == 2:
                return -6.0 * u
            if p == 3:
                return -6.0 + zero
            return zero
        if q == 1 and p == 0:
            return 1.0 + zero
        return zero

    def _mori_partial(self, p, q, u, v):
        gamma = self.params["gamma"]
        delta = self.params["delta"]
        zero = np.zeros_like(u * 1.0) if not np.isscalar(u) else 0.0
        if q > 1:
            return zero

        def g_deriv(pp):
            # g(u) = u^2/(1+u^2) = 1 - 1/(1+u^2)
            if pp == 0:
                return u * u / (1.0 + u * u)
            return -_inv1pu2_deriv(u, pp)

        if q == 0:
            out = gamma * v * g_deriv(p)
            if p == 0:
                out = out - u + delta * v
            elif p == 1:
                out = out - 1.0
            return out
        out = gamma * g_deriv(p)
        if p == 0:
            out = out + delta
        return out + zero

    def _poly_partial(self, p, q, u, v):
        c = self.params["coeffs"]
        scalar = np.isscalar(u) and np.isscalar(v)
        if not scalar:
            u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
        if p >= c.shape[0] or q >= c.shape[1]:
            return 0.0 if scalar else np.zeros_like(u)
        d = npoly.polyder(npoly.polyder(c, p, axis=0), q, axis=1) if q else npoly.polyder(c, p, axis=0)
        if d.size == 0:
            return 0.0 if scalar else np.zeros_like(u)
        return npoly.polyval2d(u, v, np.atleast_2d(d))

    # -- polynomial reduction in u ------------------------------------------

    def u_poly_coeff_polys(self):
        """Coefficients of the u-polynomial root problem, each as a poly in v.

        Returns a list ``[a_n(v), ..., a_0(v)]`` (descending powers of u,
        ascending-v coefficient arrays) whose roots in u coincide with the
        roots of f(., v).
        """
        if self.kind == "cubic_linear":
            # u - u^3 + v = 0  <=>  u^3 - u - v = 0
            return [np.array([1.0]), np.array([0.0]), np.array([-1.0]), np.array([0.0, -1.0])]
        if self.kind == "mori":
            # (1+u^2) f = 0  <=>  u^3 - v(delta+gamma) u^2 + u - v delta = 0
            gamma = self.params["gamma"]
            delta = self.params["delta"]
            return [
                np.array([1.0]),
                np.array([0.0, -(delta + gamma)]),
                np.array([1.0]),
                np.array([0.0, -delta]),
            ]
        c = self.params["coeffs"]
        return [c[p, :].copy() for p in range(c.shape[0] - 1, -1, -1)]

    def u_poly_coeffs(self, v):
        """Numeric u-polynomial coefficients (descending) at a given v."""
        return np.array([npoly.polyval(v, cp) for cp in self.u_poly_coeff_polys()])

    def derivative_selftest(self, seed=0, max_order=4, n_points=24, h=1e-5):
        """Max relative error of stored partials vs central differences of f."""
        rng = np.random.default_rng(seed)
        us = rng.uniform(-2.0, 2.0, n_points)
        vs = rng.uniform(0.05, 0.5, n_points) if self.kind == "mori" else rng.uniform(-1.0, 1.0, n_points)
        worst = 0.0
        for p in range(max_order + 1):
            for q in range(max_order + 1 - p):
                if p + q == 0:
                    continue
                for u0, v0 in zip(us, vs):
                    if p > 0:
                        lo = self.eval_partial(p - 1, q, u0 - h, v0)
                        hi = self.eval_partial(p - 1, q, u0 + h, v0)
                    else:
                        lo = self.eval_partial(p, q - 1, u0, v0 - h)
                        hi = self.eval_partial(p, q - 1, u0, v0 + h)
                    fd = (hi - lo) / (2 * h)
                    exact = self.eval_partial(p, q, u0, v0)
                    scale = max(1.0, abs(exact), abs(fd))
                    worst = max(worst, abs(fd - exact) / scale)
        return worst


def _real_roots_polished(coeffs_desc, reaction, v):
    """Real roots of the u-polynomial, polished with two Newton steps on f."""
    roots = np.roots(coeffs_desc)
    scale = max(1.0, np.max(np.abs(roots))) if roots.size else 1.0
    real = np.sort(roots[np.abs(roots.imag) <= 1e-8 * scale].real)
    polished = []
    for r in real:
        x = r
        for _ in range(2):
            fp = reaction.eval_partial(1, 0, x, v)
            if fp != 0.0:
                x = x - reaction.eval_partial(0, 0, x, v) / fp
        polished.append(x)
    return np.array(polished)


def equilibrium_roots(reaction, v):
    """The three equilibrium branches (h^-, h^0, h^+) of f(., v).

    Raises NoBistability when f(., v) does not have three simple real
    roots and SignPatternViolation when f_u has the wrong signs at them.
    """
    roots = _real_roots_polished(reaction.u_poly_coeffs(v), reaction, v)
    # collapse near-coincident roots so tangency counts as failure
    distinct = []
    for r in roots:
        if not distinct or abs(r - distinct[-1]) > 1e-9 * max(1.0, abs(r)):
            distinct.append(r)
    if len(distinct) != 3:
        raise NoBistability(f"f(., v={v}) has {len(distinct)} simple real roots, need 3")
    hm, h0, hp = distinct
    scale = max(1.0, abs(v))
    for h in (hm, h0, hp):
        if abs(reaction(h, v)) > _ROOT_TOL * scale:
            raise NoBistability(f"root residual {reaction(h, v):.3e} too large at v={v}")
    signs = [np.sign(reaction.eval_partial(1, 0, h, v)) for h in (hm, h0, hp)]
    if signs != [-1.0, 1.0, -1.0]:
        raise SignPatternViolation(f"f_u sign pattern {signs} at v={v}, expected (-,+,-)")
    return hm, h0, hp


def balance_integral(reaction, v):
    """J(v): integral of f(s, v) over (h^-(v), h^+(v))."""
    hm, _, hp = equilibrium_roots(reaction, v)
    if reaction.kind in ("cubic_linear", "polynomial"):
        # exact antiderivative in s
        if reaction.kind == "cubic_linear":
            coeffs_asc = np.array([v, 1.0, 0.0, -1.0])  # f as poly in u
        else:
            c = reaction.params["coeffs"]
            coeffs_asc = np.array([npoly.polyval(v, c[p, :]) for p in range(c.shape[0])])
        anti = npoly.polyint(coeffs_asc)
        return float(npoly.polyval(hp, anti) - npoly.polyval(hm, anti))
    return simpson_richardson(lambda s: reaction.eval_partial(0, 0, s, v), hm, hp)


def balance_prime(reaction, v):
    """J'(v) through the f_v integral identity over (h^-(v), h^+(v))."""
    hm, _, hp = equilibrium_roots(reaction, v)
    if reaction.kind in ("cubic_linear", "polynomial"):
        if reaction.kind == "cubic_linear":
            coeffs_asc = np.array([1.0])
        else:
            c = reaction.params["coeffs"]
            dv = npoly.polyder(c, 1, axis=1)
            coeffs_asc = np.array([npoly.polyval(v, np.atleast_2d(dv)[p, :]) for p in range(np.atleast_2d(dv).shape[0])])
        anti = npoly.polyint(coeffs_asc)
        return float(npoly.polyval(hp, anti) - npoly.polyval(hm, anti))
    return simpson_richardson(lambda s: reaction.eval_partial(0, 1, s, v), hm, hp)


@dataclass
class EquilibriumStructure:
    """Bistable window, branch callables and the balanced value v*."""

    reaction: BistableReaction
    v_lo: float
    v_hi: float
    v_star: float
    J_prime_star: float
    h_minus_star: float
    h_zero_star: float
    h_plus_star: float
    a2_margin: float          # max of (f_u - f_v)(h^pm(v), v) over sampled v; must be < 0
    other_windows: list = field(default_factory=list)

    def roots(self, v):
        return equilibrium_roots(self.reaction, v)

    def h_minus(self, v):
        return self.roots(v)[0]

    def h_zero(self, v):
        return self.roots(v)[1]

    def h_plus(self, v):
        return self.roots(v)[2]

    def J(self, v):
        return balance_integral(self.reaction, v)

    def J_prime(self, v):
        return balance_prime(self.reaction, v)

    # values of f_u, f_v frozen on the two stable branches at v*
    def fu_at(self, h):
        return float(self.reaction.eval_partial(1, 0, h, self.v_star))

    def fv_at(self, h):
        return float(self.reaction.eval_partial(0, 1, h, self.v_star))

    def branch_slope_at(self, h):
        """dh/dv on the branch through (h, v*): -f_v/f_u by implicit differentiation."""
        return -self.fv_at(h) / self.fu_at(h)


def _discriminant_windows_cubic(reaction, v_range):
    """Window edges for u-cubic reactions from the exact discriminant in v.

    The u-cubic's coefficients are polynomials in v, so its discriminant
    Delta(v) = 18abcd - 4b^3 d + b^2 c^2 - 4ac^3 - 27a^2 d^2 is one too;
    window edges are its real roots. Robust to windows far narrower than
    any fixed scan grid (the Mori window has width ~2e-3). Intervals are
    closed off with the v_range bounds so a reaction bistable on the whole
    range is still reported.
    """
    a, b, c, d = reaction.u_poly_coeff_polys()
    pm, pa = npoly.polymul, npoly.polyadd

    def scal(s, p):
        return s * np.asarray(p, dtype=float)

    delta = pa(
        pa(scal(18.0, pm(pm(a, b), pm(c, d))), scal(-4.0, pm(pm(b, pm(b, b)), d))),
        pa(
            pa(pm(pm(b, b), pm(c, c)), scal(-4.0, pm(a, pm(c, pm(c, c))))),
            scal(-27.0, pm(pm(a, a), pm(d, d))),
        ),
    )
    delta = np.trim_zeros(np.asarray(delta, dtype=float), "b")
    edges = np.array([])
    if delta.size > 1:
        r = npoly.polyroots(delta)
        edges = np.sort(np.unique(r[np.abs(r.imag) < 1e-9].real))
    lo, hi = v_range
    pts = np.concatenate([[lo], edges[(edges > lo) & (edges < hi)], [hi]])
    windows = []
    for a_v, b_v in zip(pts[:-1], pts[1:]):
        mid = 0.5 * (a_v + b_v)
        try:
            equilibrium_roots(reaction, mid)
        except (NoBistability, SignPatternViolation):
            continue
        windows.append((float(a_v), float(b_v)))
    return windows


def _scan_windows(reaction, v_range, n_scan=2048):
    """Fallback window detection: boolean scan plus boundary bisection."""
    lo, hi = v_range
    grid = np.linspace(lo, hi, n_scan)

    def bistable(v):
        try:
            equilibrium_roots(reaction, v)
            return True
        except (NoBistability, SignPatternViolation):
            return False

    flags = np.array([bistable(v) for v in grid])

    def bisect_edge(v_in, v_out):
        for _ in range(60):
            mid = 0.5 * (v_in + v_out)
            if bistable(mid):
                v_in = mid
            else:
                v_out = mid
            if abs(v_in - v_out) < 1e-10:
                break
        return 0.5 * (v_in + v_out)

    windows = []
    i = 0
    while i < n_scan:
        if flags[i]:
            j = i
            while j + 1 < n_scan and flags[j + 1]:
                j += 1
            left = bisect_edge(grid[i], grid[i - 1]) if i > 0 else grid[0]
            right = bisect_edge(grid[j], grid[j + 1]) if j + 1 < n_scan else grid[-1]
            windows.append((float(left), float(right)))
            i = j + 1
        else:
            i += 1
    return windows


def find_vstar(reaction, v_range=None, n_samples=65):
    """Locate the bistable window and the balanced value v*.

    Returns an :class:`EquilibriumStructure`. The first window (ascending v;
    for the Mori kind only v > 0 is searched) is used and any others are
    recorded on ``other_windows``.
    """
    box = v_range or (-8.0, 8.0)
    degree = len(reaction.u_poly_coeff_polys()) - 1
    if degree == 3:
        windows = _discriminant_windows_cubic(reaction, box)
    else:
        windows = _scan_windows(reaction, box)
    if reaction.kind == "mori":
        # concentrations are physical at v > 0; the v < 0 window is the
        # mirror image under (u, v) -> (-u, -v) and is reported, not used
        usable = [w for w in windows if 0.5 * (w[0] + w[1]) > 0.0]
    else:
        usable = windows
    if not usable:
        raise NoBistability("no bistable v-window found")
    v_lo, v_hi = usable[0]
    other_windows = [w for w in windows if w != (v_lo, v_hi)]

    inset = 1e-3 * (v_hi - v_lo)
    vs = np.linspace(v_lo + inset, v_hi - inset, n_samples)
    Js = np.array([balance_integral(reaction, v) for v in vs])
    scale = max(1.0, np.max(np.abs(Js)))

    # condition (A2) margin over the sampled window
    a2 = -np.inf
    for v in vs[:: max(1, n_samples // 16)]:
        hm, _, hp = equilibrium_roots(reaction, v)
        for h in (hm, hp):
            m = reaction.eval_partial(1, 0, h, v) - reaction.eval_partial(0, 1, h, v)
            a2 = max(a2, float(m))
    if a2 >= 0.0:
        raise SignPatternViolation(f"transversality (A2) fails: max margin {a2:.3e} >= 0")

    if np.all(np.abs(Js) <= 1e-12 * scale):
        v_star = float(vs[np.argmin(np.abs(Js))])  # J vanishes identically
    elif np.min(np.abs(Js)) <= _JSTAR_TOL:
        v_star = float(vs[np.argmin(np.abs(Js))])  # a sample already is the root
    else:
        sign_change = np.nonzero(Js[:-1] * Js[1:] < 0.0)[0]
        if sign_change.size == 0:
            raise NoMassBalance("J(v) has constant sign on the bistable window")
        i = int(sign_change[0])
        a_v, b_v = vs[i], vs[i + 1]
        fa = Js[i]
        for _ in range(200):
            mid = 0.5 * (a_v + b_v)
            fm = balance_integral(reaction, mid)
            if abs(fm) <= _JSTAR_TOL:
                a_v = b_v = mid
                break
            if np.sign(fm) == np.sign(fa):
                a_v, fa = mid, fm
            else:
                b_v = mid
        v_star = 0.5 * (a_v + b_v)

    # Newton polish on J, harmless when already converged
    for _ in range(6):
        J0 = balance_integral(reaction, v_star)
        if abs(J0) <= _JSTAR_TOL:
            break
        Jp = balance_prime(reaction, v_star)
        if Jp == 0.0:
            break
        v_star = v_star - J0 / Jp
    if abs(balance_integral(reaction, v_star)) > _JSTAR_TOL:
        raise NoMassBalance(f"could not refine J(v*) below {_JSTAR_TOL}")

    J_prime = balance_prime(reaction, v_star)
    if abs(J_prime) <= _JPRIME_TOL:
        raise DegenerateBalance(f"|J'(v*)| = {abs(J_prime):.3e} <= {_JPRIME_TOL}")

    hm, h0, hp = equilibrium_roots(reaction, v_star)
    return EquilibriumStructure(
        reaction=reaction,
        v_lo=float(v_lo),
        v_hi=float(v_hi),
        v_star=float(v_star),
        J_prime_star=float(J_prime),
        h_minus_star=float(hm),
        h_zero_star=float(h0),
        h_plus_star=float(hp),
        a2_margin=float(a2),
        other_windows=other_windows,
    )
