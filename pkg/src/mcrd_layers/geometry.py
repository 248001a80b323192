"""Unit-ball geometry: interface radius, smooth cutoff, radial grids.

The domain is the unit ball in R^N; radial means are taken with respect to
(1/|Omega|) * integral over Omega, i.e. N * integral of g(r) r^{N-1} dr on
[0, 1].
"""

from dataclasses import dataclass

import numpy as np

from .errors import MassOutOfRange

__all__ = ["ball_volume", "interface_radius", "cutoff_theta", "RadialGrid"]


def ball_volume(N):
    """|B_1| in R^N: 2, pi, 4пи/3, ... via the two-step recursion."""
    if N == 1:
        return 2.0
    if N == 2:
        return float(np.pi)
    return 2.0 * np.pi * ball_volume(N - 2) / N


def interface_radius(eq, M, N, mirrored=False):
    """Layer radius fixed by the mean mass through the volume-fraction rule.

    Standard orientation puts h^+ inside; the mirrored family swaps the
    branches, and the two radii satisfy R_hat^N + R^N = 1.
    """
    hm, hp, vs = eq.h_minus_star, eq.h_plus_star, eq.v_star
    lo, hi = vs + hm, vs + hp
    if not (lo < M < hi):
        raise MassOutOfRange(f"M={M} outside open interval ({lo}, {hi})")
    frac = (hp + vs - M) / (hp - hm) if mirrored else (M - vs - hm) / (hp - hm)
    return float(frac ** (1.0 / N))


def _bump(t):
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def _bump_d1(t):
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos]) / t[pos] ** 2
    return out


def _bump_d2(t):
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos]) * (1.0 / t[pos] ** 4 - 2.0 / t[pos] ** 3)
    return out


def cutoff_theta(x, order=0):
    """C-infinity cutoff: 1 on |x| <= 1, 0 on |x| >= 2, with derivatives.

    ``order`` selects the value (0), first (1) or second (2) derivative.
    Built from exp(-1/t) transitions so the plateaus are exact.
    """
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    t = 2.0 - np.abs(x)  # smoothstep argument; s(t)=1 for t>=1, 0 for t<=0
    A, B = _bump(t), _bump(1.0 - t)
    denom = A + B
    if order == 0:
        out = A / denom
    else:
        A1, B1 = _bump_d1(t), -_bump_d1(1.0 - t)
        s1 = (A1 * B - A * B1) / denom**2
        if order == 1:
            out = -np.sign(x) * s1
        elif order == 2:
            A2, B2 = _bump_d2(t), _bump_d2(1.0 - t)
            s2 = (A2 * B - A * B2) / denom**2 - (A1 * B - A * B1) * 2 * (A1 + B1) / denom**3
            out = s2
        else:
            raise ValueError("order must be 0, 1 or 2")
    return float(out[0]) if scalar else out


@dataclass
class RadialGrid:
    """Composite radial grid: coarse outer segments, fine band around the layer.

    ``weights`` realize the normalized mean (1/|Omega|) * integral over the
    ball: composite Simpson per uniform segment with the r^{N-1} factor,
    rescaled so the mean of 1 is exactly 1.
    """

    N: int
    r: np.ndarray
    weights: np.ndarray
    R_star: float
    r0: float
    fine_h: float
    segment_breaks: tuple

    @classmethod
    def build(cls, N, R_star, r0, eps, nodes_per_eps=24, fine_cap=200.0, coarse_h=0.02):
        """Grid with fine spacing min(eps/nodes_per_eps, r0/fine_cap) on
        [R*-2r0, R*+2r0] and ~coarse_h spacing outside."""
        lo, hi = R_star - 2 * r0, R_star + 2 * r0
        h_f = eps / nodes_per_eps
        if np.isfinite(fine_cap):
            h_f = min(h_f, r0 / fine_cap)
        segs = []
        if lo > 1e-14:
            segs.append((0.0, lo, min(coarse_h, lo / 8)))
        segs.append((lo, hi, h_f))
        if hi < 1.0 - 1e-14:
            segs.append((hi, 1.0, min(coarse_h, (1.0 - hi) / 8)))

        rs, ws = [], []
        for a, b, h in segs:
            n_cells = int(np.ceil((b - a) / h / 2.0)) * 2  # even for Simpson
            pts = np.linspace(a, b, n_cells + 1)
            w = np.ones(n_cells + 1)
            w[1:-1:2], w[2:-1:2] = 4.0, 2.0
            w *= (b - a) / (3.0 * n_cells)
            seg_w = N * w * pts ** (N - 1)
            if rs:
                ws[-1][-1] += seg_w[0]
                rs.append(pts[1:])
                ws.append(seg_w[1:])
            else:
                rs.append(pts)
                ws.append(seg_w)
        r = np.concatenate(rs)
        weights = np.concatenate(ws)
        weights = weights / weights.sum()  # exact mean of 1
        return cls(
            N=N, r=r, weights=weights, R_star=float(R_star), r0=float(r0),
            fine_h=float(h_f), segment_breaks=(float(lo), float(hi)),
        )

    @property
    def n(self):
        return len(self.r)

    def mean(self, values):
        """(1/|Omega|) * integral of a radial field over the ball."""
        return float(self.weights @ np.asarray(values, dtype=float))

    def inner(self, f, g):
        """L^2(Omega) inner product of two radial fields."""
        return ball_volume(self.N) * float(self.weights @ (np.asarray(f) * np.asarray(g)))

    def cell_masses(self):
        """Finite-volume cell masses int r^{N-1} dr over node cells.

        These are the weights with respect to which the flux-form radial
        Laplacian is exactly self-adjoint; they sum to 1/N exactly.
        """
        r = self.r
        faces = np.empty(len(r) + 1)
        faces[0] = r[0]
        faces[-1] = r[-1]
        faces[1:-1] = 0.5 * (r[:-1] + r[1:])
        return (faces[1:] ** self.N - faces[:-1] ** self.N) / self.N

    def laplacian_tridiag(self):
        """Flux-form radial Laplacian with Neumann closures as (lower, diag, upper).

        Row sums vanish identically, and diag(cell_masses) @ L is symmetric.
        """
        r = self.r
        n = len(r)
        m = self.cell_masses()
        faces = 0.5 * (r[:-1] + r[1:])
        cond = faces ** (self.N - 1) / np.diff(r)
        lower = np.zeros(n)
        diag = np.zeros(n)
        upper = np.zeros(n)
        upper[:-1] = cond / m[:-1]
        lower[1:] = cond / m[1:]
        diag[:-1] -= cond / m[:-1]
        diag[1:] -= cond / m[1:]
        return lower, diag, upper

    def region_masks(self):
        """Index masks of the pure-outer, blend and pure-inner regions."""
        d = np.abs(self.r - self.R_star)
        return d >= 2 * self.r0, (d > self.r0) & (d < 2 * self.r0), d <= self.r0
