"""Shared numerical kernels: quadrature, finite differences, slope fits.

Everything here operates on plain numpy arrays and is deterministic.
"""

import numpy as np

__all__ = [
    "simpson_weights",
    "simpson_integral",
    "split_simpson_integral",
    "simpson_richardson",
    "fd_first_derivative",
    "fd_second_derivative",
    "loglog_slope",
    "tail_log_slope",
]


def simpson_weights(n_points, h):
    """Composite Simpson weights for a uniform grid with an even interval count."""
    if n_points < 3 or n_points % 2 == 0:
        raise ValueError("Simpson weights need an odd point count (even intervals)")
    w = np.ones(n_points)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (h / 3.0)


def simpson_integral(values, h):
    return float(simpson_weights(len(values), h) @ np.asarray(values, dtype=float))


def split_simpson_integral(z, values_left, values_right):
    """Integrate a function with a jump at z=0 given as separate branch samples.

    ``z`` is a uniform grid symmetric about 0 with an index at 0 and an even
    number of intervals on each half. The two branches supply the values to
    use on z<=0 and z>=0 respectively (both include the z=0 node).
    """
    n = len(z)
    mid = n // 2
    if not np.isclose(z[mid], 0.0, atol=1e-12):
        raise ValueError("grid must contain z=0 at its midpoint")
    h = z[1] - z[0]
    left = simpson_integral(values_left[: mid + 1], h)
    right = simpson_integral(values_right[mid:], h)
    return left + right


def simpson_richardson(fn, a, b, tol=1e-12, max_doublings=22, n0=8):
    """Composite Simpson with panel doubling and one Richardson step.

    Doubles the panel count until the Richardson-corrected increment is
    below ``tol`` (absolute, relative to the running scale).
    """
    n = n0
    prev = None
    for _ in range(max_doublings):
        x = np.linspace(a, b, n + 1)
        vals = fn(x)
        s = simpson_integral(vals, (b - a) / n)
        if prev is not None:
            corrected = s + (s - prev) / 15.0
            if abs(corrected - s) <= tol * max(1.0, abs(corrected)):
                return corrected
        prev = s
        n *= 2
    return prev + 0.0


def fd_first_derivative(values, h):
    """Fourth-order first derivative on a uniform grid (one-sided at edges)."""
    v = np.asarray(values, dtype=float)
    d = np.empty_like(v)
    d[2:-2] = (v[:-4] - 8 * v[1:-3] + 8 * v[3:-1] - v[4:]) / (12 * h)
    # 4th-order one-sided stencils for the first two nodes on each end
    c = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / (12 * h)
    d[0] = c @ v[:5]
    d[1] = np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / (12 * h) @ v[:5]
    d[-1] = -(c @ v[-5:][::-1])
    d[-2] = -(np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / (12 * h) @ v[-5:][::-1])
    return d


def fd_second_derivative(values, h):
    """Fourth-order second derivative on a uniform grid (lower order at edges)."""
    v = np.asarray(values, dtype=float)
    d = np.empty_like(v)
    d[2:-2] = (-v[:-4] + 16 * v[1:-3] - 30 * v[2:-2] + 16 * v[3:-1] - v[4:]) / (
        12 * h * h
    )
    d[1] = (v[0] - 2 * v[1] + v[2]) / (h * h)
    d[-2] = (v[-3] - 2 * v[-2] + v[-1]) / (h * h)
    c = np.array([2.0, -5.0, 4.0, -1.0]) / (h * h)
    d[0] = c @ v[:4]
    d[-1] = c @ v[-4:][::-1]
    return d


def loglog_slope(x, y):
    """Least-squares slope of log(y) against log(x)."""
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.asarray(y, dtype=float))
    A = np.vstack([lx, np.ones_like(lx)]).T
    slope, _ = np.linalg.lstsq(A, ly, rcond=None)[0]
    return float(slope)


def tail_log_slope(x, values, floor=1e-14):
    """Slope of log|values| vs x, restricted to entries above ``floor``."""
    v = np.abs(np.asarray(values, dtype=float))
    mask = v > floor
    if mask.sum() < 3:
        return float("nan")
    A = np.vstack([np.asarray(x)[mask], np.ones(mask.sum())]).T
    slope, _ = np.linalg.lstsq(A, np.log(v[mask]), rcond=None)[0]
    return float(slope)
