"""Composite Gauss-Legendre rules and small helpers for removable singularities."""

from functools import lru_cache

import numpy as np

__all__ = [
    "QuadratureError",
    "gl_rule",
    "panel_rule",
    "graded_rule",
    "integrate_panels",
    "adaptive_panels",
    "sinc",
    "x_minus_sin",
]

DEFAULT_DEGREE = 16


class QuadratureError(RuntimeError):
    """Raised when a quadrature refinement fails to settle."""


@lru_cache(maxsize=32)
def _gl_reference(degree):
    x, w = np.polynomial.legendre.leggauss(degree)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gl_rule(edges, degree=DEFAULT_DEGREE):
    """Nodes and weights of a composite Gauss-Legendre rule on the panels
    delimited by ``edges`` (increasing)."""
    edges = np.asarray(edges, dtype=float)
    x, w = _gl_reference(degree)
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    nodes = (a + b) * 0.5 + half * x
    weights = half * w
    return nodes.ravel(), weights.ravel()


def panel_rule(a, b, panels, degree=DEFAULT_DEGREE):
    return gl_rule(np.linspace(a, b, int(panels) + 1), degree)


def graded_rule(a, b, panels, first=None, per_decade=4, degree=DEFAULT_DEGREE):
    """Rule on [a, b] with geometric panels from ``a`` up to ``first`` followed
    by ``panels`` uniform panels. Used where the integrand varies on the
    scale of the distance to ``a``."""
    if first is None or first <= a or a <= 0:
        return panel_rule(a, b, panels, degree)
    decades = max(1, int(np.ceil(np.log10(first / a))))
    geo = np.geomspace(a, first, decades * per_decade + 1)
    uni = np.linspace(first, b, int(panels) + 1)
    return gl_rule(np.concatenate([geo[:-1], uni]), degree)


def integrate_panels(f, a, b, panels, degree=DEFAULT_DEGREE):
    """Integrate a vectorised ``f`` with a fixed composite rule."""
    x, w = panel_rule(a, b, panels, degree)
    return np.dot(w, f(x))


def adaptive_panels(f, a, b, panels, rtol=1e-12, atol=1e-13, max_doublings=8,
                    degree=DEFAULT_DEGREE):
    """Integrate ``f`` on [a, b], doubling the panel count until two successive
    estimates agree.

    ``panels`` is the starting count; callers size it from the oscillation
    rate of the integrand so that a single doubling normally suffices.
    """
    panels = max(1, int(panels))
    prev = integrate_panels(f, a, b, panels, degree)
    for _ in range(max_doublings):
        panels *= 2
        cur = integrate_panels(f, a, b, panels, degree)
        if abs(cur - prev) <= max(atol, rtol * abs(cur)):
            return cur
        prev = cur
    raise QuadratureError(
        f"panel quadrature on [{a}, {b}] did not converge "
        f"(last change {abs(cur - prev):.3e} with {panels} panels)")


def sinc(x):
    """sin(x)/x with the removable point filled in (unnormalised sinc)."""
    return np.sinc(np.asarray(x, dtype=float) / np.pi)


# Taylor coefficients of x - sin x = x^3/3! - x^5/5! + ...
_XMS = np.array([(-1.0) ** j / np.prod(np.arange(1.0, 2 * j + 4))
                 for j in range(9)])


def x_minus_sin(x):
    """x - sin(x) without cancellation for small |x|."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = np.abs(x) < 0.5
    xs = x[small]
    x2 = xs * xs
    acc = np.zeros_like(xs)
    for c in _XMS[::-1]:
        acc = acc * x2 + c
    out[small] = acc * xs ** 3
    xl = x[~small]
    out[~small] = xl - np.sin(xl)
    return out
