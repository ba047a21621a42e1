"""Composite Gauss-Legendre quadrature with user breakpoints."""
import numpy as np

_ORDER = 16
_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(_ORDER)


def panel_edges(a, b, breakpoints=(), n_panels=32):
    """Panel edges on ``[a, b]``: ``n_panels`` uniform panels per smooth segment.

    Segments are delimited by the interior ``breakpoints``.  Edges run from
    ``a`` to ``b`` (descending if ``b < a``).
    """
    lo, hi = min(a, b), max(a, b)
    cuts = [lo] + sorted(p for p in set(breakpoints) if lo < p < hi) + [hi]
    parts = [np.linspace(u, v, n_panels + 1)[:-1] for u, v in zip(cuts, cuts[1:])]
    edges = np.concatenate(parts + [[hi]])
    return edges if b >= a else edges[::-1]


def panel_integrals(f, edges):
    """Integral of ``f`` over each panel ``[edges[i], edges[i+1]]``.

    ``f`` must accept an array and return an array of the same shape.
    """
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = mid[:, None] + half[:, None] * _NODES[None, :]
    return (f(x) * _WEIGHTS[None, :]).sum(axis=1) * half


def integrate_function(f, a, b, breakpoints=(), n_panels=32):
    return float(panel_integrals(f, panel_edges(a, b, breakpoints, n_panels)).sum())


def cumulative(f, a, b, breakpoints=(), n_panels=32):
    """Samples ``x`` and running integrals ``F(x) = int_a^x f``."""
    edges = panel_edges(a, b, breakpoints, n_panels)
    return edges, np.concatenate([[0.0], np.cumsum(panel_integrals(f, edges))])


def quadrature_nodes(edges):
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    return (mid[:, None] + half[:, None] * _NODES[None, :]).ravel()


def integral_at(f, edges, points):
    """``int_{edges[0]}^{x} f`` at each ``x`` in ``points`` (inside the edges).

    Whole panels come from the running sum; the partial panel holding ``x``
    gets its own Gauss-Legendre rule.
    """
    edges = np.asarray(edges, dtype=float)
    points = np.asarray(points, dtype=float)
    ascending = edges[-1] >= edges[0]
    e = edges if ascending else edges[::-1]
    running = np.concatenate([[0.0], np.cumsum(panel_integrals(f, edges))])
    if not ascending:
        running = running[::-1]
    # index of the ascending-order panel holding each point
    idx = np.clip(np.searchsorted(e, points, side="right") - 1, 0, e.size - 2)
    if ascending:
        base, left = running[idx], e[idx]
    else:
        base, left = running[idx + 1], e[idx + 1]
    half = 0.5 * (points - left)
    mid = 0.5 * (points + left)
    x = mid[:, None] + half[:, None] * _NODES[None, :]
    return base + (f(x) * _WEIGHTS[None, :]).sum(axis=1) * half
