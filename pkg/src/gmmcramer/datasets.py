"""Synthetic point clouds for the command line and the acceptance runs."""

import numpy as np

from .gmm_nd import GmmN

JITTER = 0.01
RECT = (0.0, 0.0, 2.0, 1.2)       # x0, y0, width, height
CIRCLE = ((3.6, 0.6), 0.6)        # centre, radius
SEGMENT = ((2.0, 0.6), (3.0, 0.6))  # joins the rectangle's right edge to the circle


def _rectangle_outline(u, rect=RECT):
    x0, y0, w, h = rect
    s = u * 2 * (w + h)
    pts = np.empty((u.size, 2))
    for i, d in enumerate(s):
        if d < w:
            pts[i] = (x0 + d, y0)
        elif d < w + h:
            pts[i] = (x0 + w, y0 + d - w)
        elif d < 2 * w + h:
            pts[i] = (x0 + w - (d - w - h), y0 + h)
        else:
            pts[i] = (x0, y0 + h - (d - 2 * w - h))
    return pts


def paper2d(n, seed=None):
    """Rectangle outline, circle and a connecting segment (40/40/20 %)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    n_rect = int(round(0.4 * n))
    n_circ = int(round(0.4 * n))
    n_seg = n - n_rect - n_circ
    rect = _rectangle_outline(rng.uniform(size=n_rect))
    ang = rng.uniform(0, 2 * np.pi, size=n_circ)
    (cx, cy), r = CIRCLE
    circ = np.column_stack([cx + r * np.cos(ang), cy + r * np.sin(ang)])
    (ax, ay), (bx, by) = SEGMENT
    t = rng.uniform(size=n_seg)
    seg = np.column_stack([ax + t * (bx - ax), ay + t * (by - ay)])
    pts = np.concatenate([rect, circ, seg])
    return pts + JITTER * rng.standard_normal(pts.shape)


def reference_gmm(dim=2, k=3, seed=None):
    """A random well-separated mixture used by ``gen-data --shape gaussians``."""
    rng = np.random.default_rng(seed)
    weights = rng.dirichlet(np.full(k, 5.0))
    means = rng.uniform(-4, 4, size=(k, dim))
    scales = np.array([np.diag(rng.uniform(0.3, 1.0, dim)) for _ in range(k)])
    return GmmN(weights, means, scales)


def sample_gmm_nd(g, n, rng):
    comp = rng.choice(g.n, size=n, p=g.weights)
    z = rng.standard_normal((n, g.dim))
    # x = mu + S^T z has covariance S^T S
    return g.means[comp] + np.einsum("ij,ija->ia", z, g.scales[comp])
