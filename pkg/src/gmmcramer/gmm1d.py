"""Univariate Gaussian mixtures and their closed-form Cramer 2-loss.

The squared Cramer 2-distance between two mixtures reduces to pairwise
energy terms::

    C2^2(G, G') = 2 * sum_jk p_j p'_k z V(x) - sum_jk p_j p_k z V(x)
                  - sum_jk p'_j p'_k z V(x)

where ``z = sqrt(s_j^2 + s_k^2 + eps)`` and ``x`` is the standardized mean
difference.  Two point masses use the exact limit ``|m_j - m_k| / 2``.  The pairwise sums run in the compiled core when available.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from . import _backend
from .scalar import phi_cdf_array, phi_pdf_array

LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)

# Delta-only self-energies above this size go through the sorted formula.
_FAST_DELTA_MIN = 32


@dataclass(frozen=True, eq=False)
class Gmm1:
    """Univariate Gaussian mixture; ``stds == 0`` marks a point mass."""

    weights: np.ndarray
    means: np.ndarray
    stds: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).ravel()
        m = np.array(self.means, dtype=float).ravel()
        s = np.array(self.stds, dtype=float).ravel()
        if not (w.size == m.size == s.size) or w.size == 0:
            raise ValueError("weights, means and stds must be non-empty and equally long")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
            raise ValueError("weights must be non-negative and sum to 1")
        if np.any(s < 0):
            raise ValueError("standard deviations must be >= 0")
        if not (np.all(np.isfinite(m)) and np.all(np.isfinite(s))):
            raise ValueError("means and stds must be finite")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "means", m)
        object.__setattr__(self, "stds", s)

    @classmethod
    def unchecked(cls, weights, means, stds):
        """Build without validation; training code uses this for raw parameters
        (e.g. a temporarily negative sigma)."""
        g = object.__new__(cls)
        object.__setattr__(g, "weights", np.asarray(weights, dtype=float))
        object.__setattr__(g, "means", np.asarray(means, dtype=float))
        object.__setattr__(g, "stds", np.asarray(stds, dtype=float))
        return g

    @classmethod
    def single(cls, mean, std):
        return cls([1.0], [mean], [std])

    @classmethod
    def delta(cls, x):
        return cls([1.0], [x], [0.0])

    @property
    def n(self):
        return self.weights.size

    def mean(self):
        return float(np.dot(self.weights, self.means))

    def __repr__(self):
        return (f"Gmm1(weights={self.weights.tolist()}, means={self.means.tolist()}, "
                f"stds={self.stds.tolist()})")


@dataclass
class Grad1:
    d_weights: np.ndarray
    d_means: np.ndarray
    d_stds: np.ndarray

    def as_vector(self):
        return np.concatenate([self.d_weights, self.d_means, self.d_stds])


def from_points(xs):
    """Equal-weight mixture of point masses, one per sample (duplicates kept)."""
    xs = np.asarray(xs, dtype=float).ravel()
    if xs.size == 0:
        raise ValueError("need at least one point")
    k = xs.size
    return Gmm1(np.full(k, 1.0 / k), xs, np.zeros(k))


def affine(g, r, gamma):
    """Distribution of ``r + gamma * X`` for ``X ~ g``."""
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    return Gmm1.unchecked(g.weights.copy(), r + gamma * g.means, gamma * g.stds)


def pdf(g, x):
    if np.any(g.stds <= 0):
        raise ValueError("density is undefined for point-mass components")
    x = np.asarray(x, dtype=float)
    z = (x[..., None] - g.means) / g.stds
    return np.sum(g.weights * phi_pdf_array(z) / g.stds, axis=-1)


def cdf(g, x):
    """Mixture CDF; point masses use the right-continuous Heaviside step."""
    x = np.asarray(x, dtype=float)
    d = x[..., None] - g.means
    delta = g.stds == 0
    safe = np.where(delta, 1.0, g.stds)
    comp = np.where(delta, (d >= 0).astype(float), phi_cdf_array(d / safe))
    return np.sum(g.weights * comp, axis=-1)


# -- batched energy rows ----------------------------------------------------

def _rows(a):
    return np.ascontiguousarray(np.atleast_2d(a), dtype=float)


def _delta_self_energy(p, m):
    """Self-energy ``sum_{j<k} p_j p_k |m_j - m_k|`` of a point-mass mixture
    in O(n log n) via sorted prefix sums."""
    order = np.argsort(m, kind="stable")
    ms, ps = m[order], p[order]
    cum_p = np.cumsum(ps) - ps
    cum_pm = np.cumsum(ps * ms) - ps * ms
    return float(np.sum(ps * (ms * cum_p - cum_pm)))


def self_energy_rows(p, m, s):
    """``sum_jk p_j p_k z V(x)`` per row, with a fast path for point masses."""
    p, m, s = _rows(p), _rows(m), _rows(s)
    if m.shape[1] < _FAST_DELTA_MIN:
        return _backend.self_energy(p, m, s)
    out = np.empty(m.shape[0])
    for b in range(m.shape[0]):
        if np.any(s[b]):
            out[b] = _backend.self_energy(p[b:b + 1], m[b:b + 1], s[b:b + 1])[0]
        else:
            out[b] = _delta_self_energy(p[b], m[b])
    return out


def c2_rows(p1, m1, s1, p2, m2, s2, want_grad=False, self2=None):
    """Unclamped squared Cramer distance for each row of a batch.

    All arguments are broadcast to 2-D ``(rows, components)`` arrays.  With
    ``want_grad`` the gradients for the first mixture are returned as
    ``(loss, d_weights, d_means, d_stds)``.  ``self2`` may carry the cached
    target self-energy.
    """
    m1, m2 = _rows(m1), _rows(m2)
    s1 = _rows(np.broadcast_to(s1, m1.shape))
    s2 = _rows(np.broadcast_to(s2, m2.shape))
    p1 = _rows(np.broadcast_to(p1, m1.shape))
    p2 = _rows(np.broadcast_to(p2, m2.shape))
    if self2 is None:
        self2 = self_energy_rows(p2, m2, s2)
    if not want_grad:
        cross = _backend.cross_energy(p1, m1, s1, p2, m2, s2)
        self1 = _backend.self_energy(p1, m1, s1)
        return 2.0 * cross - (self1 + self2)
    part, dp, dm, ds = _backend.c2_grad(p1, m1, s1, p2, m2, s2)
    return part - self2, dp, dm, ds


# -- public losses ------------------------------------------------------------

def canonical_pair(a, b):
    """Order two mixtures by their parameter bytes so that a symmetric
    distance sums in the same order either way round."""
    def key(g):
        spread = g.stds if isinstance(g, Gmm1) else g.scales
        return tuple(np.ascontiguousarray(x).tobytes() for x in (g.weights, g.means, spread))
    return (a, b) if key(a) <= key(b) else (b, a)


def c2_squared(g1, g2):
    """Squared Cramer 2-distance between two univariate mixtures."""
    g1, g2 = canonical_pair(g1, g2)
    val = c2_rows(g1.weights, g1.means, g1.stds, g2.weights, g2.means, g2.stds)[0]
    return max(float(val), 0.0)


def c2_squared_grad(g1, g2):
    """Loss and its gradient with respect to the parameters of ``g1``.

    The weights are differentiated as free variables; compose with
    :func:`gmmcramer.optim.softmax_backprop` for logits.
    """
    loss, dp, dm, ds = c2_rows(g1.weights, g1.means, g1.stds,
                               g2.weights, g2.means, g2.stds, want_grad=True)
    return max(float(loss[0]), 0.0), Grad1(dp[0], dm[0], ds[0])


def _nll_terms(g, xs):
    if np.any(g.stds <= 0):
        raise ValueError("NLL needs strictly positive standard deviations")
    xs = np.asarray(xs, dtype=float).ravel()
    z = (xs[:, None] - g.means) / g.stds
    log_comp = -0.5 * z * z - np.log(g.stds) - LOG_SQRT_2PI
    with np.errstate(divide="ignore"):
        log_w = np.log(g.weights)
    lse = logsumexp(log_comp + log_w, axis=1)
    return xs, z, log_comp, lse


def nll(g, xs):
    """Negative log likelihood; ``inf`` when some point has zero density."""
    _, _, _, lse = _nll_terms(g, xs)
    if not np.all(np.isfinite(lse)):
        return float("inf")
    return float(-np.sum(lse))


def nll_grad(g, xs):
    xs, z, log_comp, lse = _nll_terms(g, xs)
    if not np.all(np.isfinite(lse)):
        zero = np.zeros(g.n)
        return float("inf"), Grad1(zero, zero.copy(), zero.copy())
    # N_j(x_i) / mixture(x_i); times p_j this is the responsibility
    ratio = np.exp(log_comp - lse[:, None])
    resp = ratio * g.weights
    d_w = -np.sum(ratio, axis=0)
    d_m = -np.sum(resp * z, axis=0) / g.stds
    d_s = -np.sum(resp * (z * z - 1.0), axis=0) / g.stds
    return float(-np.sum(lse)), Grad1(d_w, d_m, d_s)
