"""Multivariate mixtures and the sliced Cramer 2-loss.

A component covariance is parameterized as ``Sigma_j = S_j^T S_j`` so any
real ``S_j`` is admissible; ``S_j = 0`` is a point mass.  Projecting onto a
unit vector ``nu`` gives a univariate mixture with means ``mu_j . nu`` and
standard deviations ``||S_j nu||``.

The estimator is ``(B_{m-1} / t) * sum_i C2^2(<G, nu_i>, <G', nu_i>)`` where
``B_{m-1}`` is the area of the unit sphere, so it converges to the integral
over the sphere rather than to its average.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from . import gmm1d
from .gmm1d import Gmm1


def sphere_area(m):
    """Hypersurface area of the unit sphere in R^m."""
    return 2.0 * math.pi ** (m / 2.0) / math.gamma(m / 2.0)


@dataclass(frozen=True, eq=False)
class GmmN:
    weights: np.ndarray
    means: np.ndarray
    scales: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).ravel()
        mu = np.array(self.means, dtype=float)
        S = np.array(self.scales, dtype=float)
        if mu.ndim != 2 or S.ndim != 3:
            raise ValueError("means must be (n, m) and scales (n, m, m)")
        n, m = mu.shape
        if w.size != n or S.shape != (n, m, m) or n == 0:
            raise ValueError("inconsistent component shapes")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
            raise ValueError("weights must be non-negative and sum to 1")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "means", mu)
        object.__setattr__(self, "scales", S)

    @classmethod
    def unchecked(cls, weights, means, scales):
        g = object.__new__(cls)
        object.__setattr__(g, "weights", np.asarray(weights, dtype=float))
        object.__setattr__(g, "means", np.asarray(means, dtype=float))
        object.__setattr__(g, "scales", np.asarray(scales, dtype=float))
        return g

    @classmethod
    def from_points(cls, xs):
        """Equal-weight point masses at the rows of ``xs``."""
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        if xs.shape[0] == 0:
            raise ValueError("need at least one point")
        k, m = xs.shape
        return cls(np.full(k, 1.0 / k), xs, np.zeros((k, m, m)))

    @property
    def n(self):
        return self.weights.size

    @property
    def dim(self):
        return self.means.shape[1]

    def covariances(self):
        return np.einsum("jka,jkb->jab", self.scales, self.scales)

    def mean(self):
        return self.weights @ self.means


@dataclass
class GradN:
    d_weights: np.ndarray
    d_means: np.ndarray
    d_scales: np.ndarray

    def as_vector(self):
        return np.concatenate([self.d_weights, self.d_means.ravel(), self.d_scales.ravel()])


@dataclass(frozen=True, eq=False)
class DirectionSet:
    """Unit directions plus the weight that turns the sum into an integral."""

    dirs: np.ndarray
    weight: float

    @classmethod
    def of(cls, dirs):
        dirs = np.atleast_2d(np.asarray(dirs, dtype=float))
        norms = np.linalg.norm(dirs, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-9):
            raise ValueError("directions must be unit vectors")
        return cls(dirs, sphere_area(dirs.shape[1]) / dirs.shape[0])

    @property
    def t(self):
        return self.dirs.shape[0]

    @property
    def dim(self):
        return self.dirs.shape[1]


def sample_directions_uniform(m, t, seed=None, hemisphere=False):
    """``t`` i.i.d. uniform directions on the sphere in R^m.

    ``hemisphere=True`` flips each direction into the half-space with a
    non-negative first coordinate.  The sliced integrand is even, so this
    only canonicalizes signs.
    """
    if m < 2 or t < 1:
        raise ValueError("need m >= 2 and t >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    g = rng.standard_normal((t, m))
    dirs = g / np.linalg.norm(g, axis=1, keepdims=True)
    if hemisphere:
        dirs = np.where(dirs[:, :1] < 0, -dirs, dirs)
    return DirectionSet(dirs, sphere_area(m) / t)


def directions_equidistant_2d(t, offset_angle=0.0, m=2):
    """Vertices of a regular ``t``-gon on the unit circle."""
    if m != 2:
        raise ValueError("equidistant directions are only defined for m = 2")
    if t < 1:
        raise ValueError("need t >= 1")
    ang = offset_angle + 2.0 * np.pi * np.arange(t) / t
    return DirectionSet(np.column_stack([np.cos(ang), np.sin(ang)]), 2.0 * np.pi / t)


def _projected(g, dirs):
    """Projected means and stds, each ``(t, n)``, plus ``S_j nu_i`` as ``(t, n, m)``."""
    pm = dirs @ g.means.T
    snu = np.einsum("jab,ib->ija", g.scales, dirs)
    return pm, np.linalg.norm(snu, axis=2), snu


def project(g, nu):
    nu = np.asarray(nu, dtype=float).ravel()
    if abs(np.linalg.norm(nu) - 1.0) > 1e-9:
        raise ValueError("projection direction must be a unit vector")
    if nu.size != g.dim:
        raise ValueError("direction dimension does not match the mixture")
    pm, ps, _ = _projected(g, nu[None, :])
    return Gmm1.unchecked(g.weights.copy(), pm[0], ps[0])


def _check_dims(g1, g2, dirs):
    if not (g1.dim == g2.dim == dirs.dim):
        raise ValueError(f"dimension mismatch: {g1.dim}, {g2.dim}, directions {dirs.dim}")


def target_self_energy(g2, dirs):
    """Per-direction self-energy of the target, reusable while both are fixed."""
    pm, ps, _ = _projected(g2, dirs.dirs)
    return gmm1d.self_energy_rows(np.broadcast_to(g2.weights, pm.shape), pm, ps)


def sliced_c2_slices(g1, g2, dirs, target_self=None):
    """Per-direction C2^2 values (unweighted, clamped at zero)."""
    _check_dims(g1, g2, dirs)
    if target_self is None:
        g1, g2 = gmm1d.canonical_pair(g1, g2)
    pm1, ps1, _ = _projected(g1, dirs.dirs)
    pm2, ps2, _ = _projected(g2, dirs.dirs)
    vals = gmm1d.c2_rows(g1.weights, pm1, ps1, g2.weights, pm2, ps2, self2=target_self)
    return np.maximum(vals, 0.0)


def sliced_c2_squared(g1, g2, dirs, target_self=None, normalized=True):
    """Sliced squared Cramer 2-distance estimate.

    ``normalized=False`` returns the plain sum over directions.
    """
    raw = float(np.sum(sliced_c2_slices(g1, g2, dirs, target_self)))
    return dirs.weight * raw if normalized else raw


def sliced_c2_squared_grad(g1, g2, dirs, target_self=None):
    """Normalized sliced loss and its gradient for ``g1``.

    Where ``S_j nu_i = 0`` the scale gradient of that slice is taken as 0.
    """
    _check_dims(g1, g2, dirs)
    pm1, ps1, snu = _projected(g1, dirs.dirs)
    pm2, ps2, _ = _projected(g2, dirs.dirs)
    loss, dp, dm, ds = gmm1d.c2_rows(g1.weights, pm1, ps1, g2.weights, pm2, ps2,
                                     want_grad=True, self2=target_self)
    w = dirs.weight
    d_means = w * (dm.T @ dirs.dirs)
    with np.errstate(invalid="ignore", divide="ignore"):
        coef = np.where(ps1 > 0, ds / ps1, 0.0)
    d_scales = w * np.einsum("ij,ija,ib->jab", coef, snu, dirs.dirs)
    d_weights = w * dp.sum(axis=0)
    value = w * float(np.sum(np.maximum(loss, 0.0)))
    return value, GradN(d_weights, d_means, d_scales)


# -- negative log likelihood ----------------------------------------------------

def _nll_parts(g, xs):
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    if xs.shape[1] != g.dim:
        raise ValueError("point dimension does not match the mixture")
    sign, logdet = np.linalg.slogdet(g.scales)
    if np.any(sign == 0) or not np.all(np.isfinite(logdet)):
        raise ValueError("singular covariance: every S_j must be invertible")
    diff = xs[None, :, :] - g.means[:, None, :]                 # (n, k, m)
    # w = S^{-T} (x - mu), so the Mahalanobis term is ||w||^2
    w = np.linalg.solve(np.swapaxes(g.scales, 1, 2), np.swapaxes(diff, 1, 2))
    w = np.swapaxes(w, 1, 2)                                   # (n, k, m)
    m = g.dim
    log_comp = (-0.5 * np.sum(w * w, axis=2) - logdet[:, None]
                - 0.5 * m * math.log(2.0 * math.pi))            # (n, k)
    with np.errstate(divide="ignore"):
        log_w = np.log(g.weights)
    lse = logsumexp(log_comp + log_w[:, None], axis=0)          # (k,)
    return w, log_comp, lse


def nll_nd(g, xs):
    _, _, lse = _nll_parts(g, xs)
    if not np.all(np.isfinite(lse)):
        return float("inf")
    return float(-np.sum(lse))


def nll_nd_grad(g, xs):
    w, log_comp, lse = _nll_parts(g, xs)
    if not np.all(np.isfinite(lse)):
        z = np.zeros_like
        return float("inf"), GradN(z(g.weights), z(g.means), z(g.scales))
    ratio = np.exp(log_comp - lse[None, :])                     # N_j(x_i) / mix(x_i)
    resp = ratio * g.weights[:, None]
    u = np.linalg.solve(g.scales, np.swapaxes(w, 1, 2))         # S^{-1} w, (n, m, k)
    d_means = -np.einsum("jk,jak->ja", resp, u)
    inv_t = np.swapaxes(np.linalg.inv(g.scales), 1, 2)
    d_scales = (resp.sum(axis=1)[:, None, None] * inv_t
                - np.einsum("jk,jka,jbk->jab", resp, w, u))
    d_weights = -ratio.sum(axis=1)
    return float(-np.sum(lse)), GradN(d_weights, d_means, d_scales)
