"""Independent checks for the closed forms.

None of these go through the pairwise core: the quadrature integrates the
CDF difference directly, the energy estimate samples, and the return
distribution enumerates trajectories.
"""

from dataclasses import dataclass
import itertools

import numpy as np
from scipy.special import ndtr

from .gmm1d import Gmm1

MAX_TRAJECTORIES = 10 ** 6
MERGE_TOL = 1e-12


@dataclass(frozen=True)
class QuadratureSpec:
    lower: float
    upper: float
    panels: int = 200_000
    # every piece between breakpoints gets at least this many panels
    min_panels: int = 16

    def __post_init__(self):
        if self.panels < 2 or self.panels % 2:
            raise ValueError("panels must be even and >= 2")


def default_spec(g1, g2, panels=200_000):
    """Integration window of 12 effective standard deviations past all means."""
    mu = np.concatenate([g1.means, g2.means])
    sd = max(1.0, float(np.max(np.concatenate([g1.stds, g2.stds]))))
    return QuadratureSpec(float(mu.min()) - 12 * sd, float(mu.max()) + 12 * sd, panels)


def _cdf(g, x, left):
    d = x[:, None] - g.means
    delta = g.stds == 0
    step = (d > 0) if left else (d >= 0)
    safe = np.where(delta, 1.0, g.stds)
    comp = np.where(delta, step, ndtr(d / safe))
    return comp @ g.weights


def _breakpoints(g1, g2, lo, hi):
    pts = [lo, hi]
    for g in (g1, g2):
        for mu, sd in zip(g.means, g.stds):
            pts.append(mu)
            if sd > 0:
                pts.extend(mu + c * sd for c in (-8, -4, -2, -1, -0.5, 0.5, 1, 2, 4, 8))
    pts = np.unique(np.clip(pts, lo, hi))
    return pts


def c2_squared_quadrature(g1, g2, spec=None):
    """Composite Simpson value of ``int |F1 - F2|^2 dx``.

    The window is split at every atom and around every component so each
    piece is smooth; endpoint values use one-sided limits of the CDFs.
    """
    if spec is None:
        spec = default_spec(g1, g2)
    pts = _breakpoints(g1, g2, spec.lower, spec.upper)
    total_len = spec.upper - spec.lower
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        k = max(spec.min_panels, int(np.ceil(spec.panels * (b - a) / total_len)))
        k += k % 2
        x = np.linspace(a, b, k + 1)
        f = np.empty(k + 1)
        f[:-1] = (_cdf(g1, x[:-1], False) - _cdf(g2, x[:-1], False)) ** 2
        f[-1] = (_cdf(g1, x[-1:], True) - _cdf(g2, x[-1:], True))[0] ** 2
        h = (b - a) / k
        total += h / 3.0 * (f[0] + f[-1] + 4.0 * f[1:-1:2].sum() + 2.0 * f[2:-1:2].sum())
    return total


def sample_gmm1(g, size, rng):
    """Categorical draw of the component, then a Gaussian draw."""
    comp = rng.choice(g.n, size=size, p=g.weights)
    return g.means[comp] + g.stds[comp] * rng.standard_normal(size)


def energy_mc(g1, g2, samples=10 ** 6, seed=None):
    """Monte-Carlo C2^2 via the energy identity, with jackknife standard error.

    Returns ``(estimate, stderr)``; the estimate is half the energy distance.
    """
    if samples < 10 ** 4:
        raise ValueError("use at least 10^4 samples")
    rng = np.random.default_rng(seed)
    z, z2 = sample_gmm1(g1, samples, rng), sample_gmm1(g1, samples, rng)
    w, w2 = sample_gmm1(g2, samples, rng), sample_gmm1(g2, samples, rng)
    h = 0.5 * (2.0 * np.abs(z - w) - np.abs(z - z2) - np.abs(w - w2))
    est = float(h.mean())
    loo = (h.sum() - h) / (samples - 1)
    stderr = float(np.sqrt((samples - 1) / samples * np.sum((loo - loo.mean()) ** 2)))
    return est, stderr


def finite_diff_grad(f, x, h=None):
    """Central differences with step ``1e-5 * max(1, |x_i|)`` by default."""
    x = np.asarray(x, dtype=float)
    grad = np.empty_like(x)
    flat, out = x.ravel(), grad.ravel()
    for i in range(flat.size):
        step = h if h is not None else 1e-5 * max(1.0, abs(flat[i]))
        xp, xm = flat.copy(), flat.copy()
        xp[i] += step
        xm[i] -= step
        fp, fm = f(xp.reshape(x.shape)), f(xm.reshape(x.shape))
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise ValueError(f"non-finite function value at coordinate {i}")
        out[i] = (fp - fm) / (2.0 * step)
    return grad


def _merge_atoms(values, probs):
    order = np.argsort(values, kind="stable")
    vals, ps = [], []
    for v, p in zip(np.asarray(values)[order], np.asarray(probs)[order]):
        if vals and abs(v - vals[-1]) <= MERGE_TOL:
            ps[-1] += p
        else:
            vals.append(float(v))
            ps.append(float(p))
    return Gmm1.unchecked(np.array(ps), np.array(vals), np.zeros(len(vals)))


def mdp_return_distribution(mdp, policy, state, action):
    """Exact discounted-return distribution from ``(state, action)``.

    Every trajectory (reward outcome x transition outcome) up to the horizon
    or a terminal state is enumerated; later actions follow ``policy[s]``.
    """
    # each frontier entry: (state, action, prob, return so far, discount)
    frontier = [(state, action, 1.0, 0.0, 1.0)]
    done_vals, done_ps = [], []
    for _ in range(mdp.horizon):
        nxt = []
        for s, a, p, ret, disc in frontier:
            atoms, rprobs = mdp.reward[s][a]
            for (r, rp), (s2, tp) in itertools.product(zip(atoms, rprobs), mdp.transition[s][a]):
                q = p * rp * tp
                if q == 0.0:
                    continue
                val = ret + disc * r
                if s2 is None:
                    done_vals.append(val)
                    done_ps.append(q)
                else:
                    nxt.append((s2, policy[s2], q, val, disc * mdp.gamma))
        frontier = nxt
        if len(frontier) + len(done_vals) > MAX_TRAJECTORIES:
            raise ValueError("too many trajectories to enumerate")
        if not frontier:
            break
    for _, _, p, ret, _ in frontier:  # horizon reached
        done_vals.append(ret)
        done_ps.append(p)
    return _merge_atoms(done_vals, done_ps)


def all_return_distributions(mdp, policy):
    return {(s, a): mdp_return_distribution(mdp, policy, s, a)
            for s in range(mdp.states) for a in range(mdp.actions)}
