"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the summary lines go
straight to the terminal.
"""

import time

import numpy as np
import pytest

from gmmcramer import datasets, distq, gmm1d, gmm_nd
from gmmcramer.files import dumps_model
from gmmcramer.fit import FitConfig, fit_gmm_to_points
from gmmcramer.gmm1d import Gmm1, c2_squared, c2_squared_grad
from gmmcramer.gmm_nd import GmmN
from gmmcramer.optim import softmax_backprop, softmax_weights
from gmmcramer.oracle import c2_squared_quadrature, energy_mc, finite_diff_grad

from conftest import random_gmm1, random_gmmn, rel_err

pytestmark = pytest.mark.slow


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\nCRITERION {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail
    return emit


def test_criterion_01_closed_form_vs_quadrature(report):
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    worst = 0.0
    for i in range(200):
        # every fourth pair is made of point masses only
        dp = 1.0 if i % 4 == 0 else 0.2
        a, b = random_gmm1(rng, delta_prob=dp), random_gmm1(rng, delta_prob=dp)
        worst = max(worst, abs(c2_squared(a, b) - c2_squared_quadrature(a, b)))
    took = time.perf_counter() - start
    report(1, worst <= 1e-6 and took <= 60, f"max |closed - quadrature| = {worst:.2e}, {took:.1f} s")


def _energy_hits(seed):
    rng = np.random.default_rng(seed)
    hits = []
    for i in range(50):
        a, b = random_gmm1(rng), random_gmm1(rng)
        est, se = energy_mc(a, b, samples=10 ** 6, seed=[seed, i])
        hits.append(abs(est - c2_squared(a, b)) <= 4 * se + 1e-12)
    return hits


def test_criterion_02_energy_identity(report):
    start = time.perf_counter()
    hits = _energy_hits(2)
    took = time.perf_counter() - start
    report(2, sum(hits) >= 48 and took <= 300, f"{sum(hits)}/50 within 4 SE, {took:.1f} s")


def _grad_errors_1d(rng):
    target = random_gmm1(rng)
    n = int(rng.integers(1, 5))
    g = Gmm1(rng.dirichlet(np.ones(n)), rng.uniform(-5, 5, n), rng.uniform(0.1, 3, n))
    _, grad = c2_squared_grad(g, target)

    def f(x):
        w, m, s = x[:n], x[n:2 * n], x[2 * n:]
        return float(gmm1d.c2_rows(w, m, s, target.weights, target.means, target.stds)[0])

    fd = finite_diff_grad(f, np.concatenate([g.weights, g.means, g.stds]))
    return rel_err(grad.as_vector(), fd)


def _grad_errors_nd(rng):
    n, m = 3, 2
    a, b = random_gmmn(rng, n=n, m=m), random_gmmn(rng, n=2, m=m)
    logits = rng.normal(size=n)
    a = GmmN(softmax_weights(logits), a.means, a.scales)
    dirs = gmm_nd.sample_directions_uniform(m, 7, rng)
    _, g = gmm_nd.sliced_c2_squared_grad(a, b, dirs)
    analytic = np.concatenate([softmax_backprop(a.weights, g.d_weights), g.d_means.ravel(),
                               g.d_scales.ravel()])

    def f(x):
        w = softmax_weights(x[:n])
        mu = x[n:n + n * m].reshape(n, m)
        S = x[n + n * m:].reshape(n, m, m)
        return gmm_nd.sliced_c2_squared(GmmN.unchecked(w, mu, S), b, dirs)

    fd = finite_diff_grad(f, np.concatenate([logits, a.means.ravel(), a.scales.ravel()]))
    return rel_err(analytic, fd)


def test_criterion_03_gradients(report):
    rng = np.random.default_rng(3)
    start = time.perf_counter()
    e1 = max(_grad_errors_1d(rng) for _ in range(100))
    e2 = max(_grad_errors_nd(rng) for _ in range(100))
    took = time.perf_counter() - start
    ok = e1 <= 1e-5 and e2 <= 1e-5 and took <= 60
    report(3, ok, f"max rel err 1D {e1:.1e}, ND {e2:.1e}, {took:.1f} s")


def test_criterion_04_gradient_bound(report):
    rng = np.random.default_rng(4)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        _, g = c2_squared_grad(random_gmm1(rng), random_gmm1(rng))
        worst = max(worst, np.abs(g.d_means).max(), np.abs(g.d_stds).max())
    took = time.perf_counter() - start
    report(4, worst <= 4 + 1e-9 and took <= 10, f"max |dL/dmu|, |dL/dsigma| = {worst:.4f}, {took:.2f} s")


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def test_criterion_05_exact_identities(report):
    rng = np.random.default_rng(5)
    worst = dict(scale=0.0, shift=0.0, sym=0.0, self=0.0, delta=0.0)
    for _ in range(200):
        a, b = random_gmm1(rng), random_gmm1(rng)
        d = c2_squared(a, b)
        c = rng.uniform(0.1, 10)
        sa = Gmm1(a.weights, c * a.means, c * a.stds)
        sb = Gmm1(b.weights, c * b.means, c * b.stds)
        if d > 0:
            worst["scale"] = max(worst["scale"], _rel(c2_squared(sa, sb), c * d))
            t = rng.uniform(-10, 10)
            ta = Gmm1(a.weights, a.means + t, a.stds)
            tb = Gmm1(b.weights, b.means + t, b.stds)
            worst["shift"] = max(worst["shift"], _rel(c2_squared(ta, tb), d))
            worst["sym"] = max(worst["sym"], _rel(c2_squared(b, a), d))
        worst["self"] = max(worst["self"], c2_squared(a, a))
        x, y = rng.uniform(-50, 50, 2)
        worst["delta"] = max(worst["delta"], abs(c2_squared(Gmm1.delta(x), Gmm1.delta(y)) - abs(x - y)))
    ok = (worst["scale"] <= 1e-10 and worst["shift"] <= 1e-10 and worst["sym"] <= 1e-12
          and worst["self"] <= 1e-12 and worst["delta"] <= 1e-8)
    report(5, ok, ", ".join(f"{k} {v:.1e}" for k, v in worst.items()))


def test_criterion_06_independent_sum(report):
    rng = np.random.default_rng(6)
    worst = -np.inf
    for _ in range(200):
        a, b = random_gmm1(rng), random_gmm1(rng)
        d = c2_squared(a, b)
        for tau in (0.1, 1.0, 3.0):
            ba = Gmm1(a.weights, a.means, np.sqrt(a.stds ** 2 + tau ** 2))
            bb = Gmm1(b.weights, b.means, np.sqrt(b.stds ** 2 + tau ** 2))
            worst = max(worst, c2_squared(ba, bb) - d)
    report(6, worst <= 1e-12, f"max (blurred - original) = {worst:.2e}")


def _unbiased_run(seed):
    rng = np.random.default_rng(seed)
    P = GmmN([0.6, 0.4], [[0.0, 0.0], [2.0, 1.0]],
             [np.diag([1.0, 0.5]), [[0.7, 0.2], [0.0, 0.4]]])
    G = GmmN([0.2, 0.3, 0.5], [[-1.0, 0.5], [1.0, -0.5], [2.5, 1.5]],
             [np.eye(2) * 0.8, [[1.2, 0.3], [0.0, 0.6]], np.eye(2) * 0.5])
    dense = gmm_nd.directions_equidistant_2d(360)
    _, ref = gmm_nd.sliced_c2_squared_grad(G, P, dense)
    samples = np.empty((2000, ref.as_vector().size))
    for i in range(2000):
        pts = datasets.sample_gmm_nd(P, 16, rng)
        dirs = gmm_nd.sample_directions_uniform(2, 4, rng)
        _, g = gmm_nd.sliced_c2_squared_grad(G, GmmN.from_points(pts), dirs)
        samples[i] = g.as_vector()
    return ref.as_vector(), samples


def test_criterion_07_unbiased_sampling_gradient(report):
    start = time.perf_counter()
    ref, samples = _unbiased_run(7)
    mean = samples.mean(axis=0)
    se = samples.std(axis=0, ddof=1) / np.sqrt(len(samples))
    z = np.abs(mean - ref) / se
    took = time.perf_counter() - start
    report(7, bool(np.all(z <= 4)) and took <= 300,
           f"max |mean - dense| / SE = {z.max():.2f} over {z.size} entries, {took:.1f} s")


def _heptagon_run(seed):
    pts = datasets.paper2d(850, seed)
    cfg = FitConfig(steps=1200, loss_kind="sc2+nll", nll_steps=200, t_slices=7,
                    direction_mode="equidistant2d", lr_p=5e-6, lr_mu=2e-2, lr_s=3e-3, seed=seed)
    return fit_gmm_to_points(pts, 10, cfg)


def test_criterion_08_heptagon_protocol(report):
    start = time.perf_counter()
    lines, ok = [], True
    for seed in (123, 456, 789):
        rep = _heptagon_run(seed)
        sc2 = rep.loss_history[:rep.nll_start]
        sc2_bad = int(np.sum(~np.isfinite(sc2)))
        intact = bool(np.all(np.isfinite(rep.model.means)) and np.all(np.isfinite(rep.model.scales))
                      and np.all(np.isfinite(rep.model.weights)))
        ratio = rep.initial_loss / rep.sc2_final_loss
        ok &= ratio >= 10 and sc2_bad == 0 and intact
        lines.append(f"seed {seed}: initial/final {ratio:.0f}, SC2 non-finite {sc2_bad}, "
                     f"NLL skipped {rep.nonfinite_events}")
    took = time.perf_counter() - start
    report(8, ok and took <= 300, "; ".join(lines) + f"; {took:.0f} s")


def _rl_run(gamma, seed):
    mdp = distq.chain_mdp(gamma)
    tq, hist = distq.train_demo(mdp, seed=seed)
    return max(distq.evaluate(tq, mdp).values()), tq, hist


def test_criterion_09_rl_demo(report):
    start = time.perf_counter()
    worst_09, _, _ = _rl_run(0.9, 0)
    worst_00, _, _ = _rl_run(0.0, 0)
    took = time.perf_counter() - start
    ok = worst_09 <= 0.05 and worst_00 <= 0.01 and took <= 120
    report(9, ok, f"max C2^2 gamma 0.9: {worst_09:.4f}, gamma 0: {worst_00:.4f}, {took:.1f} s")


def test_criterion_10_determinism(report):
    same = {}
    a, b = _heptagon_run(456), _heptagon_run(456)
    same["fit history"] = a.loss_history.tobytes() == b.loss_history.tobytes()
    same["fit model file"] = dumps_model(a.model) == dumps_model(b.model)
    _, ta, ha = _rl_run(0.9, 0)
    _, tb, hb = _rl_run(0.9, 0)
    same["rl history"] = np.array(ha.losses).tobytes() == np.array(hb.losses).tobytes()
    same["rl table"] = all(x.tobytes() == y.tobytes()
                           for x, y in zip(ta.params.arrays().values(), tb.params.arrays().values()))
    ra, sa = _unbiased_run(7)
    rb, sb = _unbiased_run(7)
    same["sampled gradients"] = sa.tobytes() == sb.tobytes() and ra.tobytes() == rb.tobytes()
    pair = (Gmm1([0.3, 0.7], [0.0, 2.0], [1.0, 0.0]), Gmm1.single(0.5, 2.0))
    same["energy oracle"] = energy_mc(*pair, seed=10) == energy_mc(*pair, seed=10)
    report(10, all(same.values()), ", ".join(f"{k} {'identical' if v else 'DIFFERS'}"
                                             for k, v in same.items()))
