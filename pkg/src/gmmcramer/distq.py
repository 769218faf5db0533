"""Tabular distributional Q-learning with Gaussian-mixture return tables.

Each ``(state, action)`` cell holds a univariate mixture.  Updates follow the
double-estimator rule: the online table picks the greedy next action, the
target table supplies its return distribution, and the online cell is pulled
towards ``r + gamma * Z`` with the closed-form Cramer 2-loss.
"""

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import gmm1d
from .gmm1d import Gmm1, affine
from .optim import LionState, ParamGroups, lion_step, sigma_penalty, softmax_weights


@dataclass
class ToyMdp:
    """Finite MDP; ``transition[s][a]`` is a list of ``(next_state, prob)`` with
    ``None`` meaning terminal, ``reward[s][a]`` is ``(atoms, probs)``."""

    states: int
    actions: int
    horizon: int
    transition: list
    reward: list
    gamma: float = 0.9

    def __post_init__(self):
        for s in range(self.states):
            for a in range(self.actions):
                if abs(sum(p for _, p in self.transition[s][a]) - 1.0) > 1e-12:
                    raise ValueError(f"transition probabilities of ({s}, {a}) must sum to 1")
                if abs(sum(self.reward[s][a][1]) - 1.0) > 1e-12:
                    raise ValueError(f"reward probabilities of ({s}, {a}) must sum to 1")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")


def chain_mdp(gamma=0.9):
    """Three states in a row, walked left to right in three steps.

    Action 0 pays a fair coin in {0, 1}; action 1 pays 2 with probability
    0.1, else 0.  Action 0 has the higher mean everywhere.
    """
    coin = ([0.0, 1.0], [0.5, 0.5])
    long_shot = ([0.0, 2.0], [0.9, 0.1])
    transition = [[[(s + 1 if s < 2 else None, 1.0)] for _ in range(2)] for s in range(3)]
    reward = [[coin, long_shot] for _ in range(3)]
    return ToyMdp(3, 2, 3, transition, reward, gamma)


class TabularQ:
    """Mixture per ``(state, action)``, stored as trainable parameter groups."""

    def __init__(self, states, actions, n=3, params=None, rng=None,
                 mean_range=(0.0, 1.0), sigma=0.5):
        self.states, self.actions, self.n = states, actions, n
        if params is None:
            rng = rng if rng is not None else np.random.default_rng(0)
            shape = (states, actions, n)
            params = ParamGroups(np.zeros(shape), rng.uniform(*mean_range, size=shape),
                                 np.full(shape, float(sigma)))
        self.params = params

    def copy(self):
        return TabularQ(self.states, self.actions, self.n, self.params.copy())

    def _check(self, s, a):
        if not (0 <= s < self.states and 0 <= a < self.actions):
            raise IndexError(f"({s}, {a}) out of range")

    def entry(self, s, a):
        self._check(s, a)
        p = self.params
        return Gmm1.unchecked(softmax_weights(p.weight_logits[s, a]), p.means[s, a].copy(),
                              p.scales[s, a].copy())

    def set_entry(self, s, a, g):
        self._check(s, a)
        with np.errstate(divide="ignore"):
            logits = np.log(g.weights)
        self.params.weight_logits[s, a] = np.where(np.isfinite(logits), logits, -50.0)
        self.params.means[s, a] = g.means
        self.params.scales[s, a] = g.stds


def q_value(tq, s, a):
    """Expected return of the stored mixture."""
    return tq.entry(s, a).mean()


def greedy_action(tq, s):
    # np.argmax breaks ties towards the lowest index
    _, q = _q_table(tq.params)
    return int(np.argmax(q[s]))


def bellman_target(tq_target, tq_online, transition, gamma):
    """Target distribution for a sampled ``(s, a, r, s_next)``.

    ``s_next is None`` marks a terminal transition and gives ``delta_r``.
    """
    _, _, r, s_next = transition
    if s_next is None or gamma == 0.0:
        return Gmm1.delta(r)
    a0 = greedy_action(tq_online, s_next)
    return affine(tq_target.entry(s_next, a0), r, gamma)


@dataclass
class DemoConfig:
    episodes: int = 4000
    batch_size: int = 64
    n_components: int = 3
    lr_p: float = 2e-3
    lr_mu: float = 1e-2
    lr_s: float = 1e-3
    target_update: int = 200
    epsilon: float = 0.2
    replay_capacity: int = 100_000
    start_state: int = 0
    # component means start spread over this range so they do not merge
    init_mean_range: tuple = (-0.5, 3.0)
    init_sigma: float = 0.2
    # learning rates fall linearly to this fraction of their start value
    final_lr_fraction: float = 0.1


@dataclass
class DemoHistory:
    losses: list = field(default_factory=list)
    updates: int = 0
    penalty_activations: int = 0


def _q_table(params):
    logits = params.weight_logits
    w = np.exp(logits - logits.max(axis=-1, keepdims=True))
    w /= w.sum(axis=-1, keepdims=True)
    return w, np.sum(w * params.means, axis=-1)


def _batch_targets(tq_target, tq_online, batch, gamma):
    """Array form of :func:`bellman_target` for a whole batch.

    Point-mass targets are spread evenly over the ``n`` component slots so
    every row has the same width.
    """
    n = tq_target.n
    s_next = np.array([-1 if tr[3] is None else tr[3] for tr in batch])
    r = np.array([tr[2] for tr in batch], dtype=float)
    live = (s_next >= 0) & (gamma != 0.0)
    tp = np.full((len(batch), n), 1.0 / n)
    tm = np.repeat(r[:, None], n, axis=1)
    ts = np.zeros((len(batch), n))
    if np.any(live):
        _, q_online = _q_table(tq_online.params)
        w_target, _ = _q_table(tq_target.params)
        sn = s_next[live]
        a0 = np.argmax(q_online[sn], axis=1)
        tp[live] = w_target[sn, a0]
        tm[live] = r[live, None] + gamma * tq_target.params.means[sn, a0]
        ts[live] = gamma * tq_target.params.scales[sn, a0]
    return tp, tm, ts


def update(online, target, batch, gamma, state):
    """One Lion step on the batch-mean Cramer loss plus the sigma penalty."""
    p = online.params
    s_idx = np.array([tr[0] for tr in batch])
    a_idx = np.array([tr[1] for tr in batch])
    logits = p.weight_logits[s_idx, a_idx]
    w = np.exp(logits - logits.max(axis=1, keepdims=True))
    w /= w.sum(axis=1, keepdims=True)
    tp, tm, ts = _batch_targets(target, online, batch, gamma)
    loss, dp, dm, ds = gmm1d.c2_rows(w, p.means[s_idx, a_idx], p.scales[s_idx, a_idx],
                                     tp, tm, ts, want_grad=True)
    b = len(batch)
    d_logits = w * (dp - np.sum(w * dp, axis=1, keepdims=True))
    grads = {k: np.zeros_like(v) for k, v in p.arrays().items()}
    np.add.at(grads["weight_logits"], (s_idx, a_idx), d_logits / b)
    np.add.at(grads["means"], (s_idx, a_idx), dm / b)
    np.add.at(grads["scales"], (s_idx, a_idx), ds / b)
    pen, pen_grad = sigma_penalty(p.scales)
    grads["scales"] += pen_grad
    lion_step(state, p, grads)
    return float(np.mean(np.maximum(loss, 0.0))), pen


def _sample(rng, atoms, probs):
    return atoms[rng.choice(len(atoms), p=probs)]


def train_demo(mdp, cfg=None, seed=0):
    """Epsilon-greedy rollouts into a replay buffer with one update per step."""
    cfg = cfg or DemoConfig()
    rng = np.random.default_rng(seed)
    online = TabularQ(mdp.states, mdp.actions, cfg.n_components, rng=rng,
                      mean_range=cfg.init_mean_range, sigma=cfg.init_sigma)
    base_lrs = {"weight_logits": cfg.lr_p, "means": cfg.lr_mu, "scales": cfg.lr_s}
    target = online.copy()
    state = LionState()
    replay = deque(maxlen=cfg.replay_capacity)
    hist = DemoHistory()
    for ep in range(cfg.episodes):
        frac = 1.0 - (1.0 - cfg.final_lr_fraction) * ep / max(cfg.episodes - 1, 1)
        online.params.lrs = {k: v * frac for k, v in base_lrs.items()}
        s = cfg.start_state
        for _ in range(mdp.horizon):
            if rng.random() < cfg.epsilon:
                a = int(rng.integers(mdp.actions))
            else:
                a = greedy_action(online, s)
            atoms, probs = mdp.reward[s][a]
            r = float(_sample(rng, atoms, probs))
            nexts = mdp.transition[s][a]
            s2 = nexts[rng.choice(len(nexts), p=[q for _, q in nexts])][0]
            replay.append((s, a, r, s2))
            if len(replay) >= cfg.batch_size:
                idx = rng.integers(len(replay), size=cfg.batch_size)
                batch = [replay[i] for i in idx]
                loss, pen = update(online, target, batch, mdp.gamma, state)
                hist.losses.append(loss)
                hist.penalty_activations += pen > 0
                hist.updates += 1
                if hist.updates % cfg.target_update == 0:
                    target = online.copy()
            if s2 is None:
                break
            s = s2
    return online, hist


def evaluate(tq, mdp, truth=None):
    """Per-cell C2^2 against the exact returns of the table's greedy policy."""
    from .oracle import all_return_distributions

    if truth is None:
        policy = [greedy_action(tq, s) for s in range(mdp.states)]
        truth = all_return_distributions(mdp, policy)
    return {sa: gmm1d.c2_squared(tq.entry(*sa), g) for sa, g in truth.items()}
