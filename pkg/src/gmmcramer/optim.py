"""Lion optimizer over named parameter groups, softmax weights, sigma penalty."""

from dataclasses import dataclass, field

import numpy as np

SIGMA_PENALTY = 10.0


def softmax_weights(logits):
    logits = np.asarray(logits, dtype=float)
    e = np.exp(logits - np.max(logits))
    return e / e.sum()


def softmax_backprop(probs, d_weights):
    """Pull a gradient on the probabilities back to the logits."""
    probs = np.asarray(probs, dtype=float)
    d_weights = np.asarray(d_weights, dtype=float)
    return probs * (d_weights - np.dot(probs, d_weights))


def sigma_penalty(sigmas, coef=SIGMA_PENALTY):
    """``coef * sum(relu(-sigma))`` and its gradient."""
    sigmas = np.asarray(sigmas, dtype=float)
    neg = sigmas < 0
    return float(coef * np.sum(-sigmas[neg])), np.where(neg, -coef, 0.0)


@dataclass
class ParamGroups:
    """Trainable mixture parameters.

    ``scales`` holds raw sigmas ``(n,)`` in 1-D mode and matrices
    ``(n, m, m)`` otherwise.  ``lrs`` maps group name to learning rate.
    """

    weight_logits: np.ndarray
    means: np.ndarray
    scales: np.ndarray
    lrs: dict = field(default_factory=lambda: {"weight_logits": 5e-6, "means": 2e-2, "scales": 3e-3})

    NAMES = ("weight_logits", "means", "scales")

    def arrays(self):
        return {k: getattr(self, k) for k in self.NAMES}

    def copy(self):
        return ParamGroups(*(getattr(self, k).copy() for k in self.NAMES), dict(self.lrs))

    def weights(self):
        return softmax_weights(self.weight_logits)

    def all_finite(self):
        return all(np.all(np.isfinite(a)) for a in self.arrays().values())


@dataclass
class LionState:
    beta1: float = 0.9
    beta2: float = 0.99
    momentum: dict = field(default_factory=dict)


def lion_step(state, params, grads):
    """One in-place Lion update: ``theta -= lr * sign(b1*m + (1-b1)*g)``.

    ``grads`` maps group names to arrays shaped like the parameters.
    """
    for name in ParamGroups.NAMES:
        theta = getattr(params, name)
        g = np.asarray(grads[name], dtype=float)
        if g.shape != theta.shape:
            raise ValueError(f"gradient shape {g.shape} does not match {name} {theta.shape}")
        m = state.momentum.get(name)
        if m is None:
            m = np.zeros_like(theta)
        update = np.sign(state.beta1 * m + (1.0 - state.beta1) * g)
        theta -= params.lrs[name] * update
        state.momentum[name] = state.beta2 * m + (1.0 - state.beta2) * g
    return params, state


def sgd_step(params, grads, lr):
    """Plain gradient descent; only used by tests as a reference optimizer."""
    for name in ParamGroups.NAMES:
        getattr(params, name)[...] -= lr * np.asarray(grads[name])
    return params
