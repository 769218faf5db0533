"""Gradient-descent training of mixtures against points or another mixture."""

import logging
from dataclasses import dataclass, field

import numpy as np

from . import gmm1d, gmm_nd
from .gmm1d import Gmm1
from .gmm_nd import GmmN
from .optim import LionState, ParamGroups, lion_step, sigma_penalty, softmax_backprop

log = logging.getLogger(__name__)

LOSS_KINDS = ("sc2", "nll", "sc2+nll")
DIRECTION_MODES = ("uniform", "equidistant2d")
# sigma given to point-mass components before likelihood fine-tuning
NLL_HANDOFF_SIGMA = 1e-3


@dataclass
class FitConfig:
    steps: int = 1200
    loss_kind: str = "sc2"
    nll_steps: int = 200
    t_slices: int = 7
    direction_mode: str = "uniform"
    lr_p: float = 5e-6
    lr_mu: float = 2e-2
    lr_s: float = 3e-3
    seed: int = 0
    resample_directions_every_step: bool = True
    offset_angle: float = 0.0
    beta1: float = 0.9
    beta2: float = 0.99

    def __post_init__(self):
        if self.steps < 1 or self.t_slices < 1 or self.nll_steps < 0:
            raise ValueError("steps and t_slices must be >= 1")
        if self.loss_kind not in LOSS_KINDS:
            raise ValueError(f"loss_kind must be one of {LOSS_KINDS}")
        if self.direction_mode not in DIRECTION_MODES:
            raise ValueError(f"direction_mode must be one of {DIRECTION_MODES}")

    def lrs(self):
        return {"weight_logits": self.lr_p, "means": self.lr_mu, "scales": self.lr_s}


@dataclass
class FitReport:
    model: object
    loss_history: np.ndarray
    initial_loss: float
    final_loss: float
    nonfinite_events: int = 0
    penalty_activations: int = 0
    nll_start: int | None = None
    sc2_final_loss: float | None = None
    det_ratios: np.ndarray | None = None
    phases: list = field(default_factory=list)


# -- parameter <-> model ----------------------------------------------------

def to_model(params, one_d):
    p = params.weights()
    if one_d:
        return Gmm1.unchecked(p, params.means.copy(), params.scales.copy())
    return GmmN.unchecked(p, params.means.copy(), params.scales.copy())


def params_from_model(model, lrs):
    with np.errstate(divide="ignore"):
        logits = np.log(model.weights)
    logits = np.where(np.isfinite(logits), logits, -50.0)
    scales = model.stds if isinstance(model, Gmm1) else model.scales
    return ParamGroups(logits.copy(), np.array(model.means, dtype=float), np.array(scales, dtype=float), dict(lrs))


def _target_stats(target):
    """Bounding box and overall std of the target, per axis."""
    if isinstance(target, Gmm1):
        mu, sd, w = target.means[:, None], target.stds[:, None], target.weights
        var_in = sd ** 2
    else:
        mu, w = target.means, target.weights
        var_in = np.einsum("jaa->ja", target.covariances())
        sd = np.sqrt(var_in)
    lo = np.min(mu - 2 * sd, axis=0)
    hi = np.max(mu + 2 * sd, axis=0)
    mean = w @ mu
    var = w @ (var_in + mu ** 2) - mean ** 2
    return lo, hi, float(np.mean(np.sqrt(np.maximum(var, 0.0))))


def init_params(target, k, lrs, rng):
    """Means uniform in the target's box, sigma (or S/I) half the target std,
    zero logits."""
    lo, hi, std = _target_stats(target)
    spread = std if std > 0 else 1.0
    means = rng.uniform(lo, hi, size=(k, lo.size))
    if isinstance(target, Gmm1):
        return ParamGroups(np.zeros(k), means[:, 0].copy(), np.full(k, spread / 2), dict(lrs))
    m = lo.size
    scales = np.tile(np.eye(m) * (spread / 2), (k, 1, 1))
    return ParamGroups(np.zeros(k), means, scales, dict(lrs))


# -- losses on raw parameters -----------------------------------------------

class _Sc2Loss:
    def __init__(self, target, cfg, rng):
        self.target = target
        self.one_d = isinstance(target, Gmm1)
        self.cfg = cfg
        self.rng = rng
        self.dirs = None
        self.target_self = None
        if self.one_d:
            self.target_self = gmm1d.self_energy_rows(target.weights, target.means, target.stds)
        elif cfg.direction_mode == "equidistant2d":
            self._set_dirs(gmm_nd.directions_equidistant_2d(cfg.t_slices, cfg.offset_angle, m=target.dim))
        else:
            self._set_dirs(gmm_nd.sample_directions_uniform(target.dim, cfg.t_slices, rng))

    def _set_dirs(self, dirs):
        self.dirs = dirs
        self.target_self = gmm_nd.target_self_energy(self.target, dirs)

    def next_step(self):
        cfg = self.cfg
        if (not self.one_d and cfg.direction_mode == "uniform"
                and cfg.resample_directions_every_step):
            self._set_dirs(gmm_nd.sample_directions_uniform(self.target.dim, cfg.t_slices, self.rng))

    def value(self, model):
        if self.one_d:
            t = self.target
            val = gmm1d.c2_rows(model.weights, model.means, model.stds, t.weights, t.means, t.stds,
                                self2=self.target_self)[0]
            return max(float(val), 0.0)
        return gmm_nd.sliced_c2_squared(model, self.target, self.dirs, self.target_self)

    def grad(self, model):
        if self.one_d:
            t = self.target
            loss, dp, dm, ds = gmm1d.c2_rows(model.weights, model.means, model.stds, t.weights,
                                             t.means, t.stds, want_grad=True, self2=self.target_self)
            return max(float(loss[0]), 0.0), dp[0], dm[0], ds[0]
        val, g = gmm_nd.sliced_c2_squared_grad(model, self.target, self.dirs, self.target_self)
        return val, g.d_weights, g.d_means, g.d_scales


class _NllLoss:
    def __init__(self, points, one_d):
        self.points = points
        self.one_d = one_d

    def next_step(self):
        pass

    def value(self, model):
        try:
            return gmm1d.nll(model, self.points) if self.one_d else gmm_nd.nll_nd(model, self.points)
        except ValueError:
            return float("nan")

    def grad(self, model):
        try:
            if self.one_d:
                val, g = gmm1d.nll_grad(model, self.points)
                return val, g.d_weights, g.d_means, g.d_stds
            val, g = gmm_nd.nll_nd_grad(model, self.points)
            return val, g.d_weights, g.d_means, g.d_scales
        except (ValueError, np.linalg.LinAlgError):
            return float("nan"), None, None, None


def _inflate_point_masses(params, one_d):
    if one_d:
        params.scales[params.scales <= 0] = NLL_HANDOFF_SIGMA
        return
    m = params.scales.shape[1]
    for j in range(params.scales.shape[0]):
        if abs(np.linalg.det(params.scales[j])) < NLL_HANDOFF_SIGMA ** m:
            params.scales[j] = NLL_HANDOFF_SIGMA * np.eye(m)


def _run_phase(loss, params, state, steps, one_d, report, history):
    for _ in range(steps):
        loss.next_step()
        model = to_model(params, one_d)
        val, dp, dm, ds = loss.grad(model)
        if one_d:
            pen, pen_grad = sigma_penalty(params.scales)
            if pen > 0:
                report.penalty_activations += 1
                val += pen
        history.append(val)
        if not np.isfinite(val) or dp is None or not (
                np.all(np.isfinite(dp)) and np.all(np.isfinite(dm)) and np.all(np.isfinite(ds))):
            report.nonfinite_events += 1
            continue
        if one_d:
            ds = ds + pen_grad
        grads = {"weight_logits": softmax_backprop(model.weights, dp), "means": dm, "scales": ds}
        lion_step(state, params, grads)


def _fit(target, points, k, cfg, init=None):
    if k < 1:
        raise ValueError("need at least one component")
    rng = np.random.default_rng(cfg.seed)
    one_d = isinstance(target, Gmm1)
    params = init.copy() if init is not None else init_params(target, k, cfg.lrs(), rng)
    params.lrs = cfg.lrs()
    init_scales = params.scales.copy()
    state = LionState(cfg.beta1, cfg.beta2)
    report = FitReport(None, None, float("nan"), float("nan"))
    history = []

    if cfg.loss_kind in ("nll", "sc2+nll") and points is None:
        raise ValueError("likelihood losses need data points")

    if cfg.loss_kind == "nll":
        loss = _NllLoss(points, one_d)
        report.nll_start = 0
        report.initial_loss = loss.value(to_model(params, one_d))
        _run_phase(loss, params, state, cfg.steps, one_d, report, history)
        report.phases.append(("nll", cfg.steps))
    else:
        loss = _Sc2Loss(target, cfg, rng)
        report.initial_loss = loss.value(to_model(params, one_d))
        _run_phase(loss, params, state, cfg.steps, one_d, report, history)
        report.phases.append(("sc2", cfg.steps))
        if cfg.loss_kind == "sc2+nll":
            report.sc2_final_loss = loss.value(to_model(params, one_d))
            _inflate_point_masses(params, one_d)
            loss = _NllLoss(points, one_d)
            report.nll_start = len(history)
            _run_phase(loss, params, state, cfg.nll_steps, one_d, report, history)
            report.phases.append(("nll", cfg.nll_steps))
    model = to_model(params, one_d)
    report.final_loss = loss.value(model)
    report.model = model
    report.loss_history = np.asarray(history, dtype=float)
    if not one_d:
        with np.errstate(divide="ignore", invalid="ignore"):
            report.det_ratios = (np.linalg.det(params.scales) / np.linalg.det(init_scales)) ** 2
    if report.nonfinite_events:
        log.warning("%d steps skipped on non-finite loss", report.nonfinite_events)
    return report


def _as_target(points):
    pts = np.asarray(points, dtype=float)
    if pts.size == 0:
        raise ValueError("no data points")
    if pts.ndim == 1 or pts.shape[1] == 1:
        pts = pts.ravel()
        return gmm1d.from_points(pts), pts
    return GmmN.from_points(pts), pts


def fit_gmm_to_points(points, k, cfg, init=None):
    """Fit ``k`` components to a point cloud (1-D array or ``(N, m)``)."""
    target, pts = _as_target(points)
    return _fit(target, pts, k, cfg, init)


def fit_gmm_to_gmm(target, k, cfg, init=None):
    """Fit ``k`` components directly to another mixture, without sampling it."""
    return _fit(target, None, k, cfg, init)
