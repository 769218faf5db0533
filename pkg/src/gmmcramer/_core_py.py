"""Pure numpy twin of the compiled ``_core`` extension.

Same signatures and the same math; used when the extension is not built or
when ``GMMCRAMER_PURE=1`` is set.
"""

import numpy as np
from scipy import special

from .scalar import EPS_SOFT, INV_SQRT_2PI, SQRT2


def _pdf(x):
    return INV_SQRT_2PI * np.exp(-0.5 * x * x)


def _v(x):
    ax = np.abs(x)
    return 0.5 * ax * special.erf(ax / SQRT2) + _pdf(ax)


def _pairs(ma, sa, mb, sb):
    """``z V(h/z)``, the matching ``erf`` and ``phi / z`` terms for all pairs.

    Pairs of point masses take the exact limit instead of the softened one.
    """
    q = sa[:, :, None] ** 2 + sb[:, None, :] ** 2
    h = ma[:, :, None] - mb[:, None, :]
    both = q == 0.0
    z = np.sqrt(q + EPS_SOFT)
    x = h / z
    zv = np.where(both, 0.5 * np.abs(h), z * _v(x))
    erf = np.where(both, np.sign(h), special.erf(x / SQRT2))
    pdf_z = np.where(both, 0.0, _pdf(x) / z)
    return zv, erf, pdf_z


def cross_energy(p1, m1, s1, p2, m2, s2, want_grad=False):
    zv, erf, pdf_z = _pairs(m1, s1, m2, s2)
    w = p2[:, None, :]
    row = np.sum(w * zv, axis=2)
    val = np.sum(p1 * row, axis=1)
    if not want_grad:
        return val
    dm = p1 * np.sum(w * 0.5 * erf, axis=2)
    ds = p1 * np.sum(w * s1[:, :, None] * pdf_z, axis=2)
    return val, row, dm, ds


def self_energy(p, m, s, want_grad=False):
    zv, erf, pdf_z = _pairs(m, s, m, s)
    pp = p[:, :, None] * p[:, None, :]
    val = np.sum(pp * zv, axis=(1, 2))
    if not want_grad:
        return val
    dp = 2.0 * np.sum(p[:, None, :] * zv, axis=2)
    dm = np.sum(pp * erf, axis=2)
    ds = 2.0 * np.sum(pp * s[:, :, None] * pdf_z, axis=2)
    return val, dp, dm, ds


def c2_grad(p1, m1, s1, p2, m2, s2):
    """``2 * cross - self1`` per row and its gradient for the first mixture.

    Cross and self terms are combined before summing over partners, so the
    gradient is exactly zero when both mixtures are bitwise equal.
    """
    n, nn = m1.shape[1], m2.shape[1]
    k = max(n, nn)

    def padded(p, m, s):
        # zero-weight partners make both partner sets the same length
        extra = k - m.shape[1]
        pad = ((0, 0), (0, extra))
        return np.pad(p, pad), np.pad(m, pad), np.pad(s, pad)

    q2, mq, sq = padded(p2, m2, s2)
    q1, mp, sp = padded(p1, m1, s1)
    zc, ec, pc = _pairs(m1, s1, mq, sq)
    zs, es, ps = _pairs(m1, s1, mp, sp)
    w2, w1 = q2[:, None, :], q1[:, None, :]
    gp = np.sum(w2 * zc - w1 * zs, axis=2)
    gm = np.sum(w2 * ec - w1 * es, axis=2)
    gs = np.sum(w2 * pc - w1 * ps, axis=2)
    val = np.sum(p1 * (np.sum(w2 * zc, axis=2) + gp), axis=1)
    return val, 2.0 * gp, p1 * gm, 2.0 * p1 * s1 * gs
