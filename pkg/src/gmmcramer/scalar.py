"""Scalar Gaussian kernels shared by every loss in the package.

``phi_cdf``/``phi_pdf`` are the standard normal CDF and density, ``u_fn`` is
the antiderivative of the CDF (``x*Phi(x) + phi(x)``, i.e. GELU plus the
density) and ``v_fn`` its even part.  ``cross_term`` is the closed form of
``int (1 - Phi_{m1,s1}(x)) Phi_{m2,s2}(x) dx``.

Everything is double precision.  The CDF goes through ``erfc`` so the left
tail keeps full relative accuracy; the tanh approximation of GELU is never
used.
"""

import math

import numpy as np
from scipy import special

#: Softening added under the square root of ``s1**2 + s2**2``.
EPS_SOFT = 1e-20

SQRT2 = math.sqrt(2.0)
INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def phi_cdf(x):
    """Standard normal CDF."""
    return 0.5 * math.erfc(-x / SQRT2)


def phi_pdf(x):
    """Standard normal density."""
    return INV_SQRT_2PI * math.exp(-0.5 * x * x)


def u_fn(x):
    """``U(x) = x*Phi(x) + phi(x)``; ``U' = Phi`` and ``U(x) - U(-x) = x``."""
    if x >= 0.0:
        # x * (1 - Phi(-x)) keeps the large-x asymptote exact
        return x - x * phi_cdf(-x) + phi_pdf(x)
    return x * phi_cdf(x) + phi_pdf(x)


def v_fn(x):
    """``V(x) = (U(x) + U(-x)) / 2 = x*(Phi(x) - 1/2) + phi(x)``, even in x."""
    ax = abs(x)
    return 0.5 * ax * math.erf(ax / SQRT2) + phi_pdf(ax)


def cross_term(m1, s1, m2, s2):
    """Closed form of ``int (1 - CDF(N(m1, s1^2))) * CDF(N(m2, s2^2)) dx``.

    Degenerate components (``s = 0``) are allowed; with both standard
    deviations zero the value tends to ``max(m1 - m2, 0)``.
    """
    z = math.sqrt(s1 * s1 + s2 * s2 + EPS_SOFT)
    return z * u_fn((m1 - m2) / z)


# -- array versions, used by the numpy fallback core and by tests ----------

def phi_cdf_array(x):
    return special.ndtr(np.asarray(x, dtype=float))


def phi_pdf_array(x):
    x = np.asarray(x, dtype=float)
    return INV_SQRT_2PI * np.exp(-0.5 * x * x)


def v_fn_array(x):
    ax = np.abs(np.asarray(x, dtype=float))
    return 0.5 * ax * special.erf(ax / SQRT2) + phi_pdf_array(ax)
