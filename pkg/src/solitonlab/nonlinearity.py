"""Perturbation models g for the cubic focusing Schrodinger equation.

The equation of interest carries a cubic main term plus a perturbation
g(|psi|^2) psi.  Supported shapes: a single power a*s^sigma with sigma > 1,
a finite sum of such powers with strictly increasing exponents (leading
coefficient positive), and the zero perturbation.  Every derived scalar
has a closed form per term, so evaluation is exact up to rounding; the
only numerics in this module is the sampled sup in `epsilon_omega` for
multi-term models.

Scalars:
    B(s)            = -3 g(s) + s g'(s) + 4 G(s)/s, per-term closed form
    epsilon_omega   = max_{0<=k<=4} sup_{0<=s<=3 omega} |s^{k-1} g^(k)(s)|
    h2_ratio        = int B(omega Q^2) dy / (omega eps^2), the reciprocal
                      of twice the smallness ratio used by the hypotheses
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UnsupportedOrderError
from .quad import grid_trapz

__all__ = ["NonlinearityModel", "eval_g", "eval_G", "eval_B", "eval_sg",
           "epsilon_omega", "h2_ratio"]

MAX_ORDER = 5


def _falling(sigma, k):
    out = 1.0
    for i in range(k):
        out *= sigma - i
    return out


@dataclass(frozen=True)
class NonlinearityModel:
    """Finite power-sum perturbation g(s) = sum_i a_i s^{sigma_i}."""

    terms: tuple[tuple[float, float], ...]

    def __post_init__(self):
        sigmas = [s for _, s in self.terms]
        if any(s <= 1.0 for s in sigmas):
            raise DomainError("every exponent must exceed 1")
        if any(s2 <= s1 for s1, s2 in zip(sigmas, sigmas[1:])):
            raise DomainError("exponents must be strictly increasing")
        if len(self.terms) == 1 and self.terms[0][0] == 0.0:
            raise DomainError("power model needs a nonzero coefficient")
        if len(self.terms) > 1 and self.terms[0][0] <= 0.0:
            raise DomainError("leading coefficient must be positive")

    @classmethod
    def power(cls, a, sigma):
        return cls(((float(a), float(sigma)),))

    @classmethod
    def polynomial(cls, terms):
        return cls(tuple((float(a), float(s)) for a, s in terms))

    @classmethod
    def zero(cls):
        return cls(())

    @property
    def kind(self):
        if not self.terms:
            return "zero"
        return "power" if len(self.terms) == 1 else "polynomial"


def _check_s(s):
    s = np.atleast_1d(np.asarray(s, dtype=float))
    if np.any(s < 0.0):
        raise DomainError("g is only defined for s >= 0")
    return s


def _scalar(x, scalar_in):
    return float(x[0]) if scalar_in else x


def eval_g(model, s, k=0):
    """k-th derivative of g at s >= 0 (k <= 5).

    At s = 0 the analytic limit is returned: 0 when sigma > k, the falling
    factorial coefficient when sigma == k, +-inf for non-integer sigma < k
    (the derivative genuinely diverges there).
    """
    if not isinstance(k, (int, np.integer)) or k < 0:
        raise UnsupportedOrderError("derivative order must be a nonnegative int")
    if k > MAX_ORDER:
        raise UnsupportedOrderError(f"derivative order {k} > {MAX_ORDER}")
    scalar_in = np.isscalar(s)
    s = _check_s(s)
    out = np.zeros_like(s)
    pos = s > 0.0
    for a, sigma in model.terms:
        c = a * _falling(sigma, k)
        if c == 0.0:
            continue
        out[pos] += c * s[pos] ** (sigma - k)
        if sigma > k:
            pass  # limit 0 at s = 0
        elif sigma == k:
            out[~pos] += c
        else:
            out[~pos] += np.inf * np.sign(c)
    return _scalar(out, scalar_in)


def eval_sg(model, s, k):
    """s^{k-1} g^{(k)}(s), the combination the hypotheses bound.

    Per term this is a * falling(sigma,k) * s^{sigma-1}, which stays finite
    down to s = 0 for every k <= 5, so no special casing is needed.
    """
    if not isinstance(k, (int, np.integer)) or not 0 <= k <= MAX_ORDER:
        raise UnsupportedOrderError(f"order must be in 0..{MAX_ORDER}")
    scalar_in = np.isscalar(s)
    s = _check_s(s)
    out = np.zeros_like(s)
    for a, sigma in model.terms:
        c = a * _falling(sigma, k)
        if c != 0.0:
            out += c * s ** (sigma - 1.0)
    return _scalar(out, scalar_in)


def eval_G(model, s):
    """Antiderivative G(s) = int_0^s g."""
    scalar_in = np.isscalar(s)
    s = _check_s(s)
    out = np.zeros_like(s)
    for a, sigma in model.terms:
        out += a / (sigma + 1.0) * s ** (sigma + 1.0)
    return _scalar(out, scalar_in)


def G_over_s(model, s):
    """G(s)/s with the analytic limit 0 at s = 0."""
    scalar_in = np.isscalar(s)
    s = _check_s(s)
    out = np.zeros_like(s)
    for a, sigma in model.terms:
        out += a / (sigma + 1.0) * s ** sigma
    return _scalar(out, scalar_in)


def eval_B(model, s):
    """B(s) = -3 g + s g' + 4 G/s; per term a (sigma-1)^2/(sigma+1) s^sigma."""
    scalar_in = np.isscalar(s)
    s = _check_s(s)
    out = np.zeros_like(s)
    for a, sigma in model.terms:
        out += a * (sigma - 1.0) ** 2 / (sigma + 1.0) * s ** sigma
    return _scalar(out, scalar_in)


def _golden_max(fn, lo, hi, iters=80):
    """Golden-section maximization of fn on [lo, hi]."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(iters):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
    m = 0.5 * (a + b)
    return max(fn(m), fc, fd)


def epsilon_omega(model, omega, samples=512):
    """max over k <= 4 of sup_{[0, 3 omega]} |s^{k-1} g^(k)(s)|.

    A single power is monotone in s, so the sup sits at s = 3 omega and is
    analytic.  Multi-term models are sampled and refined by golden section
    around the best sample.
    """
    if omega <= 0.0:
        raise DomainError("omega must be positive")
    if not model.terms:
        return 0.0
    s_hi = 3.0 * omega
    best = 0.0
    for k in range(5):
        if len(model.terms) == 1:
            a, sigma = model.terms[0]
            val = abs(a * _falling(sigma, k)) * s_hi ** (sigma - 1.0)
        else:
            grid = np.linspace(0.0, s_hi, samples + 1)
            phi = np.abs(eval_sg(model, grid, k))
            j = int(np.argmax(phi))
            lo = grid[max(j - 1, 0)]
            hi = grid[min(j + 1, samples)]
            val = _golden_max(lambda s: abs(eval_sg(model, float(s), k)), lo, hi)
        best = max(best, val)
    return best


def h2_ratio(model, profile):
    """int B(omega Q^2) dy / (omega eps_omega^2) on the profile's grid.

    Equals 1/(2 rho_omega) identically; the zero model returns 0 by
    convention (no perturbation, nothing to compare).
    """
    eps = epsilon_omega(model, profile.omega) if model.terms else 0.0
    if eps == 0.0:
        return 0.0
    Bvals = eval_B(model, profile.omega * profile.Q ** 2)
    integral = grid_trapz(Bvals, profile.grid.h)
    return integral / (profile.omega * eps * eps)
