"""Quadrature and finite-difference helpers shared across the laboratory.

Everything here works on uniform grids.  The kernel routines apply the
free resolvent kernels exp(-mu|y-z|) and |y-z| (and their y-derivatives)
to even source fields given on the half-line grid, folding z -> -z and
adding the Euler-Maclaurin h^2 correction for the derivative kink that
sits exactly on a node.  With the correction the composite trapezoid sum
is O(h^4) against these kernels, which is what the spectral constants
downstream need.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

__all__ = [
    "grid_trapz",
    "half_trapz_weights",
    "cumtrapz0",
    "cumtrapz0_corrected",
    "exp_kernel_apply",
    "abs_kernel_apply",
    "sin_volterra_apply",
    "tail_cos",
    "tail_sin",
    "tail_poly_cos",
    "tail_poly_sin",
    "fd_stencil",
    "fd_derivative",
]

_CHUNK = 512


def grid_trapz(f, h):
    """Trapezoid rule with uniform spacing h."""
    f = np.asarray(f, dtype=float)
    return h * (f.sum() - 0.5 * (f[0] + f[-1]))


def half_trapz_weights(npts, h):
    """Half-line weights whose fold reproduces the full-line trapezoid.

    The folded kernel K(y,z) + K(y,-z) already doubles every column,
    including z = 0 where both terms coincide, so the weights are the
    plain [0, L] trapezoid ones: h/2 at both ends.
    """
    w = np.full(npts, h)
    w[0] = 0.5 * h
    w[-1] = 0.5 * h
    return w


def cumtrapz0(f, h):
    """Cumulative trapezoid from node 0; result[0] = 0."""
    f = np.asarray(f, dtype=float)
    out = np.empty_like(f)
    out[0] = 0.0
    np.cumsum(0.5 * h * (f[1:] + f[:-1]), out=out[1:])
    return out


def cumtrapz0_corrected(f, fp, h):
    """Cumulative trapezoid with endpoint-derivative correction, O(h^4).

    int_0^{y_i} f = T_i - h^2/12 (f'(y_i) - f'(0)) + O(h^4).
    """
    return cumtrapz0(f, h) - (h * h / 12.0) * (np.asarray(fp) - fp[0])


def _fold_chunks(y_eval, z, w_eff, kernel):
    """Sum_j kernel(y_i, z_j) w_eff_j, chunked over rows to bound memory."""
    out = np.empty(y_eval.size)
    for lo in range(0, y_eval.size, _CHUNK):
        hi = min(lo + _CHUNK, y_eval.size)
        yy = y_eval[lo:hi, None]
        out[lo:hi] = kernel(yy, z[None, :]) @ w_eff
    return out


def exp_kernel_apply(y_eval, z, w, mu, h, deriv=0, wp=None, correct=True):
    """Apply the exp(-mu|y-z|) kernel (or its d/dy) to an even field w.

    w lives on the half-line nodes z (uniform spacing h, z[0] = 0); the
    returned array is the full-line integral evaluated at y_eval >= 0.
    deriv=0:  v(y) = int exp(-mu|y-z'|) w(z') dz'
    deriv=1:  v(y) = int -mu sgn(y-z') exp(-mu|y-z'|) w(z') dz'
    The kink at z'=y lands on a node whenever y is one of the z nodes;
    `correct` adds the analytic h^2 Euler-Maclaurin jump term there
    (deriv=1 needs wp = w' samples for it).
    """
    y_eval = np.asarray(y_eval, dtype=float)
    z = np.asarray(z, dtype=float)
    w = np.asarray(w, dtype=float)
    wts = half_trapz_weights(z.size, h)
    w_eff = wts * w
    if deriv == 0:
        def kernel(yy, zz):
            return np.exp(-mu * np.abs(yy - zz)) + np.exp(-mu * (yy + zz))
    elif deriv == 1:
        def kernel(yy, zz):
            d = yy - zz
            # the mirror term carries sgn(y+z): zero at the (0,0) corner
            return -mu * (np.sign(d) * np.exp(-mu * np.abs(d))
                          + np.sign(yy + zz) * np.exp(-mu * (yy + zz)))
    else:
        raise ValueError("deriv must be 0 or 1")
    out = _fold_chunks(y_eval, z, w_eff, kernel)
    if correct:
        inside = y_eval <= z[-1] + 0.5 * h
        idx = np.rint(y_eval[inside] / h).astype(int)
        if deriv == 0:
            out[inside] += (h * h / 12.0) * (-2.0 * mu) * w[idx]
        else:
            if wp is None:
                raise ValueError("deriv=1 kink correction needs wp")
            out[inside] += (h * h / 12.0) * (2.0 * mu) * np.asarray(wp)[idx]
    return out


def abs_kernel_apply(y_eval, z, w, h, deriv=0, wp=None, correct=True):
    """Same contract as exp_kernel_apply for the kernel |y-z| (or sgn(y-z))."""
    y_eval = np.asarray(y_eval, dtype=float)
    z = np.asarray(z, dtype=float)
    w = np.asarray(w, dtype=float)
    wts = half_trapz_weights(z.size, h)
    w_eff = wts * w
    if deriv == 0:
        def kernel(yy, zz):
            return np.abs(yy - zz) + (yy + zz)
    elif deriv == 1:
        def kernel(yy, zz):
            return np.sign(yy - zz) + np.sign(yy + zz)
    else:
        raise ValueError("deriv must be 0 or 1")
    out = _fold_chunks(y_eval, z, w_eff, kernel)
    if correct:
        inside = y_eval <= z[-1] + 0.5 * h
        idx = np.rint(y_eval[inside] / h).astype(int)
        if deriv == 0:
            out[inside] += (h * h / 12.0) * 2.0 * w[idx]
        else:
            if wp is None:
                raise ValueError("deriv=1 kink correction needs wp")
            out[inside] += (h * h / 12.0) * (-2.0) * np.asarray(wp)[idx]
    return out


def sin_volterra_apply(y, F, tau, h, Fp=None):
    """Volterra application V(y) = (1/tau) int_0^y sin(tau(y-z)) F(z) dz.

    Returns (V, V') on the half-line grid y.  Expanding the sine turns the
    evaluation into two cumulative integrals, and the same cumulatives give
    the derivative V'(y) = int_0^y cos(tau(y-z)) F(z) dz for free.  Passing
    Fp upgrades the cumulatives to their endpoint-corrected O(h^4) form.
    """
    y = np.asarray(y, dtype=float)
    F = np.asarray(F, dtype=float)
    c = np.cos(tau * y)
    s = np.sin(tau * y)
    if Fp is None:
        C = cumtrapz0(c * F, h)
        S = cumtrapz0(s * F, h)
    else:
        Fp = np.asarray(Fp, dtype=float)
        C = cumtrapz0_corrected(c * F, c * Fp - tau * s * F, h)
        S = cumtrapz0_corrected(s * F, s * Fp + tau * c * F, h)
    V = (s * C - c * S) / tau
    Vp = c * C + s * S
    return V, Vp


def _tail_p(beta, tau):
    return complex(beta, -tau)


def tail_cos(beta, tau, T):
    """int_T^inf exp(-beta y) cos(tau y) dy."""
    p = _tail_p(beta, tau)
    return (np.exp(-p * T) / p).real


def tail_sin(beta, tau, T):
    """int_T^inf exp(-beta y) sin(tau y) dy."""
    p = _tail_p(beta, tau)
    return (np.exp(-p * T) / p).imag


def tail_poly_cos(beta, tau, T):
    """int_T^inf y exp(-beta y) cos(tau y) dy."""
    p = _tail_p(beta, tau)
    return (np.exp(-p * T) * (T * p + 1.0) / (p * p)).real


def tail_poly_sin(beta, tau, T):
    """int_T^inf y exp(-beta y) sin(tau y) dy."""
    p = _tail_p(beta, tau)
    return (np.exp(-p * T) * (T * p + 1.0) / (p * p)).imag


@lru_cache(maxsize=64)
def fd_stencil(offsets, m):
    """Finite-difference weights for the m-th derivative on integer offsets.

    Solved from the moment conditions sum_j w_j k_j^i = m! delta_{i,m};
    exactness degree len(offsets)-1.
    """
    import math

    k = np.array(offsets, dtype=float)
    n = k.size
    A = np.vander(k, n, increasing=True).T
    b = np.zeros(n)
    b[m] = math.factorial(m)
    return np.linalg.solve(A, b)


def fd_derivative(f, h, m, pad="zero"):
    """m-th derivative of uniformly sampled f by a 9-point stencil.

    pad: "zero" assumes f vanishes beyond both ends (decaying fields),
    "even"/"odd" reflect about the first node (half-line fields with
    definite parity); the right end is always zero-padded.
    """
    f = np.asarray(f, dtype=float)
    w = fd_stencil(tuple(range(-4, 5)), m)
    if pad == "zero":
        left = np.zeros(4)
    elif pad == "even":
        left = f[4:0:-1]
    elif pad == "odd":
        left = -f[4:0:-1]
    else:
        raise ValueError("pad must be zero, even or odd")
    ext = np.concatenate([left, f, np.zeros(4)])
    out = np.zeros_like(f)
    for j, wj in enumerate(w):
        if wj != 0.0:
            out += wj * ext[j:j + f.size]
    return out / h ** m
