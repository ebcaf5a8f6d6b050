"""Fermi-golden-rule constants for the damped internal mode.

Two routes to the damping coefficient.  The general route builds the
bounded oscillatory pair (g1, g2) at a given omega by solving the
coupled Volterra/resolvent integral system for the even corrections,
then pairs the quadratic interaction fields against it.  The explicit
route evaluates the leading power-law constant Gamma0(sigma) from
closed-form kernels on the cubic ground state; a moment table verifies
the recurrences that make Gamma0 vanish at sigma = 1.

The pair solve runs the Nystrom discretisation of the integral system
on the active region where the coupling potentials are above roundoff,
then extends every field across the whole grid with the same corrected
kernels, so values, first derivatives and tails are all consistent.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial

import numpy as np

from . import nonlinearity as nl
from . import quad
from .errors import DomainError, IllConditionedError
from .profile import Grid, lambda_omega_Q, profile_omega_derivative, solve_profile
from .spectral import _lin_potentials, compute_potentials

__all__ = [
    "FgrPair",
    "Gamma0Result",
    "MomentTable",
    "solve_g_pair",
    "gamma_general",
    "gamma0",
    "gamma0_scan",
    "moment_table",
]

SQRT2 = math.sqrt(2.0)

# coupling magnitudes below this fraction of the peak contribute nothing
# representable to the dense solve
_ACTIVE_CUT = 1e-16


# ---------------------------------------------------------------------------
# the oscillatory pair


@dataclass
class FgrPair:
    """Bounded pair (h1, h2) -> (g1, g2) with tails and pairing data.

    h_j = -cos(tau y) + O(eps); g1 applies the squared adjoint factor to
    h1 and g2 closes the pair through the plus-operator.  The ip_*/scale_*
    entries are full-line pairings (tail-corrected) and their absolute
    normalisations; orthogonality_residuals() reduces them to the four
    dimensionless residuals that should vanish.
    """

    model: object
    omega: float
    grid: Grid
    lam: float
    tau: float
    mu: float
    eps_omega: float
    y: np.ndarray
    ell1: np.ndarray
    ell2: np.ndarray
    h1: np.ndarray
    h2: np.ndarray
    h1p: np.ndarray
    h2p: np.ndarray
    g1: np.ndarray
    g1p: np.ndarray
    g2: np.ndarray
    tail_g_cos: float
    tail_g_sin: float
    sup_h1_dev: float
    sup_h2_dev: float
    upsilon_norm: float
    ip_g1_Q: float
    scale_g1_Q: float
    ip_g2_LamQ: float
    scale_g2_LamQ: float
    ip_g1_V2: float
    scale_g1_V2: float
    ip_g2_V1: float
    scale_g2_V1: float

    def orthogonality_residuals(self):
        return {
            "g1_Q": abs(self.ip_g1_Q) / self.scale_g1_Q,
            "g2_LamQ": abs(self.ip_g2_LamQ) / self.scale_g2_LamQ,
            "g1_V2": abs(self.ip_g1_V2) / self.scale_g1_V2,
            "g2_V1": abs(self.ip_g2_V1) / self.scale_g2_V1,
        }


def _volterra_matrix(ya, tau, h):
    """Trapezoid Nystrom matrix of (1/tau) int_0^{y_i} sin(tau(y_i-z)) F(z) dz.

    Includes the h^2 endpoint terms; they assume F even, which holds for
    every field the pair solve feeds through it.
    """
    na = ya.size
    st = np.sin(tau * ya)
    ct = np.cos(tau * ya)
    M = (np.outer(st, ct) - np.outer(ct, st)) / tau
    W = np.tril(np.full((na, na), h))
    W[:, 0] = 0.5 * h
    np.fill_diagonal(W, 0.5 * h)
    M = M * W
    idx = np.arange(na)
    M[idx, idx] += h * h / 12.0
    M[:, 0] -= (h * h / 12.0) * ct
    M[0, :] = 0.0
    return M


def _exp_matrix(ya, mu, h):
    """Folded resolvent matrix of (1/(2 mu)) int exp(-mu|y-z|) F(z) dz."""
    na = ya.size
    d = ya[:, None] - ya[None, :]
    K = (np.exp(-mu * np.abs(d)) + np.exp(-mu * (ya[:, None] + ya[None, :])))
    G = K / (2.0 * mu) * quad.half_trapz_weights(na, h)[None, :]
    idx = np.arange(na)
    G[idx, idx] -= h * h / 12.0
    return G


def solve_g_pair(model, omega, mode, grid=None) -> FgrPair:
    """Solve the even integral system for (l1, l2) and assemble the pair.

    mode=None is accepted only when the coupling potentials vanish
    identically (the pair then sits at the continuum edge, lam = 1, and
    h_j = -cos y exactly).  Refuses with IllConditionedError when the
    Nystrom matrix norm reaches 1, i.e. the contraction argument behind
    the solve has left its range.
    """
    if omega <= 0.0:
        raise DomainError("omega must be positive")
    if mode is None:
        if grid is None:
            raise DomainError("a grid is required when no mode is supplied")
        prof = solve_profile(model, omega, grid)
        pots = compute_potentials(model, prof)
        if max(np.abs(pots.b_plus).max(), np.abs(pots.b_minus).max()) != 0.0:
            raise DomainError("an internal mode is required once the coupling "
                              "potentials are nonzero")
        lam = 1.0
    else:
        if grid is None:
            grid = mode.grid
        elif grid != mode.grid:
            raise DomainError("grid must match the mode grid")
        prof = mode.profile
        pots = mode.potentials
        lam = mode.lam
    if not lam > 0.5:
        raise DomainError("mode frequency at or below half the edge: tau "
                          "would be imaginary")

    tau = math.sqrt(2.0 * lam - 1.0)
    mu = math.sqrt(2.0 * lam + 1.0)
    yh = grid.y_half
    h = grid.h
    nh = yh.size
    bp = pots.b_plus
    bm = pots.b_minus
    ct = np.cos(tau * yh)
    st = np.sin(tau * yh)

    env = np.abs(bp) + np.abs(bm)
    bmax = env.max()
    l1 = np.zeros(nh)
    l2 = np.zeros(nh)
    upsilon_norm = 0.0
    if bmax > 0.0:
        na = int(np.nonzero(env > _ACTIVE_CUT * bmax)[0][-1]) + 1
        na = min(na + 8, nh)
        ya = yh[:na]
        M = _volterra_matrix(ya, tau, h)
        G = _exp_matrix(ya, mu, h)
        U = np.empty((2 * na, 2 * na))
        U[:na, :na] = M * bp[None, :na]
        U[:na, na:] = M * bm[None, :na]
        U[na:, :na] = -G * bm[None, :na]
        U[na:, na:] = -G * bp[None, :na]
        row = np.abs(U).sum(axis=1).max()
        col = np.abs(U).sum(axis=0).max()
        upsilon_norm = min(row, col)
        if upsilon_norm >= 1.0:
            raise IllConditionedError(
                "integral-system norm %.3f >= 1: omega (or the coupling "
                "strength) is too large for the pair solve" % upsilon_norm)
        rhs = np.concatenate([-M @ (bp[:na] * ct[:na]),
                              G @ (bm[:na] * ct[:na])])
        sol = np.linalg.solve(np.eye(2 * na) - U, rhs)
        l1[:na] = sol[:na]
        l2[:na] = sol[na:]

    # re-extend across the full grid with the corrected kernels; two passes
    # feed the first-pass derivatives back into the kink corrections
    dbp = pots.db_plus
    dbm = pots.db_minus
    l1p = np.zeros(nh)
    l2p = np.zeros(nh)
    F = np.zeros(nh)
    for final in (False, True):
        F = bp * (l1 - ct) + bm * l2
        E = bm * (l1 - ct) + bp * l2
        if final:
            Fp = dbp * (l1 - ct) + bp * (l1p + tau * st) + dbm * l2 + bm * l2p
            Ep = dbm * (l1 - ct) + bm * (l1p + tau * st) + dbp * l2 + bp * l2p
            l1, l1p = quad.sin_volterra_apply(yh, F, tau, h, Fp=Fp)
            K = quad.exp_kernel_apply(yh, yh, E, mu, h, deriv=0)
            Kp = quad.exp_kernel_apply(yh, yh, E, mu, h, deriv=1, wp=Ep)
        else:
            l1, l1p = quad.sin_volterra_apply(yh, F, tau, h)
            K = quad.exp_kernel_apply(yh, yh, E, mu, h, deriv=0)
            Kp = quad.exp_kernel_apply(yh, yh, E, mu, h, deriv=1, correct=False)
        l2 = -K / (2.0 * mu)
        l2p = -Kp / (2.0 * mu)

    # oscillation amplitudes once the source is exhausted: l1 tends to
    # A_s cos + A_c sin, l2 dies off at rate mu
    F = bp * (l1 - ct) + bm * l2
    A_c = quad.grid_trapz(ct * F, h) / tau
    A_s = -quad.grid_trapz(st * F, h) / tau
    a_h = A_s - 1.0
    b_h = A_c

    h1 = -ct + l1 + l2
    h2 = -ct + l1 - l2
    h1p = tau * st + l1p + l2p
    h2p = tau * st + l1p - l2p

    ap = pots.a_plus
    am = pots.a_minus
    dap = pots.da_plus
    dam = dbp - dbm
    d2ap = pots.d2b_plus + pots.d2b_minus
    h1pp = (1.0 + ap) * h1 - 2.0 * lam * h2
    h2pp = (1.0 + am) * h2 - 2.0 * lam * h1
    h1ppp = (1.0 + ap) * h1p + dap * h1 - 2.0 * lam * h2p
    h1pppp = (1.0 + ap) * h1pp + 2.0 * dap * h1p + d2ap * h1 - 2.0 * lam * h2pp

    n = grid.n
    Q = prof.Q[n:]
    Qp = prof.Qp[n:]
    Qpp = prof.Qpp[n:]
    s = omega * Q * Q
    gp = nl.eval_sg(model, s, 1)
    sg2 = nl.eval_sg(model, s, 2)
    xi = Qp / Q
    eta = Qpp / Q
    etap = -2.0 * Q * Qp * (1.0 + gp)
    etapp = -2.0 * (Qp * Qp + Q * Qpp) * (1.0 + gp) - 4.0 * Qp * Qp * sg2
    xip = eta - xi * xi
    xipp = etap - 2.0 * xi * xip

    g1 = h1pp + 2.0 * xi * h1p + eta * h1
    g1p = h1ppp + 2.0 * xip * h1p + 2.0 * xi * h1pp + etap * h1 + eta * h1p
    g1pp = (h1pppp + 2.0 * xipp * h1p + 4.0 * xip * h1pp + 2.0 * xi * h1ppp
            + etapp * h1 + 2.0 * etap * h1p + eta * h1pp)
    c_plus, _ = _lin_potentials(model, omega, Q)
    g2 = (-g1pp + c_plus * g1) / (2.0 * lam)

    # both g tails reduce to the same cos/sin pair: (1+tau^2)/(2 lam) = 1
    tg_c = (1.0 - tau * tau) * a_h - 2.0 * tau * b_h
    tg_s = (1.0 - tau * tau) * b_h + 2.0 * tau * a_h

    L = grid.half_length
    cQ = prof.Q[-1] * math.exp(L)
    ip_g1_Q = 2.0 * (quad.grid_trapz(g1 * Q, h)
                     + cQ * (tg_c * quad.tail_cos(1.0, tau, L)
                             + tg_s * quad.tail_sin(1.0, tau, L)))
    scale_g1_Q = 2.0 * quad.grid_trapz(np.abs(g1) * Q, h)

    if bmax > 0.0:
        dQ = profile_omega_derivative(model, omega, grid)
    else:
        dQ = np.zeros_like(prof.Q)
    lamQ = lambda_omega_Q(prof, dQ)[n:]
    P0 = 0.5 * cQ + omega * dQ[-1] * math.exp(L)
    P1 = -0.5 * cQ
    ip_g2_LamQ = 2.0 * (quad.grid_trapz(g2 * lamQ, h)
                        + tg_c * (P0 * quad.tail_cos(1.0, tau, L)
                                  + P1 * quad.tail_poly_cos(1.0, tau, L))
                        + tg_s * (P0 * quad.tail_sin(1.0, tau, L)
                                  + P1 * quad.tail_poly_sin(1.0, tau, L)))
    scale_g2_LamQ = 2.0 * quad.grid_trapz(np.abs(g2) * np.abs(lamQ), h)

    if mode is not None:
        tV = mode.tail_V
        al = mode.alpha
        tail_pair = (tg_c * quad.tail_cos(al, tau, L)
                     + tg_s * quad.tail_sin(al, tau, L)) * tV
        ip_g1_V2 = 2.0 * (quad.grid_trapz(g1 * mode.V2, h) + tail_pair)
        scale_g1_V2 = 2.0 * quad.grid_trapz(np.abs(g1) * np.abs(mode.V2), h)
        ip_g2_V1 = 2.0 * (quad.grid_trapz(g2 * mode.V1, h) + tail_pair)
        scale_g2_V1 = 2.0 * quad.grid_trapz(np.abs(g2) * np.abs(mode.V1), h)
    else:
        ip_g1_V2 = ip_g2_V1 = 0.0
        scale_g1_V2 = scale_g2_V1 = 1.0

    return FgrPair(
        model=model, omega=omega, grid=grid, lam=lam, tau=tau, mu=mu,
        eps_omega=pots.eps_omega, y=yh, ell1=l1, ell2=l2,
        h1=h1, h2=h2, h1p=h1p, h2p=h2p, g1=g1, g1p=g1p, g2=g2,
        tail_g_cos=tg_c, tail_g_sin=tg_s,
        sup_h1_dev=float(np.abs(h1 + ct).max()),
        sup_h2_dev=float(np.abs(h2 + ct).max()),
        upsilon_norm=float(upsilon_norm),
        ip_g1_Q=float(ip_g1_Q), scale_g1_Q=float(scale_g1_Q),
        ip_g2_LamQ=float(ip_g2_LamQ), scale_g2_LamQ=float(scale_g2_LamQ),
        ip_g1_V2=float(ip_g1_V2), scale_g1_V2=float(scale_g1_V2),
        ip_g2_V1=float(ip_g2_V1), scale_g2_V1=float(scale_g2_V1))


def gamma_general(model, omega, mode, pair) -> float:
    """Damping coefficient at omega: projected interaction fields paired
    against (g1, g2).

    The projections subtract the V-components; with the orthogonality
    relations they change nothing beyond quadrature error, so the value
    is dominated by the two plain integrals.
    """
    if mode is None:
        raise DomainError("gamma_general needs the internal mode")
    if not math.isclose(pair.omega, omega, rel_tol=1e-12):
        raise DomainError("pair was built at a different omega")
    if pair.grid != mode.grid:
        raise DomainError("pair and mode live on different grids")
    n = mode.grid.n
    h = mode.grid.h
    Q = mode.profile.Q[n:]
    s = omega * Q * Q
    gp = nl.eval_sg(model, s, 1)
    sg2 = nl.eval_sg(model, s, 2)
    G = mode.V1 ** 2 * Q * (3.0 + 3.0 * gp + 2.0 * sg2)
    H = mode.V2 ** 2 * Q * (1.0 + gp)
    G1 = G - H
    G2 = 2.0 * mode.V1 * mode.V2 * Q * (1.0 + gp)
    # everything under these integrals dies like e^{-(1+2 alpha)|y|}
    int_G1g1 = 2.0 * quad.grid_trapz(G1 * pair.g1, h)
    int_G2g2 = 2.0 * quad.grid_trapz(G2 * pair.g2, h)
    ip_G1V1 = 2.0 * quad.grid_trapz(G1 * mode.V1, h)
    ip_G2V2 = 2.0 * quad.grid_trapz(G2 * mode.V2, h)
    gamma = (int_G1g1 + int_G2g2
             - (ip_G1V1 * pair.ip_g1_V2 + ip_G2V2 * pair.ip_g2_V1)
             / mode.ip_V1V2)
    return float(gamma)


# ---------------------------------------------------------------------------
# the explicit power-law constant


@dataclass
class Gamma0Result:
    """Gamma0(sigma) with every intermediate field retained.

    The samples live on the half grid; all are even.  err is the change
    under dropping every other node, a conservative quadrature estimate.
    """

    sigma: float
    gamma0: float
    err: float
    positive: bool
    y: np.ndarray
    A: np.ndarray
    Ap: np.ndarray
    D0: np.ndarray
    D0p: np.ndarray
    T10: np.ndarray
    T10p: np.ndarray
    T20: np.ndarray
    T20p: np.ndarray
    R1: np.ndarray
    R2: np.ndarray
    Delta1: np.ndarray
    Delta2: np.ndarray
    Delta4: np.ndarray
    Delta5: np.ndarray


def _gamma0_fields(sigma, yh, h):
    """All Gamma0 intermediates on the supplied half grid."""
    c = np.cosh(yh)
    sh = np.sinh(yh)
    th = np.tanh(yh)
    Q = SQRT2 / c
    Qp = -SQRT2 * sh / c ** 2
    Qpp = Q - Q ** 3
    Q2 = Q * Q

    # the growing even kernel solution, normalised to unit Wronskian
    A = (SQRT2 / 4.0) * (3.0 * yh * th + sh * sh - 2.0) / c
    Ap = (SQRT2 / 4.0) * (-(sh / c ** 2) * (3.0 * yh * th + sh * sh - 2.0)
                          + (3.0 * th + 3.0 * yh / c ** 2 + 2.0 * sh * c) / c)

    P = Q ** (2.0 * sigma)
    Pp = 2.0 * sigma * Q ** (2.0 * sigma - 1.0) * Qp

    f = A * P * Q
    fp = Ap * P * Q + (2.0 * sigma + 1.0) * A * P * Qp
    C = quad.cumtrapz0_corrected(f, fp, h)
    D0 = -Qp * C + A * P * Q2 / (2.0 * sigma + 2.0)
    # the product-rule cross terms cancel against the integrand
    D0p = -Qpp * C + Ap * P * Q2 / (2.0 * sigma + 2.0)

    cT1 = -(sigma - 1.0) ** 2 / (2.0 * (sigma + 1.0))
    T10 = cT1 * quad.abs_kernel_apply(yh, yh, P, h, deriv=0)
    T10p = cT1 * quad.abs_kernel_apply(yh, yh, P, h, deriv=1, wp=Pp)
    cT2 = -SQRT2 * sigma * (sigma - 1.0) / (4.0 * (sigma + 1.0))
    T20 = cT2 * quad.exp_kernel_apply(yh, yh, P, SQRT2, h, deriv=0)
    T20p = cT2 * quad.exp_kernel_apply(yh, yh, P, SQRT2, h, deriv=1, wp=Pp)

    s1 = sigma + 1.0
    Delta4 = ((13.0 * Q2 - 16.0) * Q2 * D0 - 8.0 * Qp * Q * D0p
              + 2.0 * Q * (3.0 * (1.0 - Q2) ** 2 - 1.0) * T10
              + 6.0 * Q * (2.0 - Q2) ** 2 * T20
              + 4.0 * (2.0 - 3.0 * Q2) * Qp * T10p
              + 4.0 * (4.0 - 3.0 * Q2) * Qp * T20p
              + 2.0 * sigma ** 2 * P / Q
              - (4.0 * (sigma + 2.0) / s1 + (2.0 * sigma + 1.0) ** 2) * P * Q
              + (8.0 / s1 + s1 * (2.0 * sigma + 1.0)) * P * Q ** 3)
    Delta5 = ((2.0 - 30.0 * Q2 + 29.0 * Q2 ** 2 - 8.0 * Q2 ** 3) * D0
              - 8.0 * Q ** 3 * Qp * D0p
              + 2.0 * Q * (2.0 - Q2) * (2.0 - 3.0 * Q2) * T10
              + 2.0 * Q * (3.0 * Q2 ** 2 - 10.0 * Q2 + 12.0) * T20
              + 16.0 * (1.0 - Q2) * Qp * T10p
              + 8.0 * (2.0 - Q2) * Qp * T20p
              + 2.0 * sigma * s1 * P / Q
              - (16.0 / s1 + 2.0 * sigma + (2.0 * sigma + 1.0) ** 2) * P * Q
              + (4.0 * (4.0 - sigma) / s1 + s1 * (2.0 * sigma + 1.0)) * P * Q ** 3
              - 4.0 / s1 * P * Q ** 5)

    # recombination route; the D0 block enters with a minus sign (the
    # sigma = 1 closed forms pin it down)
    R1 = (-2.0 * Q * D0 + (1.0 - Q2) * T10 + (3.0 - Q2) * T20
          + 2.0 * (Qp / Q) * (T10p + T20p) - 2.0 * P / s1)
    R2 = (-4.0 * (1.0 - Q2) * Q * D0 + 4.0 * Qp * D0p + T10 - 3.0 * T20
          + 2.0 * (Qp / Q) * (T10p - T20p)
          + 2.0 * (sigma - 1.0) / s1 * P + 2.0 / s1 * P * Q2)
    Delta1 = (6.0 * Q * (1.0 - Q2) * R1 - 2.0 * Q * R2
              + (3.0 * (1.0 - Q2) ** 2 - 1.0) * D0
              + sigma * ((2.0 * sigma + 1.0) * (1.0 - Q2) ** 2 - 1.0) * P / Q)
    Delta2 = (Q * R1 + Q * (1.0 - Q2) * R2 + (1.0 - Q2) * D0
              + sigma * (1.0 - Q2) * P / Q)

    integrand = Q2 * Delta4 * np.cos(yh) + 2.0 * (Qp / Q) * Delta5 * np.sin(yh)
    gamma = 2.0 * quad.grid_trapz(integrand, h)
    return {
        "gamma": gamma, "A": A, "Ap": Ap, "D0": D0, "D0p": D0p,
        "T10": T10, "T10p": T10p, "T20": T20, "T20p": T20p,
        "R1": R1, "R2": R2, "Delta1": Delta1, "Delta2": Delta2,
        "Delta4": Delta4, "Delta5": Delta5,
    }


def gamma0(sigma, grid=None) -> Gamma0Result:
    """Leading damping constant for g(s) = a s^sigma (per unit a).

    The formulas continue smoothly down to sigma = 1, where the value
    vanishes; sigma below 1 is out of range.
    """
    sigma = float(sigma)
    if not sigma >= 1.0:
        raise DomainError("sigma must be >= 1")
    if grid is None:
        grid = Grid(40.0, 4096)
    yh = grid.y_half
    h = grid.h
    fields = _gamma0_fields(sigma, yh, h)
    coarse = _gamma0_fields(sigma, yh[::2], 2.0 * h)
    gamma = float(fields["gamma"])
    err = abs(gamma - float(coarse["gamma"]))
    return Gamma0Result(
        sigma=sigma, gamma0=gamma, err=err, positive=gamma > 0.0, y=yh,
        A=fields["A"], Ap=fields["Ap"], D0=fields["D0"], D0p=fields["D0p"],
        T10=fields["T10"], T10p=fields["T10p"],
        T20=fields["T20"], T20p=fields["T20p"],
        R1=fields["R1"], R2=fields["R2"],
        Delta1=fields["Delta1"], Delta2=fields["Delta2"],
        Delta4=fields["Delta4"], Delta5=fields["Delta5"])


def gamma0_scan(sigma_min, sigma_max, count, grid=None, jobs=None):
    """Gamma0 on a uniform sigma grid; points are independent."""
    if not 1.0 <= sigma_min < sigma_max:
        raise DomainError("need 1 <= sigma_min < sigma_max")
    if count < 2:
        raise DomainError("count must be at least 2")
    sigmas = np.linspace(sigma_min, sigma_max, count)
    fn = partial(gamma0, grid=grid)
    if jobs is not None and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, sigmas))
    return [fn(s) for s in sigmas]


# ---------------------------------------------------------------------------
# the sigma = 1 moment table


@dataclass
class MomentTable:
    """Oscillatory moments of the cubic ground state, odd orders only.

    p, q, r, s, m are keyed by the power of Q; res_* hold the absolute
    residuals of the five integration-by-parts recurrences, and combo is
    the alternating combination that kills the constant at sigma = 1.
    """

    kmax: int
    y: np.ndarray
    t2: np.ndarray
    t2p: np.ndarray
    p: dict
    q: dict
    r: dict
    s: dict
    m: dict
    res_p: dict
    res_q: dict
    res_r: dict
    res_s: dict
    res_m: dict
    combo: float


def moment_table(kmax=7, grid=None) -> MomentTable:
    """Moments by direct quadrature plus the recurrence residuals."""
    kmax = int(kmax)
    if kmax < 3 or kmax % 2 == 0:
        raise DomainError("kmax must be odd and at least 3")
    if grid is None:
        grid = Grid(40.0, 4096)
    yh = grid.y_half
    h = grid.h
    Q = SQRT2 / np.cosh(yh)
    Qp = -SQRT2 * np.sinh(yh) / np.cosh(yh) ** 2
    cy = np.cos(yh)
    sy = np.sin(yh)
    lnQ = np.log(Q)

    t2 = -(SQRT2 / 8.0) * quad.exp_kernel_apply(yh, yh, Q * Q, SQRT2, h,
                                                deriv=0)
    t2p = -(SQRT2 / 8.0) * quad.exp_kernel_apply(yh, yh, Q * Q, SQRT2, h,
                                                 deriv=1, wp=2.0 * Q * Qp)

    p = {}
    q = {}
    r = {}
    s = {}
    m = {}
    for k in range(1, kmax + 1, 2):
        Qk = Q ** k
        p[k] = 2.0 * quad.grid_trapz(Qk * cy, h)
        q[k] = 2.0 * quad.grid_trapz(Qk * lnQ * cy, h)
        r[k] = 2.0 * quad.grid_trapz(t2 * Qk * cy, h)
        s[k] = 2.0 * quad.grid_trapz(t2 * Qp * Q ** (k - 1) * sy, h)
        m[k] = 2.0 * quad.grid_trapz(yh * Qk * sy, h)

    res_p = {}
    res_q = {}
    res_r = {}
    res_s = {}
    res_m = {}
    for k in range(1, kmax - 1, 2):
        k2 = k + 2
        res_p[k2] = abs(p[k2] - 2.0 * (k * k + 1) / (k * (k + 1)) * p[k])
        res_q[k2] = abs(q[k2] - (2.0 * (k * k + 1) / (k * (k + 1)) * q[k]
                                 + 2.0 * (k * k - 2 * k - 1)
                                 / (k * k * (k + 1) ** 2) * p[k]))
        res_r[k2] = abs(r[k2] - 2.0 / (k * (k + 1))
                        * ((k * k - 3) * r[k] - 2 * k * s[k] - 0.5 * p[k2]))
        res_s[k2] = abs(s[k2] - 2.0 / ((k + 1) * (k + 2))
                        * ((k * k - 3) * s[k] + 2 * k * r[k]
                           - (k + 1) * r[k2] + p[k2] / (2.0 * (k + 2))))
        res_m[k2] = abs(m[k2] - 2.0 / (k * (k + 1))
                        * ((k * k + 1) * m[k] - 2.0 * p[k]))

    combo = math.nan
    if kmax >= 7:
        combo = (-6.0 * p[1] + 14.0 / 3.0 * p[3]
                 - 18.0 / 5.0 * p[5] + 1.5 * p[7])

    return MomentTable(kmax=kmax, y=yh, t2=t2, t2p=t2p,
                       p=p, q=q, r=r, s=s, m=m,
                       res_p=res_p, res_q=res_q, res_r=res_r,
                       res_s=res_s, res_m=res_m, combo=float(combo))
