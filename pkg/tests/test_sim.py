"""Simulator checks: conservation, splitting order, tracking, b dynamics.

The expensive state init (profile + frequency derivative + internal mode
at omega0 = 0.05) is shared through conftest.fresh_sim_state; every test
rewinds its own copy so nothing leaks between them.
"""

import math
import warnings
from dataclasses import replace
from functools import lru_cache

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hst
from scipy.integrate import simpson

from solitonlab import nls_sim as sim
from solitonlab import nonlinearity as nl
from solitonlab import quad
from solitonlab.errors import (BlowUpError, DecompositionLostError,
                               DomainError, RegimeWarning)
from solitonlab.profile import Grid

from conftest import fresh_sim_state, sim_base_state

OMEGA0 = 0.05
AMP = 0.02 * math.sqrt(OMEGA0)


@lru_cache(maxsize=1)
def zero_proto():
    # cubic-only model on a small grid: cheap init for error-path tests
    return sim.init_state(nl.NonlinearityModel.zero(), OMEGA0, "none",
                          sim.SimGrid(50.0, 512), ygrid=Grid(10.0, 256))


def zero_state():
    base = zero_proto()
    return replace(base, psi=base.psi.copy(), t=0.0, gamma=0.0,
                   omega=OMEGA0, history=[])


# ---------------------------------------------------------------------------
# grid geometry


def test_simgrid_geometry():
    g = sim.SimGrid(50.0, 512)
    assert g.dx == pytest.approx(100.0 / 512, rel=1e-15)
    assert g.x[0] == pytest.approx(-50.0)
    assert g.x[-1] == pytest.approx(50.0 - g.dx)
    assert len(g.x) == len(g.k) == 512
    # frequency layout matches the FFT convention
    assert g.k[1] == pytest.approx(2.0 * math.pi / 100.0, rel=1e-14)
    assert g.k[-1] == pytest.approx(-2.0 * math.pi / 100.0, rel=1e-14)


def test_simgrid_validation():
    with pytest.raises(DomainError):
        sim.SimGrid(50.0, 500)
    with pytest.raises(DomainError):
        sim.SimGrid(50.0, 8)
    with pytest.raises(DomainError):
        sim.SimGrid(0.0, 512)
    with pytest.raises(DomainError):
        sim.SimGrid(-3.0, 512)


# ---------------------------------------------------------------------------
# the integrator on the exact soliton


def test_soliton_fixed_point():
    # sup error <= 1e-6 over t in [0, 10/omega0] = [0, 200]
    st = fresh_sim_state("none")
    phi = st.psi.copy()
    worst = 0.0
    for _ in range(4):
        sim._run_steps(st, 0.01, 5000)
        exact = np.exp(1j * OMEGA0 * st.t) * phi
        worst = max(worst, float(np.max(np.abs(st.psi - exact))))
    assert worst <= 1e-6


def test_single_step_mass_exact():
    st = fresh_sim_state("none")
    prev = sim._mass(st)
    for _ in range(5):
        sim.step(st, 0.02)
        cur = sim._mass(st)
        assert abs(cur - prev) <= 1e-13 * prev
        prev = cur


def test_evenness_and_momentum_preserved():
    st = fresh_sim_state("pert")
    sim._run_steps(st, 0.02, 500)
    mirrored = np.roll(st.psi[::-1], 1)
    assert np.max(np.abs(st.psi - mirrored)) <= 1e-11 * np.max(np.abs(st.psi))
    assert abs(sim._momentum(st)) <= 1e-10


def test_conservation_2000_steps():
    st = fresh_sim_state("none")
    m0, e0 = sim._mass(st), sim._energy(st)
    sim._run_steps(st, 0.02, 2000)
    assert abs(sim._mass(st) - m0) / m0 <= 1e-11
    assert abs(sim._energy(st) - e0) / abs(e0) <= 1e-10


def test_richardson_pair_fourth_order():
    """Strang is order two; the Richardson pair gains two more."""
    T = 20.0
    st = fresh_sim_state("none")
    phi = st.psi.copy()
    exact = np.exp(1j * OMEGA0 * T) * phi

    def run(dt):
        s = fresh_sim_state("none")
        sim._run_steps(s, dt, int(round(T / dt)))
        return s.psi

    p4, p2, p1 = run(0.04), run(0.02), run(0.01)
    e4 = np.max(np.abs(p4 - exact))
    e2 = np.max(np.abs(p2 - exact))
    e1 = np.max(np.abs(p1 - exact))
    assert e4 / e2 == pytest.approx(4.0, rel=0.05)
    assert e2 / e1 == pytest.approx(4.0, rel=0.05)
    r_coarse = np.max(np.abs((4.0 * p2 - p4) / 3.0 - exact))
    r_fine = np.max(np.abs((4.0 * p1 - p2) / 3.0 - exact))
    assert 8.0 < r_coarse / r_fine < 40.0


def test_zero_model_linear_limit():
    # tiny packet, zero g: the run must match the exact free propagator
    st = zero_state()
    x = st.simgrid.x
    packet = 1e-4 * np.exp(-x ** 2 / 16.0) * np.cos(2.0 * x)
    st.psi = packet.astype(complex)
    ft0 = np.fft.fft(st.psi)
    sim._run_steps(st, 0.005, 1000)
    linear = np.fft.ifft(np.exp(-1j * st.simgrid.k ** 2 * 5.0) * ft0)
    assert np.max(np.abs(st.psi - linear)) <= 1e-6 * 1e-4
    # carriers at +-2 transport mass at group velocity 2k = 4
    dens = np.abs(st.psi) ** 2
    mean_ax = float(np.sum(dens * np.abs(x)) / np.sum(dens))
    assert mean_ax == pytest.approx(4.0 * 5.0, abs=1.0)


def test_blow_up_error():
    st = zero_state()
    st.psi[0] = np.inf
    with np.errstate(invalid="ignore"), warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        with pytest.raises(BlowUpError):
            sim.step(st, 0.02)


# ---------------------------------------------------------------------------
# modulation decomposition


def test_decompose_exact_soliton():
    st = fresh_sim_state("none")
    gamma, omega, u = sim.modulation_decompose(st)
    assert abs(gamma) <= 1e-12
    assert abs(omega - OMEGA0) <= 1e-12
    assert np.max(np.abs(u)) <= 1e-10


def test_decompose_phase_covariance():
    st1 = fresh_sim_state("pert")
    g1, o1, u1 = sim.modulation_decompose(st1)
    st2 = fresh_sim_state("pert")
    st2.psi = st2.psi * np.exp(0.3j)
    g2, o2, u2 = sim.modulation_decompose(st2)
    assert math.fmod(g2 - g1 - 0.3, 2.0 * math.pi) == pytest.approx(0.0, abs=1e-10)
    assert abs(o2 - o1) <= 1e-11
    # both solves stop inside the Newton tolerance band, not at its center
    assert np.max(np.abs(np.abs(u2) - np.abs(u1))) <= 1e-9


def test_decompose_constraints_after_evolution():
    st = fresh_sim_state("pert")
    sim._run_steps(st, 0.02, 250)
    gamma, omega, u = sim.modulation_decompose(st)
    res = sim._constraints(st, gamma, omega, {})
    tol = 1e-10 * sim._mass(st)
    assert abs(res[0]) <= tol and abs(res[1]) <= tol
    assert np.all(np.isfinite(u.view(float)))
    assert np.max(np.abs(u)) < 0.05


def test_decompose_lost_far_from_orbit():
    st = zero_state()
    st.psi = np.zeros_like(st.psi)
    with pytest.raises(DecompositionLostError):
        sim.modulation_decompose(st)


def test_refresh_rebinds_only_the_copy():
    st = zero_state()
    st.refresh(0.06)
    assert st.omega_ref == 0.06
    assert st.mode is None and st.dQ_tail == 0.0
    assert zero_proto().omega_ref == OMEGA0


# ---------------------------------------------------------------------------
# internal-mode amplitude extraction


def test_extract_b_eigenvector():
    mode = sim_base_state().mode
    u = mode.V1 + 1j * mode.V2
    b = sim.extract_b(u, mode)
    assert abs(b - (1.0 + 1.0j)) <= 1e-13


def test_extract_b_orthogonal_gives_zero():
    mode = sim_base_state().mode
    h = mode.grid.h
    yh = mode.grid.y_half
    w = np.exp(-yh ** 2 / 8.0)
    # project w away from the pairing partners in the same product
    u1 = w - mode.V2 * (quad.grid_trapz(w * mode.V2, h)
                        / quad.grid_trapz(mode.V2 * mode.V2, h))
    u2 = w - mode.V1 * (quad.grid_trapz(w * mode.V1, h)
                        / quad.grid_trapz(mode.V1 * mode.V1, h))
    b = sim.extract_b(u1 + 1j * u2, mode)
    assert abs(b) <= 1e-13


def test_extract_b_residual_orthogonality():
    mode = sim_base_state().mode
    h = mode.grid.h
    yh = mode.grid.y_half
    rng = np.random.default_rng(7)
    c = rng.normal(size=6)
    u = ((c[0] + c[1] * np.cos(0.4 * yh)) * np.exp(-yh ** 2 / 10.0)
         + 1j * (c[2] + c[3] * np.cos(0.9 * yh)) * np.exp(-yh ** 2 / 7.0))
    b = sim.extract_b(u, mode)
    v = u - (b.real * mode.V1 + 1j * b.imag * mode.V2)
    scale = float(np.max(np.abs(u)))
    assert abs(quad.grid_trapz(v.real * mode.V2, h)) <= 1e-13 * scale
    assert abs(quad.grid_trapz(v.imag * mode.V1, h)) <= 1e-13 * scale


def test_b_initial_amplitude():
    st = fresh_sim_state("pert")
    _, _, u = sim.modulation_decompose(st)
    b = sim.extract_b(u, st.mode)
    assert abs(b - AMP * (1.0 + 1.0j)) <= 1e-10


def test_b_rotation_frequency():
    """b traces a near-circle clockwise at |frequency| close to omega*lam."""
    st = fresh_sim_state("pert")
    bs = []
    for k in range(41):
        if k:
            sim._run_steps(st, 0.02, 50)
        _, _, u = sim.modulation_decompose(st)
        bs.append(sim.extract_b(u, st.mode))
    bs = np.array(bs)
    dth = np.angle(bs[1:] / bs[:-1])           # per unit time
    target = -OMEGA0 * st.mode.lam
    assert abs(float(np.mean(dth)) - target) <= 5e-4
    assert float(np.std(dth)) <= 1e-4
    drift = np.max(np.abs(np.abs(bs) - abs(bs[0]))) / abs(bs[0])
    assert drift <= 1e-3


def test_unperturbed_b_stays_tiny():
    # fixed point up to scheme error: refine dt until that error clears 1e-8
    st = fresh_sim_state("none")
    worst_b = 0.0
    worst_om = 0.0
    for _ in range(60):
        sim._run_steps(st, 0.004, 250)
        _, omega, u = sim.modulation_decompose(st)
        worst_b = max(worst_b, abs(sim.extract_b(u, st.mode)))
        worst_om = max(worst_om, abs(omega - OMEGA0))
    assert worst_b <= 1e-8
    assert worst_om <= 1e-8


# ---------------------------------------------------------------------------
# initial data construction


def test_init_validation_errors():
    model = nl.NonlinearityModel.power(1.0, 2.0)
    g = sim.SimGrid(50.0, 512)
    with pytest.raises(DomainError):
        sim.init_state(model, -1.0, "none", g)
    with pytest.raises(DomainError):
        sim.init_state(nl.NonlinearityModel.zero(), OMEGA0,
                       ("internal_mode", 0.01), g, ygrid=Grid(10.0, 256))
    with pytest.raises(DomainError):
        sim.init_state(nl.NonlinearityModel.zero(), OMEGA0,
                       ("custom", np.ones(7, dtype=complex)), g,
                       ygrid=Grid(10.0, 256))
    odd = (g.x * np.exp(-g.x ** 2)).astype(complex)
    with pytest.raises(DomainError):
        sim.init_state(nl.NonlinearityModel.zero(), OMEGA0, ("custom", odd),
                       g, ygrid=Grid(10.0, 256))
    with pytest.raises(DomainError):
        sim.init_state(nl.NonlinearityModel.zero(), OMEGA0, "boost", g,
                       ygrid=Grid(10.0, 256))


def test_init_even_custom_accepted():
    g = sim.SimGrid(50.0, 512)
    even = (1e-3 * np.exp(-g.x ** 2 / 9.0)).astype(complex)
    st = sim.init_state(nl.NonlinearityModel.zero(), OMEGA0, ("custom", even),
                        g, ygrid=Grid(10.0, 256))
    mirrored = np.roll(st.psi[::-1], 1)
    assert np.max(np.abs(st.psi - mirrored)) <= 1e-12 * np.max(np.abs(st.psi))


def test_init_amplitude_warning():
    with pytest.warns(RegimeWarning):
        sim.init_state(nl.NonlinearityModel.power(1.0, 2.0), OMEGA0,
                       ("internal_mode", 0.5 * math.sqrt(OMEGA0)),
                       sim.SimGrid(50.0, 512), ygrid=Grid(40.0, 512))


def test_init_window_coverage_warning():
    # sqrt(omega0) * X = 11.2 < half_length 40: pairings get truncated
    with pytest.warns(RegimeWarning):
        sim.init_state(nl.NonlinearityModel.zero(), OMEGA0, "none",
                       sim.SimGrid(50.0, 512))


# ---------------------------------------------------------------------------
# run_experiment plumbing


def test_run_experiment_config_errors():
    with pytest.raises(DomainError):
        sim.run_experiment({"bogus_key": 1.0})
    with pytest.raises(DomainError):
        sim.run_experiment({"dt": -0.01})
    with pytest.raises(DomainError):
        sim.run_experiment({"t_end": 0.0})


def test_run_experiment_zero_model():
    cfg = {"a": 0.0, "perturbation": "none", "t_end": 2.0, "dt": 0.02,
           "sample_every": 1.0, "domain_half": 50.0, "points": 512}
    with pytest.warns(RegimeWarning):
        res = sim.run_experiment(cfg)
    assert len(res.rows) == 3
    assert all(r.abs_b == 0.0 for r in res.rows)
    assert "lam" not in res.summary
    assert res.summary["terminated_early"] == ""
    assert res.summary["absorber_on"] is False
    assert abs(res.rows[-1].mass_drift) <= 1e-11


def test_run_experiment_absorber_flag():
    cfg = {"a": 0.0, "perturbation": "none", "t_end": 1.0, "dt": 0.02,
           "sample_every": 1.0, "domain_half": 50.0, "points": 512,
           "absorber": 1.0}
    with pytest.warns(RegimeWarning):
        res = sim.run_experiment(cfg)
    assert res.summary["absorber_on"] is True
    assert res.summary["terminated_early"] == ""


def test_run_experiment_short_power_run():
    res = sim.run_experiment({"t_end": 30.0})
    assert res.summary["terminated_early"] == ""
    assert len(res.rows) == 31
    for row in res.rows:
        vals = [row.t, row.mass_drift, row.energy_drift, row.momentum,
                row.gamma, row.omega, row.b1, row.b2, row.abs_b,
                row.rho_v_norm, row.nu_v_norm]
        assert all(np.isfinite(v) for v in vals)
    s = res.summary
    assert s["lam"] == pytest.approx(0.99843, abs=1e-4)
    assert s["b_peak_freq_t"] < 0.0        # clockwise rotation
    assert s["fft_bin_t"] == pytest.approx(2.0 * math.pi / 30.0, rel=0.05)
    assert "b_peak_freq_s" in s and "fft_bin_s" in s
    # t_end is too short for the envelope windows to exist
    assert "envelope_at_200" not in s
    assert s["max_abs_b"] == pytest.approx(AMP * math.sqrt(2.0), rel=0.05)
    assert s["omega_drift"] <= 1e-4
    # rescaled-clock endpoint: trapezoid against Simpson on the same rows
    t = np.array([r.t for r in res.rows])
    om = np.array([r.omega for r in res.rows])
    s_trapz = float(np.trapezoid(om, t))
    s_simp = float(simpson(om, x=t))
    assert abs(s_trapz - s_simp) <= 1e-6 * abs(s_simp)


# ---------------------------------------------------------------------------
# unitarity of the splitting, property-tested on random even packets


@settings(max_examples=10, deadline=None, derandomize=True)
@given(seed=hst.integers(min_value=0, max_value=10 ** 6))
def test_mass_unitarity_random_even_data(seed):
    st = zero_state()
    x = st.simgrid.x
    rng = np.random.default_rng(seed)
    c = rng.normal(size=4)
    st.psi = (1e-3 * (c[0] + c[1] * np.cos(0.7 * x)) * np.exp(-x ** 2 / 25.0)
              + 1e-3j * (c[2] + c[3] * np.cos(1.3 * x))
              * np.exp(-x ** 2 / 30.0)).astype(complex)
    prev = sim._mass(st)
    for _ in range(3):
        sim.step(st, 0.01)
        cur = sim._mass(st)
        assert abs(cur - prev) <= 1e-12 * max(prev, 1e-30)
        prev = cur
    mirrored = np.roll(st.psi[::-1], 1)
    assert np.max(np.abs(st.psi - mirrored)) <= 1e-11 * np.max(np.abs(st.psi))
