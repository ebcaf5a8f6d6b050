"""Shared fixtures: expensive objects cached for the whole session."""

from functools import lru_cache

import numpy as np
import pytest

from solitonlab import nonlinearity as nl
from solitonlab import profile as pr
from solitonlab import spectral as sp


@lru_cache(maxsize=32)
def model_for(a, sigma):
    if a == 0.0:
        return nl.NonlinearityModel.zero()
    return nl.NonlinearityModel.power(a, sigma)


@lru_cache(maxsize=16)
def grid_for(half_length=40.0, n=4096):
    return pr.Grid(half_length, n)


@lru_cache(maxsize=32)
def profile_for(a, sigma, omega, half_length=40.0, n=4096):
    return pr.solve_profile(model_for(a, sigma), omega, grid_for(half_length, n))


@lru_cache(maxsize=32)
def potentials_for(a, sigma, omega, half_length=40.0, n=4096):
    return sp.compute_potentials(model_for(a, sigma),
                                 profile_for(a, sigma, omega, half_length, n))


@lru_cache(maxsize=16)
def mode_for(a, sigma, omega, half_length=40.0, n=4096):
    return sp.solve_internal_mode(model_for(a, sigma), omega,
                                  grid_for(half_length, n))


@lru_cache(maxsize=16)
def transformed_for(a, sigma, omega, half_length=40.0, n=4096):
    return sp.transformed_potentials(mode_for(a, sigma, omega, half_length, n),
                                     potentials_for(a, sigma, omega, half_length, n))


@lru_cache(maxsize=16)
def pair_for(a, sigma, omega, half_length=40.0, n=4096):
    from solitonlab import fgr
    if a == 0.0:
        return fgr.solve_g_pair(model_for(a, sigma), omega, None,
                                grid_for(half_length, n))
    return fgr.solve_g_pair(model_for(a, sigma), omega,
                            mode_for(a, sigma, omega, half_length, n))


@lru_cache(maxsize=1)
def sim_base_state():
    """One expensive simulator init shared by the whole session."""
    import math
    from solitonlab import nls_sim as sim
    amp = 0.02 * math.sqrt(0.05)
    return sim.init_state(model_for(1.0, 2.0), 0.05,
                          ("internal_mode", amp), sim.SimGrid(200.0, 8192))


def fresh_sim_state(kind="pert"):
    """Copy of the cached state rewound to t=0; kind "none" strips the kick."""
    from dataclasses import replace
    from solitonlab import nls_sim as sim
    base = sim_base_state()
    st = replace(base, psi=base.psi.copy(), t=0.0, gamma=0.0,
                 omega=base.omega0, history=[])
    if kind == "none":
        st.psi = sim._phi_on_x(st, st.omega0).astype(complex)
        st.mass0 = sim._mass(st)
        st.energy0 = sim._energy(st)
    return st


@pytest.fixture(scope="session")
def grid():
    return grid_for()


@pytest.fixture(scope="session")
def quartic_profile():
    """Reference case g(s) = s^2 at omega = 1e-2."""
    return profile_for(1.0, 2.0, 1e-2)
