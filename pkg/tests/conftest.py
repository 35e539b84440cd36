"""Shared fixtures: the Sr/Al parameter set used across the suite."""

import pytest

from screwclock import CODATA, LatticeConfig, SpeciesOptics

# Reference parameter set: Sr clock atoms with an Al head at the 389.9 nm
# blue magic wavelength, misbalance delta = 1/4.
LAMBDA_M = 389.9e-9
DELTA = 0.25
SR_MASS_AMU = 87.9056
AL_MASS_AMU = 26.9815385
ALPHA_SR_AU = -470.0
ALPHA_AL_AU = -340.0
RHO_UP = -1.25
RHO_DOWN = 0.84

# Minimum intensity for 5 E_R worst-case depths at the parameters above,
# frozen from an independent constant evaluation (see test_lattice).
MIN_INTENSITY = 2.2198089925017097e8  # W/m^2


@pytest.fixture
def sr():
    return SpeciesOptics("Sr", mass=SR_MASS_AMU * CODATA.atomic_mass_unit,
                         alpha_scalar=ALPHA_SR_AU, rho=0.0, role="clock")


@pytest.fixture
def al_up():
    return SpeciesOptics("Al_up", mass=AL_MASS_AMU * CODATA.atomic_mass_unit,
                         alpha_scalar=ALPHA_AL_AU, rho=RHO_UP, role="head_up",
                         F=3.0, M_F=-3.0)


@pytest.fixture
def al_down():
    return SpeciesOptics("Al_down", mass=AL_MASS_AMU * CODATA.atomic_mass_unit,
                         alpha_scalar=ALPHA_AL_AU, rho=RHO_DOWN, role="head_down",
                         F=2.0, M_F=-2.0)


@pytest.fixture
def reference_lattice():
    return LatticeConfig(lambda_m=LAMBDA_M, intensity=MIN_INTENSITY, delta=DELTA,
                         phi=0.0, transverse_intensity=MIN_INTENSITY)
