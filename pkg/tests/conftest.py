"""Shared fixtures: reference profiles and their scattering/reflection data.

Session-scoped so the ODE transforms run once; every test sees the same
immutable objects.
"""

import numpy as np
import pytest

from nonlocal_nls import rh_data, scattering
from nonlocal_nls.cli import reflection_for


def gaussian_profile(sigma=1, amp=0.3, half_width=12.0, n=1201):
    x = np.linspace(-half_width, half_width, n)
    return scattering.InitialProfile.sampled(x, amp * np.exp(-x ** 2), sigma)


def two_bump_profile(sigma=1, half_width=14.0, n=1401):
    x = np.linspace(-half_width, half_width, n)
    v = 0.25 * np.exp(-(x - 1.2) ** 2) \
        + (0.15 + 0.10j) * np.exp(-2.0 * (x + 0.8) ** 2)
    return scattering.InitialProfile.sampled(x, v, sigma)


@pytest.fixture(scope="session")
def box_small():
    return scattering.InitialProfile.box(0.2, 1.0, 1)


@pytest.fixture(scope="session")
def gauss():
    return gaussian_profile()


@pytest.fixture(scope="session")
def two_bump():
    return two_bump_profile()


@pytest.fixture(scope="session")
def gauss_spectral(gauss):
    return scattering.scatter(gauss, np.linspace(-12.0, 12.0, 1601))


@pytest.fixture(scope="session")
def two_bump_spectral(two_bump):
    return scattering.scatter(two_bump, np.linspace(-12.0, 12.0, 1601))


@pytest.fixture(scope="session")
def gauss_reflection(gauss_spectral):
    return rh_data.reflect(gauss_spectral)


@pytest.fixture(scope="session")
def two_bump_reflection(two_bump_spectral):
    return rh_data.reflect(two_bump_spectral)


@pytest.fixture(scope="session")
def box_small_reflection(box_small):
    return reflection_for(box_small, np.linspace(-12.0, 12.0, 801))
