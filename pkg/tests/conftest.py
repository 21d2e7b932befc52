"""Shared helpers for the test suite."""

import numpy as np
import pytest

from otto_rc import model, qops


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_hermitian(rng, d):
    x = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return 0.5 * (x + x.conj().T)


def random_density(rng, d):
    x = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = x @ x.conj().T
    return rho / np.trace(rho).real


def small_config(**overrides) -> model.EngineConfig:
    """A cheap engine configuration for functional tests."""
    defaults = dict(rc_levels=3, tau_i=200.0)
    defaults.update(overrides)
    return model.EngineConfig(**defaults)


def metric_fields():
    """The thermodynamic columns compared between runs."""
    return (
        "W_out", "Q", "eta", "P", "C_h", "C_c",
        "W_hot_adiabat", "W_cold_adiabat", "pop_diff_B", "pop_diff_D",
    )


def rel_diff(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0 else abs(a - b) / scale


__all__ = [
    "random_hermitian", "random_density", "small_config",
    "metric_fields", "rel_diff",
]
