"""Shared fixtures for the gapdiag test suite"""

from pathlib import Path

import numpy as np
import pytest

from config import config_manager
from form_perturbation import GappedOperator, form_perturbation

REFERENCE_MODEL = Path(__file__).resolve().parent / "models" / "reference_8x8.json"


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def reference_model_path():
    return REFERENCE_MODEL


@pytest.fixture
def two_level():
    """H0 = diag(1, -1) with V = sigma_x scaled by 0.3"""
    base = GappedOperator.from_matrix(np.diag([1.0, -1.0]))
    v = 0.3 * np.array([[0.0, 1.0], [1.0, 0.0]])
    return base, form_perturbation(base, v)


@pytest.fixture
def four_level():
    """Two positive and two negative levels with block-coupling V"""
    base = GappedOperator.from_matrix(np.diag([1.0, 2.0, -1.0, -2.0]))
    v = np.zeros((4, 4), dtype=np.complex128)
    v[0, 2] = v[2, 0] = 0.2
    v[1, 3] = v[3, 1] = 0.25
    v[0, 1] = v[1, 0] = 0.1
    return base, form_perturbation(base, v)


@pytest.fixture(autouse=True)
def fresh_config(monkeypatch, tmp_path):
    """Isolate every test from user configuration files and GAPDIAG_* variables"""
    for name in ('GAPDIAG_REPORTS_DIR', 'GAPDIAG_DEBUG', 'GAPDIAG_ALPHA',
                 'GAPDIAG_QUAD_NODES'):
        monkeypatch.delenv(name, raising=False)
    monkeypatch.setenv('GAPDIAG_CONFIG', str(tmp_path / "no_config.json"))
    config_manager.config_file = None
    config_manager._config = None
    yield
    config_manager._config = None
