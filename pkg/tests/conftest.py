import numpy as np
import pytest

from safetyrisk import _backend
from safetyrisk.datamodel import generate_demo_matrix, load_demo_catalog
from safetyrisk.riskcore import Basis, catalog_relative_risks, report_risks
from safetyrisk.simgen import RiskPairSample


@pytest.fixture(scope="session")
def catalog():
    return load_demo_catalog()


@pytest.fixture(scope="session")
def demo_matrix(catalog):
    return generate_demo_matrix(catalog, 814, seed=7)


@pytest.fixture(scope="session")
def demo_pairs(catalog, demo_matrix):
    real = report_risks(demo_matrix, catalog_relative_risks(catalog, Basis.REAL))
    worst = report_risks(demo_matrix, catalog_relative_risks(catalog, Basis.WORST))
    return RiskPairSample(real.values, worst.values)


@pytest.fixture(params=sorted(_backend.available_backends()))
def kernels(request):
    return _backend.available_backends()[request.param]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
