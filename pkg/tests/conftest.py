import numpy as np
import pytest

from dualsiso.galois import field

PAPER_CODES = (
    "gf4:(1+x)",
    "gf4:(1+3x+2x^2)",
    "gf4:(1+x+2x^2)",
    "gf4:(1+x)/(1+2x)",
    "gf4:(1+3x+2x^2)/(1+x+2x^2)",
)

# Codes outside the paper's GF(4) family: odd characteristic, non-monic,
# larger fields, a memoryless code.
EXTRA_CODES = (
    "gf3:(1+x+2x^2)",
    "gf5:(1+2x+3x^2)/(2+x)",
    "gf8:(3+x)/(5+2x)",
    "gf16:(1+5x)/(3+x)",
    "gf4:(3)/(2)",
)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def gf4():
    return field(2, 2)


def random_pmfs(rng, shape, q, concentration=0.7):
    return rng.dirichlet(np.full(q, concentration), size=shape)
