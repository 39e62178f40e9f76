import os
from pathlib import Path

import numpy as np
import pytest

DATA_DIR = Path(
    os.environ.get("SPECMIX_DATA_DIR", Path(__file__).resolve().parent.parent / "data")
)

EMAIL_EDGES = DATA_DIR / "email-Eu-core.txt"
EMAIL_LABELS = DATA_DIR / "email-Eu-core-department-labels.txt"


def random_symmetric(rng: np.random.Generator, dim: int, density: float = 1.0):
    a = rng.standard_normal((dim, dim))
    if density < 1.0:
        a[rng.random((dim, dim)) >= density] = 0.0
    return (a + a.T) / 2.0


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
