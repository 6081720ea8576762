import math

import numpy as np
import pytest

from hubbard_mf_lab.lattice import Lattice
from hubbard_mf_lab.manybody import ModelParams

HALF = np.array([1.0, 1.0]) / math.sqrt(2.0)
WITNESS = np.array([-math.sqrt(2.0), 1.0, 1.0]) / 2.0


@pytest.fixture
def chain2():
    return Lattice(2, 1)


@pytest.fixture
def standard_params():
    return ModelParams(J=1.0, mu=0.5, U=1.0)
