import math

import numpy as np
import pytest

from qbc.states import ProtocolFamily, build_canonical

PI8 = math.pi / 8


@pytest.fixture
def rng():
    return np.random.default_rng(20001115)


@pytest.fixture
def fam_pi8():
    return ProtocolFamily(PI8)


@pytest.fixture
def canon_pi8(fam_pi8):
    return build_canonical(fam_pi8)
