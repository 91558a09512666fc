from __future__ import annotations

import pytest
from helpers import xor2_circuit

from cmw.circuit import Circuit, parse_formula


@pytest.fixture
def xor2() -> Circuit:
    return xor2_circuit()


@pytest.fixture
def xor_or_y() -> Circuit:
    """(x1 xor x2) or y1 as a four-gate circuit."""
    return parse_formula("(x1 ^ x2) | y1")
