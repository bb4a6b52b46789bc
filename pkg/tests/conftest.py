from pathlib import Path

import pytest

from addersim import cells
from addersim.netlist import flatten, parse

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = Path(__file__).parent / "fixtures"

INVERTER = """\
.subckt inv in out
.inputs in
.outputs out
M1 out in vdd p
M2 out in gnd n
.ends
"""


@pytest.fixture
def inverter():
    return flatten(parse(INVERTER))


@pytest.fixture(scope="session")
def corpus():
    """Flattened netlist of every corpus cell, keyed by name."""
    return {name: flatten(cells.build_cell(name)) for name in cells.CELLS}
