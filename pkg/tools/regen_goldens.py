"""Regenerate the checked-in golden files.

    python tools/regen_goldens.py

Writes cells/<name>.sp from the programmatic builders, stimuli/count8.csv,
and goldens/<name>.csv from the path-enumeration oracle.  Review the diff
before committing: the goldens are what the test suite holds settle to.
"""

from pathlib import Path

from addersim import cells
from addersim.netlist import serialize
from addersim.oracle import write_expectations
from addersim.simulator import Stimulus, write_stimulus

ROOT = Path(__file__).resolve().parents[1]


def main():
    (ROOT / "cells").mkdir(exist_ok=True)
    for name in sorted(cells.CELLS):
        (ROOT / "cells" / f"{name}.sp").write_text(serialize(cells.build_cell(name)), encoding="utf-8")
    (ROOT / "stimuli").mkdir(exist_ok=True)
    (ROOT / "stimuli" / "count8.csv").write_text(write_stimulus(Stimulus.counting()), encoding="utf-8")
    for path in write_expectations(ROOT / "goldens"):
        print(path.relative_to(ROOT))


if __name__ == "__main__":
    main()
