# # Checking the adder corpus
#
# Each cell is settled on every input vector and compared with the full-adder
# truth table.  Outputs that are right but threshold-degraded are flagged
# "weak-correct" rather than passed silently.

from addersim import cells
from addersim.oracle import check_identities, verify_cell

for name in cells.ADDERS:
    report = verify_cell(name)
    statuses = sorted({r.status for r in report.rows})
    print(f"{name:7} {cells.CELLS[name].transistors:2}T  levels ok: {report.levels_correct!s:5}  {', '.join(statuses)}")

# The 8T cell in detail: its carry is weak whenever it is passed rather
# than driven from a rail.

print(verify_cell("p8").render())

# The 6T cell floats or fights on some vectors.  Its wiring had to be
# reconstructed, so its table is a finding rather than a pass/fail verdict.

print(verify_cell("p6").render())

# The factored carry and sum forms, checked by brute force.

for r in check_identities():
    print(f"{r.name:15} {r.expression:28} passed={r.passed}  mismatches={list(r.mismatches)}")
