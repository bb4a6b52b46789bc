# # Side-by-side comparison
#
# The same table `addersim compare --all` prints: transistor count, area,
# carry delay, power and power-delay product for every adder.

from addersim import cells
from addersim.metrics import build_report, render_markdown, total_capacitance
from addersim.netlist import flatten

rows = build_report(list(cells.ADDERS))
print(render_markdown(rows))

# Node capacitance drives both delay and power; the reduced-count cells all
# carry less of it than the 28T mirror adder.

for name in cells.ADDERS:
    print(f"{name:7} {total_capacitance(flatten(cells.build_cell(name))) * 1e15:5.0f} fF")
