# # Event-driven timing and switching power
#
# A transient run applies one vector per clock period.  Each node change is
# delayed by the resistance of its drive path times its capacitance, and every
# level change costs 1/2 C dV^2.

from addersim import cells
from addersim.metrics import estimate_power, extract_cout_delay
from addersim.netlist import flatten
from addersim.params import ModelParams
from addersim.simulator import Stimulus, run_transient

flat = flatten(cells.build_cell("p10"))
params = ModelParams()
trace = run_transient(flat, Stimulus.counting(), params)

# The carry history: times in picoseconds.

for t, s in trace.history("carry"):
    print(f"{t:10.1f} ps  carry -> {s.level.name}/{s.strength.name.lower()}")

print(f"cout delay  {extract_cout_delay(trace, params):.3f} ns")
print(f"avg power   {estimate_power(trace, flat, params):.3f} uW")

# Lowering the supply voltage cuts power quadratically.

for vdd in (1.8, 1.5, 1.2):
    p = params.with_overrides(vdd=vdd)
    print(f"vdd={vdd}: {estimate_power(run_transient(flat, Stimulus.counting(), p), flat, p):.3f} uW")
