# # Signal strengths and threshold drops
#
# Every net carries a level (0, 1 or X) and a strength (floating, charged,
# weak, strong).  Two drivers meeting on a node are combined with `resolve`;
# a transistor passing a signal may `degrade` it.

from addersim.strength import ALL_SIGNALS, S0, S1, W0, Kind, degrade, resolve, to_token

# The stronger driver wins.  Equal strength and different levels give X.

print("1 vs 0w ->", to_token(resolve(S1, W0)))
print("1 vs 0  ->", to_token(resolve(S1, S0)))

# An NMOS passes a good 0 but only a weak 1 (one threshold below vdd).
# A PMOS is the mirror image.

for kind in Kind:
    print(kind.name, " ".join(f"{to_token(s)}->{to_token(degrade(kind, s))}" for s in (S0, S1)))

# The full table over the twelve signals, as tokens.

tokens = [to_token(s) for s in ALL_SIGNALS]
print("     " + " ".join(f"{t:>3}" for t in tokens))
for a in ALL_SIGNALS:
    print(f"{to_token(a):>3}  " + " ".join(f"{to_token(resolve(a, b)):>3}" for b in ALL_SIGNALS))
