"""Without an honest path no protocol can protect both sides.

On the line A - v - B a dishonest Alice, helped by v, runs the protocol on
random inputs, asks v to guess s_b for a random b, and answers b when the
guess is right.  Against Protocol 1 she wins with probability 1 - 2^-(l+1).
Protocol 2 keeps Bob's choice but then v knows both inputs.
"""

from pathot import enumerate_paths, line_topology
from pathot.adversary import claim2_attack, claim2_dichotomy, claim2_exact

line = line_topology("v")
paths = enumerate_paths(line, 1)

for ell in (1, 2, 3, 4):
    print(f"l={ell}: Alice guesses c with probability {claim2_exact('protocol1', line, paths, {'v'}, ell)}")

freq, half = claim2_attack("protocol1", line, paths, {"v"}, 1, trials=10_000, seed=0)
print(f"sampled (10^4 trials): {freq:.4f} +/- {half:.4f}")

for protocol in ("protocol1", "protocol2"):
    eps = claim2_dichotomy(protocol, line, paths, {"v"}, 1)
    print(protocol, {k: str(v) for k, v in eps.items()}, "- at least one reaches 1/8")
