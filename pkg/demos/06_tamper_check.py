"""Catching intermediaries who tamper with the protocol.

A corrupted v1 flips the choice share c_1 it relays, so Bob receives the
wrong string.  Cut-and-choose catches this: k runs on random inputs, half of
them opened and checked, one unopened run re-based onto the real inputs.
"""

from fractions import Fraction

from pathot import BitString, ChoiceBit, CorruptionSet, PathOTInstance, diamond_topology, enumerate_paths
from pathot.adversary import flip_adversary, tamper_attack, tamper_detection_probability
from pathot.protocols import tamper_check_run

topology = diamond_topology()
paths = enumerate_paths(topology, 2)
inst = PathOTInstance(paths, BitString.from_str("0"), BitString.from_str("1"), ChoiceBit(0))
print("plain run with c_1 flipped, Bob gets:", tamper_attack(0, inst, topology, 0))

flip = flip_adversary(paths, 0, "v1")
corruption = CorruptionSet({"v1"})
for k in (2, 4, 8):
    p = tamper_detection_probability(inst, topology, corruption, k, 0.5, lambda i: flip)
    print(f"k={k}: always-flip caught with probability {p} (1 - 2^-{k // 2} = {1 - Fraction(1, 2 ** (k // 2))})")

result = tamper_check_run(inst, topology, corruption, 8, 0.5, 3, lambda i: flip)
print("one check:", "accepted" if result.accepted else f"aborted on opened run {result.abort.run_index}")
