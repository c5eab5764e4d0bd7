"""Oblivious transfer between two parties who share no link.

Alice and Bob sit on opposite corners of a diamond.  Each intermediary has an
OT link to Alice (Protocol 1) or to Bob (Protocol 2); the two protocols
stitch those links into one OT between the end points.
"""

from pathot import BitString, ChoiceBit, PathOTInstance, diamond_topology, enumerate_paths
from pathot.protocols import run_path_ot

topology = diamond_topology()
paths = enumerate_paths(topology, 2)
print("paths:", paths.to_json())

s0, s1 = BitString.from_str("1010"), BitString.from_str("0111")
for variant in ("protocol1", "protocol2"):
    for c in (0, 1):
        result = run_path_ot(PathOTInstance(paths, s0, s1, ChoiceBit(c), variant), topology, tape=c)
        print(f"{variant} c={c}: Bob outputs {result.output}")

# One Protocol 1 execution, message by message.
result = run_path_ot(PathOTInstance(paths, s0, s1, ChoiceBit(1)), topology, tape=7)
print()
print(result.sim.to_jsonl(), end="")
