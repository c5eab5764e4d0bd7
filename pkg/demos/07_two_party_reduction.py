"""Why an honest path is necessary: collapsing the network into two parties.

Anne plays Alice and the nodes of her paths, Bill plays Bob and the rest.
Only traffic crossing the split touches their link, so any path-OT becomes a
two-party OT, and a corrupt side in the two-party world is a coalition
missing an honest path in the network world.
"""

from pathot import BitString, ChoiceBit, three_path_topology, enumerate_paths
from pathot.adversary import anne_bill_reduction, reduction_checks

topology = three_path_topology()
paths = enumerate_paths(topology, 3)
reduction = anne_bill_reduction("protocol1", topology, paths, ([0], [1, 2]))
print("Anne simulates", sorted(reduction.anne_nodes), "Bill simulates", sorted(reduction.bill_nodes))

run = reduction.run(BitString.from_str("0"), BitString.from_str("1"), ChoiceBit(1), 0)
for entry in run.transcript:
    print(f"  round {entry.round}: {entry.sender} -> {entry.receiver} {entry.tag}")
print("Bill outputs", run.output)
print({k: str(v) for k, v in reduction_checks(reduction, 1).items()})
