"""Receiver security holds exactly when some path has no corrupted node.

Every corruption subset of the three-path network is checked by walking all
random tapes: the coalition's views under c = 0 and c = 1 are either
identical (distance 0) or disjoint (distance 1).
"""

import itertools

from pathot import BitString, CorruptionSet, enumerate_paths, exists_honest_path, three_path_topology
from pathot.analysis import choice_distance
from pathot.protocols import runner_for

topology = three_path_topology()
paths = enumerate_paths(topology, 3)
inner = sorted(topology.nodes - {topology.alice, topology.bob})

print(f"{'corrupted':<22} honest path   distance")
for r in range(len(inner) + 1):
    for subset in itertools.combinations(inner, r):
        corruption = CorruptionSet(subset, "alice")
        dist = choice_distance(runner_for("protocol1", topology, paths, corruption), corruption,
                               BitString.zeros(1), BitString.from_str("1"))
        honest = exists_honest_path(topology, paths, CorruptionSet(subset))
        print(f"{'+'.join(subset) or '-':<22} {str(honest):<13} {dist}")
