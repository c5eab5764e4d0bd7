"""A computational backup for when no path is honest.

Protocol 1 and a DDH-based OT run side by side on XOR-masked inputs.  With
every intermediary corrupted the network half leaks its choice share, but
the DDH half still hides the other share unless the group is small enough to
break.
"""

from pathot import LARGE_GROUP, TOY_GROUP, diamond_topology, enumerate_paths
from pathot.adversary import combined_attack_frequency, combined_component_distance

topology = diamond_topology()
paths = enumerate_paths(topology, 2)

for name, group in (("toy (breakable)", TOY_GROUP), ("62-bit", LARGE_GROUP)):
    freq, half = combined_attack_frequency(group, topology, paths, {"v1", "v2"}, 1, trials=2000, seed=0)
    print(f"no honest path, {name} group: attacker guesses c with frequency {freq:.3f} +/- {half:.3f}")

dist = combined_component_distance(topology, paths, {"v1"}, 1, TOY_GROUP)
print(f"honest path, toy group: network-half view distance between its choice shares = {dist}")
