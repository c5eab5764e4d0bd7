"""A weak OT that needs no honesty assumption at all.

Protocol 1 and Protocol 2 run one after the other on different inputs.
Honest Bob gets two of Alice's four strings; a coalition of Bob and every
intermediary gets at most three; a coalition of Alice and every intermediary
learns one of Bob's two index bits but nothing about the other.
"""

from pathot import diamond_topology, enumerate_paths
from pathot.analysis import weak_ot_profile

topology = diamond_topology()
profile = weak_ot_profile(topology, enumerate_paths(topology, 2), ell=1)
for key, value in profile.items():
    print(f"{key:<22} {value}")
