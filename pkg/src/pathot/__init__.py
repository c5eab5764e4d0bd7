"""Long-distance oblivious transfer over networks with only neighbouring OT links.

Path-OT protocols, their security analysis by exact random-tape enumeration,
and executable attacks.
"""

from .analysis import (
    SecurityReport,
    ViewDistribution,
    correctness_rate,
    distribution,
    exact_view_distribution,
    guessing_probability,
    monte_carlo,
    security_report,
    statistical_distance,
)
from .classical_ot import LARGE_GROUP, ORDER_31_GROUP, SMALL_GROUP, TOY_GROUP, CyclicGroup, run_ddh_ot
from .core import BitString, ChoiceBit, SeededRng, TapeRng, reconstruct_xor, share_xor
from .errors import (
    Abort,
    ConfigError,
    ContractViolation,
    Deadlock,
    EnumerationBound,
    NoPath,
    NotALink,
    NotSeparating,
    RefusesToBruteForce,
)
from .netsim import (
    CorruptionSet,
    NetworkTopology,
    PathSet,
    diamond_topology,
    enumerate_paths,
    exists_honest_path,
    line_topology,
    three_path_topology,
)
from .protocols import (
    PathOTInstance,
    WeakOTInstance,
    run_combined,
    run_hybrid,
    run_path_ot,
    run_protocol1,
    run_protocol2,
    run_weak_ot,
    tamper_check_run,
)

__version__ = "0.1.0"
