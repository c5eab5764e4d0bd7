"""Synchronous message-passing network simulator.

Processes are generator functions taking a :class:`Context`.  Each ``yield``
ends the process's turn for the current round; messages posted in round k
cross one link and arrive at round k + 1.  Multi-hop messages are relayed by
the network one hop per round, so every intermediate node appears as an
endpoint in the transcript and corrupted relays may rewrite what they forward.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Any, Callable, Generator, Iterable, Mapping, Sequence

import networkx as nx

from .core import ChoiceBit, Rng, encode
from .errors import ContractViolation, Deadlock, NoPath, NotALink
from .linkot import IdealLinkOT, OTSession

CONTROLLERS = ("alice", "bob", "independent")

DROP = object()
"""Returned by an ``on_transmit`` hook to swallow a message."""


@dataclass(frozen=True)
class NetworkTopology:
    nodes: frozenset[str]
    edges: frozenset[frozenset[str]]
    alice: str
    bob: str

    def __post_init__(self):
        if self.alice == self.bob:
            raise ContractViolation("alice and bob must be distinct nodes")
        for party in (self.alice, self.bob):
            if party not in self.nodes:
                raise ContractViolation(f"{party!r} is not a node")
        for edge in self.edges:
            if len(edge) != 2:
                raise ContractViolation(f"self-loop or malformed edge {sorted(edge)}")
            if not edge <= self.nodes:
                raise ContractViolation(f"edge {sorted(edge)} references unknown nodes")

    @classmethod
    def from_edges(cls, edges: Iterable[Sequence[str]], alice: str, bob: str,
                   nodes: Iterable[str] | None = None) -> NetworkTopology:
        edge_set = frozenset(frozenset(e) for e in edges)
        node_set = set(nodes or ())
        for e in edge_set:
            node_set |= e
        node_set |= {alice, bob}
        return cls(frozenset(node_set), edge_set, alice, bob)

    def adjacent(self, a: str, b: str) -> bool:
        return frozenset((a, b)) in self.edges

    def neighbors(self, node: str) -> list[str]:
        return sorted(next(iter(e - {node})) for e in self.edges if node in e)

    def graph(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(self.nodes)
        g.add_edges_from(tuple(e) for e in self.edges)
        return g

    def to_json(self) -> dict:
        return {
            "nodes": sorted(self.nodes),
            "edges": sorted(sorted(e) for e in self.edges),
            "alice": self.alice,
            "bob": self.bob,
        }


def line_topology(*internal: str, alice: str = "A", bob: str = "B") -> NetworkTopology:
    chain = [alice, *internal, bob]
    return NetworkTopology.from_edges(zip(chain, chain[1:]), alice, bob)


def parallel_topology(*branches: Sequence[str], alice: str = "A", bob: str = "B") -> NetworkTopology:
    """Alice and Bob joined by the given chains of internal nodes."""
    edges = []
    for branch in branches:
        chain = [alice, *branch, bob]
        edges.extend(zip(chain, chain[1:]))
    return NetworkTopology.from_edges(edges, alice, bob)


def diamond_topology() -> NetworkTopology:
    return parallel_topology(["v1"], ["v2"])


def three_path_topology() -> NetworkTopology:
    """Three internally disjoint paths of lengths 2, 3 and 3."""
    return parallel_topology(["v1"], ["v2", "u2"], ["v3", "u3"])


def complete_topology(internal: Sequence[str] = ("v1", "v2"), alice: str = "A", bob: str = "B") -> NetworkTopology:
    nodes = [alice, *internal, bob]
    return NetworkTopology.from_edges(itertools.combinations(nodes, 2), alice, bob)


@dataclass(frozen=True)
class PathSet:
    """The N alice-to-bob paths a protocol runs over."""

    paths: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "paths", tuple(tuple(p) for p in self.paths))
        if not self.paths:
            raise ContractViolation("a path set needs at least one path")
        for p in self.paths:
            if len(p) < 2 or len(set(p)) != len(p):
                raise ContractViolation(f"path {list(p)} is not simple")

    def validate(self, topology: NetworkTopology) -> PathSet:
        for p in self.paths:
            if p[0] != topology.alice or p[-1] != topology.bob:
                raise ContractViolation(f"path {list(p)} does not run from alice to bob")
            for a, b in zip(p, p[1:]):
                if not topology.adjacent(a, b):
                    raise ContractViolation(f"path {list(p)} uses missing edge {a}-{b}")
        return self

    @property
    def n(self) -> int:
        return len(self.paths)

    def __len__(self) -> int:
        return len(self.paths)

    def __iter__(self):
        return iter(self.paths)

    def __getitem__(self, j: int) -> tuple[str, ...]:
        return self.paths[j]

    def alice_neighbor(self, j: int) -> str:
        """v_j: the node after Alice on path j (Bob himself on a direct path)."""
        return self.paths[j][1]

    def bob_neighbor(self, j: int) -> str:
        """w_j: the node before Bob on path j (Alice herself on a direct path)."""
        return self.paths[j][-2]

    def internal(self, j: int) -> tuple[str, ...]:
        return self.paths[j][1:-1]

    def internally_disjoint(self) -> bool:
        seen: set[str] = set()
        for j in range(self.n):
            inner = set(self.internal(j))
            if inner & seen:
                return False
            seen |= inner
        return True

    def to_json(self) -> list[list[str]]:
        return [list(p) for p in self.paths]


@dataclass(frozen=True)
class CorruptionSet:
    """Corrupted intermediaries plus which end party (if any) they work for.

    Alice and Bob never appear in ``corrupted``; their dishonesty is expressed
    through ``controller``.
    """

    corrupted: frozenset[str] = frozenset()
    controller: str = "independent"

    def __post_init__(self):
        object.__setattr__(self, "corrupted", frozenset(self.corrupted))
        if self.controller not in CONTROLLERS:
            raise ContractViolation(f"controller must be one of {CONTROLLERS}, got {self.controller!r}")

    def validate(self, topology: NetworkTopology) -> CorruptionSet:
        if {topology.alice, topology.bob} & self.corrupted:
            raise ContractViolation("alice/bob are marked dishonest via controller, not the corrupted set")
        unknown = self.corrupted - topology.nodes
        if unknown:
            raise ContractViolation(f"unknown corrupted nodes {sorted(unknown)}")
        return self

    def coalition(self, topology: NetworkTopology) -> frozenset[str]:
        extra = {"alice": {topology.alice}, "bob": {topology.bob}}.get(self.controller, set())
        return self.corrupted | extra


def _menger_bound(g: nx.Graph, a: str, b: str) -> int:
    if g.has_edge(a, b):
        h = g.copy()
        h.remove_edge(a, b)
        return 1 + (nx.node_connectivity(h, a, b) if nx.has_path(h, a, b) else 0)
    return nx.node_connectivity(g, a, b)


def _first_max_disjoint(paths: list[tuple[str, ...]], upper: int) -> list[tuple[str, ...]]:
    best: list[tuple[str, ...]] = []

    def search(i: int, chosen: list, used: set) -> bool:
        nonlocal best
        if len(chosen) > len(best):
            best = list(chosen)
            if len(best) == upper:
                return True
        if i == len(paths) or len(chosen) + (len(paths) - i) <= len(best):
            return False
        inner = set(paths[i][1:-1])
        if not inner & used:
            chosen.append(paths[i])
            if search(i + 1, chosen, used | inner):
                return True
            chosen.pop()
        return search(i + 1, chosen, used)

    search(0, [], set())
    return best


def enumerate_paths(topology: NetworkTopology, max_paths: int, *, limit: int = 20_000) -> PathSet:
    """Up to ``max_paths`` simple alice-to-bob paths.

    Paths are ranked lexicographically by node sequence, with the
    lexicographically first maximum internally-disjoint family placed first.
    At most ``limit`` simple paths are considered.
    """
    if max_paths < 1:
        raise ContractViolation("max_paths must be positive")
    g = topology.graph()
    a, b = topology.alice, topology.bob
    if not nx.has_path(g, a, b):
        raise NoPath(f"no path between {a} and {b}")
    paths = sorted(tuple(p) for p in itertools.islice(nx.all_simple_paths(g, a, b), limit))
    disjoint = _first_max_disjoint(paths, _menger_bound(g, a, b))
    rest = [p for p in paths if p not in disjoint]
    return PathSet(tuple((disjoint + rest)[:max_paths]))


def exists_honest_path(topology: NetworkTopology, path_set: PathSet, corruption: CorruptionSet) -> bool:
    """True iff some path has no corrupted internal node."""
    return any(not set(path_set.internal(j)) & corruption.corrupted for j in range(path_set.n))


def separates(topology: NetworkTopology, nodes: Iterable[str]) -> bool:
    """True iff removing ``nodes`` disconnects alice from bob in the whole graph."""
    g = topology.graph()
    g.remove_nodes_from(set(nodes) - {topology.alice, topology.bob})
    return not nx.has_path(g, topology.alice, topology.bob)


@dataclass(frozen=True)
class TranscriptEntry:
    """One message crossing one link (or one private channel) in one round."""

    round: int
    sender: str
    receiver: str
    tag: str
    payload: Any
    link_private: bool

    def key(self) -> tuple:
        return (self.round, self.sender, self.receiver, self.tag)

    def to_json(self) -> dict:
        return {
            "kind": "msg",
            "round": self.round,
            "sender": self.sender,
            "receiver": self.receiver,
            "tag": self.tag,
            "payload": encode(self.payload),
            "link_private": self.link_private,
        }


@dataclass(frozen=True)
class AdversaryView:
    """Everything a coalition observed in one execution."""

    entries: tuple[TranscriptEntry, ...] = ()
    ot_leaks: tuple[tuple, ...] = ()
    internal: tuple[tuple, ...] = ()

    def canonical(self) -> tuple:
        """Hashable, ordering-independent form used as a distribution key."""
        entries = tuple((e.round, e.sender, e.receiver, e.tag, e.payload)
                        for e in sorted(self.entries, key=TranscriptEntry.key))
        leaks = tuple(sorted(self.ot_leaks, key=lambda t: t[:5]))
        return (entries, leaks, self.internal)

    def is_empty(self) -> bool:
        return not (self.entries or self.ot_leaks or self.internal)

    def payloads(self, tag: str) -> list:
        return [e.payload for e in self.entries if e.tag == tag]

    def received(self, tag: str):
        """Output of a coalition-received OT session with this tag, if any."""
        for leak in self.ot_leaks:
            if leak[0] == "ot-recv" and leak[4] == tag:
                return leak[6]
        return None

    def restrict(self, prefix: str) -> AdversaryView:
        """Sub-view made of the messages and sessions whose tag starts with ``prefix``."""
        return AdversaryView(
            tuple(e for e in self.entries if e.tag.startswith(prefix)),
            tuple(t for t in self.ot_leaks if t[4].startswith(prefix)),
            (),
        )

    def __add__(self, other: AdversaryView) -> AdversaryView:
        return AdversaryView(self.entries + other.entries, self.ot_leaks + other.ot_leaks,
                             self.internal + other.internal)


Program = Callable[["Context"], Generator]


@dataclass(frozen=True)
class ProcessSpec:
    name: str
    node: str
    program: Program


@dataclass
class Adversary:
    """Behaviour of coalition nodes.

    ``programs`` replaces named processes hosted on coalition nodes.  The hooks
    are only consulted for coalition nodes: ``on_transmit(node, tag, payload)``
    for every hop a coalition node sends (originating or relaying),
    ``ot_choice(node, tag, choice)`` when a coalition node is an OT receiver,
    ``ot_inputs(node, tag, m0, m1)`` when it is an OT sender.
    """

    programs: Mapping[str, Program] = field(default_factory=dict)
    on_transmit: Callable[[str, str, Any], Any] | None = None
    ot_choice: Callable[[str, str, ChoiceBit], ChoiceBit] | None = None
    ot_inputs: Callable[[str, str, Any, Any], tuple] | None = None


class _LoggedRng:
    def __init__(self, base: Rng, log: list):
        self._base = base
        self._log = log

    def randbelow(self, n: int) -> int:
        d = self._base.randbelow(n)
        self._log.append(d)
        return d


@dataclass
class ProcessState:
    name: str
    node: str
    draws: list = field(default_factory=list)
    aux_draws: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    output: Any = None
    finished: bool = False

    def frozen(self) -> tuple:
        return (self.name, self.node, tuple(self.draws), tuple(self.aux_draws), tuple(self.notes))


class Context:
    """Handle a process uses to talk to the network."""

    def __init__(self, sim: Simulation, state: ProcessState):
        self._sim = sim
        self.state = state
        self.name = state.name
        self.node = state.node
        self.topology = sim.topology
        self.rng = _LoggedRng(sim.rng, state.draws)
        self.aux_rng = _LoggedRng(sim.aux_rng, state.aux_draws)
        self.round = 0

    @property
    def inbox(self) -> dict:
        return self._sim._inbox[self.node]

    def send(self, route: Sequence[str], tag: str, payload: Any, *, direct: bool = False) -> None:
        """Post ``payload`` along ``route`` (starting at this node).

        A one-node route delivers locally next round without touching a link.
        ``direct`` uses the private-channel overlay instead of topology edges.
        """
        route = tuple(route)
        if not route or route[0] != self.node:
            raise ContractViolation(f"route {list(route)} must start at {self.node}")
        if direct:
            if not self._sim.private_overlay:
                raise ContractViolation("direct channels need the private overlay")
            if len(route) > 2:
                raise ContractViolation("a direct send has exactly one hop")
        self._sim._post_message(route, tag, payload, direct)

    def offer_ot(self, receiver: str, tag: str, m0, m1) -> None:
        self._sim._post_offer(self.node, receiver, tag, m0, m1)

    def choose_ot(self, sender: str, tag: str, choice: ChoiceBit) -> None:
        self._sim._post_choice(sender, self.node, tag, choice)

    def note(self, key: str, value: Any) -> None:
        self.state.notes.append((key, value))

    def output(self, value: Any) -> None:
        self.state.output = value
        self.note("output", value)

    def has(self, tag: str) -> bool:
        return tag in self.inbox

    def wait(self, *tags: str):
        """Yield rounds until every tag has arrived; evaluates to their payloads."""
        while any(t not in self.inbox for t in tags):
            yield
        return [self.inbox[t] for t in tags]


@dataclass
class SimulationResult:
    topology: NetworkTopology
    corruption: CorruptionSet
    transcript: list[TranscriptEntry]
    sessions: list[OTSession]
    states: dict[str, ProcessState]
    rounds: int

    @property
    def outputs(self) -> dict[str, Any]:
        return {name: s.output for name, s in self.states.items()}

    def view_of(self, coalition: Iterable[str]) -> AdversaryView:
        members = frozenset(coalition)
        entries = tuple(e for e in self.transcript if e.sender in members or e.receiver in members)
        leaks = []
        for s in self.sessions:
            if s.receiver in members:
                leaks.append(s.receiver_leak())
            if s.sender in members:
                leaks.append(s.sender_leak())
        internal = tuple(st.frozen() for name, st in sorted(self.states.items()) if st.node in members)
        return AdversaryView(entries, tuple(leaks), internal)

    def view_for(self, corruption: CorruptionSet) -> AdversaryView:
        return self.view_of(corruption.coalition(self.topology))

    @property
    def view(self) -> AdversaryView:
        return self.view_for(self.corruption)

    def to_jsonl(self) -> str:
        records = [e.to_json() for e in self.transcript] + [s.to_json() for s in self.sessions]
        records.sort(key=lambda r: (r["round"], r["kind"], r["sender"], r["receiver"], r["tag"]))
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)


class Simulation:
    def __init__(
        self,
        topology: NetworkTopology,
        corruption: CorruptionSet,
        rng: Rng,
        *,
        adversary: Adversary | None = None,
        aux_rng: Rng | None = None,
        private_overlay: bool = False,
        link_ot=None,
        max_idle_rounds: int = 32,
        max_rounds: int = 10_000,
    ):
        self.topology = topology
        self.corruption = corruption.validate(topology)
        self.coalition = corruption.coalition(topology)
        self.rng = rng
        self.aux_rng = aux_rng if aux_rng is not None else rng
        self.adversary = adversary or Adversary()
        self.private_overlay = private_overlay
        self.link_ot = link_ot or IdealLinkOT()
        self.max_idle_rounds = max_idle_rounds
        self.max_rounds = max_rounds
        self._specs: list[ProcessSpec] = []
        self._inbox: dict[str, dict] = {n: {} for n in topology.nodes}
        self._posted: list = []
        self._offers: dict = {}
        self._choices: dict = {}

    def add(self, spec: ProcessSpec) -> None:
        if spec.node not in self.topology.nodes:
            raise ContractViolation(f"process {spec.name} placed on unknown node {spec.node}")
        if any(s.name == spec.name for s in self._specs):
            raise ContractViolation(f"duplicate process name {spec.name}")
        self._specs.append(spec)

    def _post_message(self, route, tag, payload, direct):
        self._posted.append(("msg", route, 0, tag, payload, direct))

    def _post_offer(self, sender, receiver, tag, m0, m1):
        if not self.topology.adjacent(sender, receiver):
            raise NotALink(f"{sender} and {receiver} share no link")
        if sender in self.coalition and self.adversary.ot_inputs:
            m0, m1 = self.adversary.ot_inputs(sender, tag, m0, m1)
        self._offers.setdefault((sender, receiver, tag), (m0, m1))
        self._posted.append(("ot",))

    def _post_choice(self, sender, receiver, tag, choice):
        if not self.topology.adjacent(sender, receiver):
            raise NotALink(f"{sender} and {receiver} share no link")
        if receiver in self.coalition and self.adversary.ot_choice:
            choice = self.adversary.ot_choice(receiver, tag, choice)
        self._choices.setdefault((sender, receiver, tag), ChoiceBit(int(choice) & 1))
        self._posted.append(("ot",))

    def _honest(self, node: str) -> bool:
        return node not in self.coalition

    def run(self) -> SimulationResult:
        states: dict[str, ProcessState] = {}
        procs = []
        for spec in self._specs:
            program = spec.program
            if spec.name in self.adversary.programs:
                if spec.node not in self.coalition:
                    raise ContractViolation(f"adversary cannot replace {spec.name} on honest node {spec.node}")
                program = self.adversary.programs[spec.name]
            state = ProcessState(spec.name, spec.node)
            states[spec.name] = state
            procs.append((state, program(Context(self, state))))

        transcript: list[TranscriptEntry] = []
        sessions: list[OTSession] = []
        hops: list = []
        arriving: list = []
        idle = 0
        r = 0
        while True:
            if r > self.max_rounds:
                raise Deadlock(f"exceeded {self.max_rounds} rounds")
            progress = bool(arriving)
            for node, tag, payload in arriving:
                self._inbox[node].setdefault(tag, payload)
            arriving = []

            still = []
            for state, gen in procs:
                try:
                    next(gen)
                    still.append((state, gen))
                except StopIteration:
                    state.finished = True
                    progress = True
            procs = still

            for item in self._posted:
                progress = True
                if item[0] == "msg":
                    _, route, _, tag, payload, direct = item
                    if len(route) == 1:
                        arriving.append((route[0], tag, payload))
                    else:
                        hops.append((route, 0, tag, payload, direct))
            self._posted = []

            next_hops = []
            for route, i, tag, payload, direct in hops:
                progress = True
                a, b = route[i], route[i + 1]
                if not direct and not self.topology.adjacent(a, b):
                    raise ContractViolation(f"hop {a}-{b} of {tag} is not a link")
                if a in self.coalition and self.adversary.on_transmit:
                    payload = self.adversary.on_transmit(a, tag, payload)
                    if payload is DROP:
                        continue
                transcript.append(TranscriptEntry(r, a, b, tag, payload, self._honest(a) and self._honest(b)))
                if i + 2 == len(route):
                    arriving.append((b, tag, payload))
                else:
                    next_hops.append((route, i + 1, tag, payload, direct))
            hops = next_hops

            for key in [k for k in self._offers if k in self._choices]:
                sender, receiver, tag = key
                m0, m1 = self._offers.pop(key)
                choice = self._choices.pop(key)
                out = self.link_ot.transfer(m0, m1, choice, self.aux_rng)
                sessions.append(OTSession(sender, receiver, tag, (m0, m1), choice, out, r))
                arriving.append((receiver, tag, out))
                progress = True

            if not procs and not hops and not arriving:
                break
            idle = 0 if progress else idle + 1
            if idle > self.max_idle_rounds:
                waiting = sorted(s.name for s, _ in procs)
                raise Deadlock(f"no progress for {idle} rounds; still waiting: {waiting}")
            r += 1

        return SimulationResult(self.topology, self.corruption, transcript, sessions, states, r)


def run_simulation(
    topology: NetworkTopology,
    path_set: PathSet | None,
    corruption: CorruptionSet,
    program: Callable[[PathSet | None], Iterable[ProcessSpec]],
    rng: Rng,
    **options,
) -> SimulationResult:
    """Build the processes ``program(path_set)`` and run them to completion."""
    if path_set is not None:
        path_set.validate(topology)
    sim = Simulation(topology, corruption, rng, **options)
    for spec in program(path_set):
        sim.add(spec)
    return sim.run()
