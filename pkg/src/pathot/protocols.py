"""Long-distance OT over a network with link-OT only between neighbours.

* Protocol 1: Bob XOR-shares his choice bit along the N paths; Alice runs a
  link-OT with each of her neighbours v_j on masked values; the v_j forward
  what they received to Bob.  Unconditionally secure for Alice, secure for Bob
  when one path is entirely honest.
* Protocol 2: Alice XOR-shares both inputs towards Bob's neighbours w_j, and
  Bob runs a link-OT with each w_j.  The mirror-image guarantees.
* Hybrid variants send the shares over direct private channels instead of
  relaying them along the paths.
* The combined protocol XOR-combines Protocol 1 with the classical DDH OT.
* The weak OT runs Protocol 1 and Protocol 2 back to back.
* :func:`tamper_check_run` wraps a protocol in a cut-and-choose test.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Any, Callable

from .classical_ot import (
    TOY_GROUP,
    CyclicGroup,
    receiver_request,
    sender_respond,
    decrypt,
)
from .core import (
    BitString,
    ChoiceBit,
    RngLike,
    as_rng,
    reconstruct_xor,
    share_xor,
)
from .errors import Abort, ContractViolation
from .netsim import (
    Adversary,
    AdversaryView,
    CorruptionSet,
    NetworkTopology,
    PathSet,
    ProcessSpec,
    Simulation,
    SimulationResult,
)

VARIANTS = ("protocol1", "protocol2", "hybrid1", "hybrid2")


@dataclass(frozen=True)
class PathOTInstance:
    path_set: PathSet
    s0: BitString
    s1: BitString
    choice: ChoiceBit
    variant: str = "protocol1"

    def __post_init__(self):
        if self.s0.length != self.s1.length:
            raise ContractViolation("s0 and s1 must have the same length")
        if self.variant not in VARIANTS:
            raise ContractViolation(f"unknown variant {self.variant!r}")
        if not isinstance(self.choice, ChoiceBit):
            object.__setattr__(self, "choice", ChoiceBit(int(self.choice)))

    @property
    def ell(self) -> int:
        return self.s0.length

    @property
    def expected(self) -> BitString:
        return self.s1 if self.choice.value else self.s0

    def with_variant(self, variant: str) -> PathOTInstance:
        return dataclasses.replace(self, variant=variant)


@dataclass(frozen=True)
class Protocol1State:
    """Bob's shares, Alice's keys and the link-OT tables of one Protocol 1 run."""

    shares: tuple[ChoiceBit, ...]
    keys: tuple[BitString, ...]
    tables: tuple[tuple[BitString, BitString], ...]

    def check(self, s0: BitString, s1: BitString, c: ChoiceBit) -> None:
        assert reconstruct_xor(list(self.shares)) == c
        assert reconstruct_xor(list(self.keys)) == s0.zero()
        assert self.tables == tuple(protocol1_tables(s0, s1, self.keys))


@dataclass(frozen=True)
class WeakOTInstance:
    """Four inputs for Alice, two choice bits for Bob."""

    path_set: PathSet
    s00: BitString
    s01: BitString
    s10: BitString
    s11: BitString
    c: ChoiceBit
    c_prime: ChoiceBit

    def __post_init__(self):
        if len({s.length for s in (self.s00, self.s01, self.s10, self.s11)}) != 1:
            raise ContractViolation("all four inputs must have the same length")

    @property
    def inputs(self) -> tuple[BitString, ...]:
        return (self.s00, self.s01, self.s10, self.s11)


def protocol1_tables(s0: BitString, s1: BitString, keys) -> list[tuple[BitString, BitString]]:
    """(t_0j, t_1j): (s0 + r_1, s1 + r_1) on path 1, (r_j, s0 + s1 + r_j) elsewhere."""
    diff = s0 ^ s1
    tables = [(s0 ^ keys[0], s1 ^ keys[0])]
    tables += [(r, diff ^ r) for r in keys[1:]]
    return tables


def coerce_choice(x: Any) -> ChoiceBit:
    """Whatever arrived where a choice bit was expected, read as one bit."""
    if isinstance(x, ChoiceBit):
        return x
    if isinstance(x, BitString):
        return ChoiceBit(x.value & 1)
    if isinstance(x, (int, bool)):
        return ChoiceBit(int(x) & 1)
    return ChoiceBit(0)


def coerce_bits(x: Any, ell: int) -> BitString:
    """Whatever arrived where an ell-bit string was expected, truncated or zero-padded."""
    if isinstance(x, BitString):
        return x.fit(ell)
    if isinstance(x, (int, bool)) and not isinstance(x, ChoiceBit):
        return BitString(int(x) % (1 << ell), ell)
    return BitString.zeros(ell)


def coerce_pair(x: Any, ell: int) -> tuple[BitString, BitString]:
    if isinstance(x, (tuple, list)) and len(x) == 2:
        return coerce_bits(x[0], ell), coerce_bits(x[1], ell)
    return BitString.zeros(ell), BitString.zeros(ell)


def parallel(*gens):
    """Run sub-processes of one node in lockstep; evaluates to their return values."""
    results = [None] * len(gens)
    live = list(enumerate(gens))
    while live:
        still = []
        for i, g in live:
            try:
                next(g)
                still.append((i, g))
            except StopIteration as stop:
                results[i] = stop.value
        live = still
        if live:
            yield
    return results


def _bob_to(path: tuple[str, ...], node: str) -> tuple[str, ...]:
    """Route from Bob back along ``path`` to ``node``."""
    rev = path[::-1]
    return rev[:rev.index(node) + 1]


def _to_bob(path: tuple[str, ...], node: str) -> tuple[str, ...]:
    return path[path.index(node):]


def _alice_to(path: tuple[str, ...], node: str) -> tuple[str, ...]:
    return path[:path.index(node) + 1]


def _route(full: tuple[str, ...], direct: bool) -> tuple[tuple[str, ...], bool]:
    if direct and len(full) > 2:
        return (full[0], full[-1]), True
    return full, direct and len(full) == 2


# Protocol 1 -----------------------------------------------------------------

def p1_alice(ctx, paths: PathSet, s0: BitString, s1: BitString, prefix: str = ""):
    ctx.note(prefix + "inputs", (s0, s1))
    keys = share_xor(BitString.zeros(s0.length), paths.n, ctx.rng)
    for j, (t0, t1) in enumerate(protocol1_tables(s0, s1, keys)):
        ctx.offer_ot(paths.alice_neighbor(j), f"{prefix}ot{j + 1}", t0, t1)
    return keys
    yield


def p1_bob(ctx, paths: PathSet, c: ChoiceBit, ell: int, prefix: str = "", direct: bool = False):
    ctx.note(prefix + "choice", c)
    shares = share_xor(c, paths.n, ctx.rng)
    for j, cj in enumerate(shares):
        route, d = _route(_bob_to(paths[j], paths.alice_neighbor(j)), direct)
        ctx.send(route, f"{prefix}c{j + 1}", cj, direct=d)
    ts = yield from ctx.wait(*(f"{prefix}t{j + 1}" for j in range(paths.n)))
    return reconstruct_xor([coerce_bits(t, ell) for t in ts])


def p1_relay(paths: PathSet, j: int, alice: str, prefix: str = "", direct: bool = False):
    """v_j's program: take c_j, run the link-OT with Alice, forward the result to Bob."""
    v = paths.alice_neighbor(j)

    def program(ctx):
        (cj,) = yield from ctx.wait(f"{prefix}c{j + 1}")
        ctx.choose_ot(alice, f"{prefix}ot{j + 1}", coerce_choice(cj))
        (t,) = yield from ctx.wait(f"{prefix}ot{j + 1}")
        route, d = _route(_to_bob(paths[j], v), direct)
        ctx.send(route, f"{prefix}t{j + 1}", t, direct=d)

    return program


def protocol1_processes(topology: NetworkTopology, paths: PathSet, s0: BitString, s1: BitString,
                        c: ChoiceBit, *, prefix: str = "", direct: bool = False) -> list[ProcessSpec]:
    def alice(ctx):
        yield from p1_alice(ctx, paths, s0, s1, prefix)

    def bob(ctx):
        out = yield from p1_bob(ctx, paths, c, s0.length, prefix, direct)
        ctx.output(out)

    specs = [ProcessSpec(prefix + "alice", topology.alice, alice),
             ProcessSpec(prefix + "bob", topology.bob, bob)]
    specs += [ProcessSpec(f"{prefix}relay{j + 1}", paths.alice_neighbor(j),
                          p1_relay(paths, j, topology.alice, prefix, direct)) for j in range(paths.n)]
    return specs


# Protocol 2 -----------------------------------------------------------------

def protocol2_processes(topology: NetworkTopology, paths: PathSet, s0: BitString, s1: BitString,
                        c: ChoiceBit, *, prefix: str = "", direct: bool = False) -> list[ProcessSpec]:
    ell = s0.length
    bob_node = topology.bob

    def alice(ctx):
        ctx.note(prefix + "inputs", (s0, s1))
        zero_shares = share_xor(s0, paths.n, ctx.rng)
        one_shares = share_xor(s1, paths.n, ctx.rng)
        for j in range(paths.n):
            route, d = _route(_alice_to(paths[j], paths.bob_neighbor(j)), direct)
            ctx.send(route, f"{prefix}sh{j + 1}", (zero_shares[j], one_shares[j]), direct=d)
        return
        yield

    def dealer(j):
        def program(ctx):
            (pair,) = yield from ctx.wait(f"{prefix}sh{j + 1}")
            a, b = coerce_pair(pair, ell)
            ctx.offer_ot(bob_node, f"{prefix}ot{j + 1}", a, b)
        return program

    def bob(ctx):
        ctx.note(prefix + "choice", c)
        for j in range(paths.n):
            ctx.choose_ot(paths.bob_neighbor(j), f"{prefix}ot{j + 1}", c)
        got = yield from ctx.wait(*(f"{prefix}ot{j + 1}" for j in range(paths.n)))
        ctx.output(reconstruct_xor([coerce_bits(g, ell) for g in got]))

    specs = [ProcessSpec(prefix + "alice", topology.alice, alice),
             ProcessSpec(prefix + "bob", bob_node, bob)]
    specs += [ProcessSpec(f"{prefix}dealer{j + 1}", paths.bob_neighbor(j), dealer(j)) for j in range(paths.n)]
    return specs


# Running --------------------------------------------------------------------

@dataclass
class RunResult:
    output: Any
    sim: SimulationResult

    @property
    def transcript(self):
        return self.sim.transcript

    @property
    def view(self) -> AdversaryView:
        return self.sim.view

    def view_for(self, corruption: CorruptionSet) -> AdversaryView:
        return self.sim.view_for(corruption)


def _execute(topology, corruption, rng, specs, *, adversary=None, overlay=False, aux_rng=None,
             link_ot=None, output_of="bob") -> RunResult:
    sim = Simulation(topology, corruption or CorruptionSet(), rng, adversary=adversary, aux_rng=aux_rng,
                     private_overlay=overlay, link_ot=link_ot)
    for spec in specs:
        sim.add(spec)
    result = sim.run()
    return RunResult(result.states[output_of].output, result)


def _check(instance: PathOTInstance, topology: NetworkTopology, allowed: tuple[str, ...]) -> None:
    if instance.variant not in allowed:
        raise ContractViolation(f"variant {instance.variant!r} not accepted here (want one of {allowed})")
    instance.path_set.validate(topology)


def run_protocol1(instance: PathOTInstance, topology: NetworkTopology, corruption: CorruptionSet | None = None,
                  tape: RngLike = None, *, adversary: Adversary | None = None, link_ot=None) -> RunResult:
    _check(instance, topology, ("protocol1",))
    specs = protocol1_processes(topology, instance.path_set, instance.s0, instance.s1, instance.choice)
    return _execute(topology, corruption, as_rng(tape), specs, adversary=adversary, link_ot=link_ot)


def run_protocol2(instance: PathOTInstance, topology: NetworkTopology, corruption: CorruptionSet | None = None,
                  tape: RngLike = None, *, adversary: Adversary | None = None, link_ot=None) -> RunResult:
    _check(instance, topology, ("protocol2",))
    specs = protocol2_processes(topology, instance.path_set, instance.s0, instance.s1, instance.choice)
    return _execute(topology, corruption, as_rng(tape), specs, adversary=adversary, link_ot=link_ot)


def run_hybrid(instance: PathOTInstance, topology: NetworkTopology, corruption: CorruptionSet | None = None,
               tape: RngLike = None, *, adversary: Adversary | None = None, link_ot=None) -> RunResult:
    """Protocol 1 or 2 with the path traffic moved onto direct private channels."""
    _check(instance, topology, ("hybrid1", "hybrid2"))
    build = protocol1_processes if instance.variant == "hybrid1" else protocol2_processes
    specs = build(topology, instance.path_set, instance.s0, instance.s1, instance.choice, direct=True)
    return _execute(topology, corruption, as_rng(tape), specs, adversary=adversary, overlay=True, link_ot=link_ot)


def run_path_ot(instance: PathOTInstance, topology: NetworkTopology, corruption: CorruptionSet | None = None,
                tape: RngLike = None, **kwargs) -> RunResult:
    """Dispatch on ``instance.variant``."""
    runner = {"protocol1": run_protocol1, "protocol2": run_protocol2,
              "hybrid1": run_hybrid, "hybrid2": run_hybrid}[instance.variant]
    return runner(instance, topology, corruption, tape, **kwargs)


# Combiner -------------------------------------------------------------------

def _ddh_receiver(ctx, group: CyclicGroup, c: ChoiceBit, ell: int, route: tuple[str, ...]):
    pk, sk, e = receiver_request(group, c, ctx.aux_rng)
    ctx.send(route, "B/req", (pk, e))
    (resp,) = yield from ctx.wait("B/resp")
    size = group.chunk_bits
    lengths = [len(ch) for ch in BitString.zeros(ell).chunks(size)]
    out = []
    for i, n in enumerate(lengths):
        try:
            value = decrypt(group, sk, resp[i][int(c)], bound=1 << n)
        except (TypeError, ValueError, IndexError):
            value = 0
        out.append(BitString(value, n))
    return BitString.concat(out)


def _ddh_sender(ctx, group: CyclicGroup, m0: BitString, m1: BitString, route: tuple[str, ...]):
    (req,) = yield from ctx.wait("B/req")
    try:
        pk, e = req
    except (TypeError, ValueError):
        pk, e = group.g, (1, 1)
    resp = tuple(sender_respond(group, pk, e, a.value, b.value, ctx.aux_rng)
                 for a, b in zip(m0.chunks(group.chunk_bits), m1.chunks(group.chunk_bits)))
    ctx.send(route, "B/resp", resp)


def combined_processes(topology: NetworkTopology, paths: PathSet, s0: BitString, s1: BitString,
                       c: ChoiceBit, group: CyclicGroup) -> list[ProcessSpec]:
    """Two-candidate XOR combiner.

    Candidate A is Protocol 1 on (s0 + r, s1 + r) with choice cA; candidate B
    is the DDH OT on (r, s0 + s1 + r) with choice cB, its two messages routed
    along the first path.  c = cA + cB, and Bob outputs outA + outB.
    """
    ell = s0.length
    route_to_alice = paths[0][::-1]
    route_to_bob = paths[0]

    def alice(ctx):
        ctx.note("inputs", (s0, s1))
        r = BitString.random(ell, ctx.rng)
        yield from parallel(p1_alice(ctx, paths, s0 ^ r, s1 ^ r, "A/"),
                            _ddh_sender(ctx, group, r, s0 ^ s1 ^ r, route_to_bob))

    def bob(ctx):
        ctx.note("choice", c)
        cb = ChoiceBit.random(ctx.rng)
        ca = c ^ cb
        out_a, out_b = yield from parallel(p1_bob(ctx, paths, ca, ell, "A/"),
                                           _ddh_receiver(ctx, group, cb, ell, route_to_alice))
        ctx.output(out_a ^ out_b)

    specs = [ProcessSpec("alice", topology.alice, alice), ProcessSpec("bob", topology.bob, bob)]
    specs += [ProcessSpec(f"A/relay{j + 1}", paths.alice_neighbor(j), p1_relay(paths, j, topology.alice, "A/"))
              for j in range(paths.n)]
    return specs


def run_combined(instance: PathOTInstance, topology: NetworkTopology, corruption: CorruptionSet | None = None,
                 group: CyclicGroup = TOY_GROUP, tape: RngLike = None, *, adversary: Adversary | None = None,
                 aux_tape: RngLike = None) -> RunResult:
    """Protocol 1 combined with the DDH OT: Bob's choice stays hidden if either holds.

    ``aux_tape`` feeds the DDH candidate separately, which lets exact analyses
    enumerate the main tape while fixing the group randomness.
    """
    instance.path_set.validate(topology)
    specs = combined_processes(topology, instance.path_set, instance.s0, instance.s1, instance.choice, group)
    aux = as_rng(aux_tape) if aux_tape is not None else None
    return _execute(topology, corruption, as_rng(tape), specs, adversary=adversary, aux_rng=aux)


# Weak OT --------------------------------------------------------------------

@dataclass
class WeakRunResult:
    outputs: tuple[BitString, BitString]
    runs: tuple[SimulationResult, SimulationResult]

    @property
    def offset(self) -> int:
        return self.runs[0].rounds + 1

    @property
    def transcript(self):
        second = [dataclasses.replace(e, round=e.round + self.offset) for e in self.runs[1].transcript]
        return self.runs[0].transcript + second

    def view_for(self, corruption: CorruptionSet) -> AdversaryView:
        first = self.runs[0].view_for(corruption)
        second = self.runs[1].view_for(corruption)
        second = AdversaryView(tuple(dataclasses.replace(e, round=e.round + self.offset) for e in second.entries),
                               tuple((t[0], t[1] + self.offset) + t[2:] for t in second.ot_leaks),
                               second.internal)
        return first + second

    @property
    def view(self) -> AdversaryView:
        return self.view_for(self.runs[0].corruption)


def run_weak_ot(instance: WeakOTInstance, topology: NetworkTopology, corruption: CorruptionSet | None = None,
                tape: RngLike = None, *, adversary: Adversary | None = None) -> WeakRunResult:
    """Protocol 1 on (s00, s01) with choice c, then Protocol 2 on (s10, s11) with choice c'."""
    instance.path_set.validate(topology)
    rng = as_rng(tape)
    paths = instance.path_set
    first = _execute(topology, corruption, rng,
                     protocol1_processes(topology, paths, instance.s00, instance.s01, instance.c, prefix="w1/"),
                     adversary=adversary, output_of="w1/bob")
    second = _execute(topology, corruption, rng,
                      protocol2_processes(topology, paths, instance.s10, instance.s11, instance.c_prime, prefix="w2/"),
                      adversary=adversary, output_of="w2/bob")
    return WeakRunResult((first.output, second.output), (first.sim, second.sim))


# Cut-and-choose tamper check -------------------------------------------------

@dataclass(frozen=True)
class TrialRun:
    s0: BitString
    s1: BitString
    c: ChoiceBit
    output: BitString

    @property
    def consistent(self) -> bool:
        return self.output == (self.s1 if self.c.value else self.s0)


@dataclass
class TamperCheckResult:
    accepted: bool
    output: BitString | None
    abort: Abort | None
    opened: tuple[int, ...]
    runs: tuple[TrialRun, ...]


def sample_run(instance: PathOTInstance, topology: NetworkTopology, corruption: CorruptionSet | None,
             rng, adversary: Adversary | None = None) -> TrialRun:
    """One execution on fresh uniform inputs (s0, s1 from Alice, c from Bob)."""
    s0 = BitString.random(instance.ell, rng)
    s1 = BitString.random(instance.ell, rng)
    c = ChoiceBit.random(rng)
    fresh = dataclasses.replace(instance, s0=s0, s1=s1, choice=c)
    result = run_path_ot(fresh, topology, corruption, rng, adversary=adversary)
    return TrialRun(s0, s1, c, result.output)


def opened_count(k: int, open_fraction: float) -> int:
    m = round(open_fraction * k)
    if k < 2 or not 1 <= m <= k - 1:
        raise ContractViolation(f"need k >= 2 and 1 <= open_fraction*k <= k-1 (k={k}, open_fraction={open_fraction})")
    return m


def tamper_check_run(instance: PathOTInstance, topology: NetworkTopology, corruption: CorruptionSet | None,
                     k: int, open_fraction: float, tape: RngLike = None,
                     adversary_for_run: Callable[[int], Adversary | None] | None = None,
                     *, subset_tape: RngLike = None) -> TamperCheckResult:
    """Cut-and-choose: k random-input runs, open a random subset, use a survivor.

    Opened runs are revealed by both ends and checked against s_c.  The first
    unopened run is turned into an OT of the real inputs: Bob announces
    e = c + c', Alice answers (s0 + s'_e, s1 + s'_{1-e}), and Bob unmasks
    with his run output s'_{c'}.  ``subset_tape`` draws the opened subset
    from its own stream (default: the main tape, after the runs).
    """
    m = opened_count(k, open_fraction)
    rng = as_rng(tape)
    runs = tuple(sample_run(instance, topology, corruption, rng,
                          adversary_for_run(i) if adversary_for_run else None) for i in range(k))
    picker = as_rng(subset_tape) if subset_tape is not None else rng
    order = list(range(k))
    for i in range(m):
        j = i + picker.randbelow(k - i)
        order[i], order[j] = order[j], order[i]
    opened = tuple(sorted(order[:m]))
    for i in opened:
        if not runs[i].consistent:
            return TamperCheckResult(False, None, Abort(i), opened, runs)
    keep = runs[min(set(range(k)) - set(opened))]
    e = instance.choice ^ keep.c
    pads = (keep.s0, keep.s1)
    y0 = instance.s0 ^ pads[e.value]
    y1 = instance.s1 ^ pads[1 - e.value]
    output = (y1 if instance.choice.value else y0) ^ keep.output
    return TamperCheckResult(True, output, None, opened, runs)


def runner_for(variant: str, topology: NetworkTopology, paths: PathSet,
               corruption: CorruptionSet | None = None, adversary: Adversary | None = None,
               *, group: CyclicGroup = TOY_GROUP, aux_seed: int = 0):
    """``run(s0, s1, c, rng) -> RunResult`` for one protocol in a fixed setting.

    For ``combined`` the DDH candidate draws from a fixed auxiliary stream so
    the main tape stays enumerable.
    """
    if variant == "combined":
        def run(s0, s1, c, rng):
            inst = PathOTInstance(paths, s0, s1, c)
            return run_combined(inst, topology, corruption, group, rng, adversary=adversary, aux_tape=aux_seed)
        return run
    if variant not in VARIANTS:
        raise ContractViolation(f"no runner for {variant!r}")

    def run(s0, s1, c, rng):
        return run_path_ot(PathOTInstance(paths, s0, s1, c, variant), topology, corruption, rng, adversary=adversary)
    return run
