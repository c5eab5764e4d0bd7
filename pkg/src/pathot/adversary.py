"""Attack strategies for every dishonest behaviour the protocols are analysed against."""

from __future__ import annotations

import dataclasses
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Sequence

from .analysis import (
    ENUMERATION_BOUND,
    choice_distance,
    choice_override,
    correctness_rate,
    distribution,
    hidden_input_guessing,
    input_guessing,
    ml_guesser,
    monte_carlo,
    statistical_distance,
)
from .classical_ot import CyclicGroup, sender_guess_choice
from .core import BitString, ChoiceBit, Rng, SeededRng, as_rng, reconstruct_xor
from .errors import ContractViolation, NotSeparating, RefusesToBruteForce
from .netsim import (
    Adversary,
    AdversaryView,
    CorruptionSet,
    NetworkTopology,
    PathSet,
    SimulationResult,
    TranscriptEntry,
    separates,
)
from .protocols import (
    PathOTInstance,
    protocol1_processes,
    protocol2_processes,
    run_combined,
    run_protocol1,
    runner_for,
    sample_run,
    opened_count,
    _execute,
)


@dataclass
class AttackStrategy:
    """A coalition's behaviour plus how it turns its view into a guess."""

    name: str
    corruption: CorruptionSet
    adversary: Adversary | None
    guess: Callable[[AdversaryView, Rng], Any]


# Claim 1: a Bob coalition choosing its own link-OT inputs --------------------

@dataclass
class CollusionResult:
    learned: frozenset
    determined: int
    undetermined: int
    guessing: tuple[Fraction, Fraction] | None = None


def colluding_bob_attack(d: Sequence[int], instance: PathOTInstance, topology: NetworkTopology,
                         tape=None, *, certify: bool = False) -> CollusionResult:
    """Bob plus every intermediary run Protocol 1 with OT choices ``d``.

    The coalition XORs what it received, which is s_{d_1 + ... + d_N}.
    With ``certify`` the exact guessing probabilities of (s0, s1) over
    uniform inputs are attached; the undetermined one must equal 2^-ell.
    """
    paths = instance.path_set
    if len(d) != paths.n:
        raise ContractViolation(f"need one choice per path ({paths.n}), got {len(d)}")
    inner = {n for j in range(paths.n) for n in paths.internal(j)}
    corruption = CorruptionSet(inner, "bob")
    choices = {f"ot{j + 1}": int(d[j]) & 1 for j in range(paths.n)}
    adversary = choice_override(choices)
    result = run_protocol1(instance, topology, corruption, tape, adversary=adversary)
    got = [result.view.received(f"ot{j + 1}") for j in range(paths.n)]
    learned = reconstruct_xor(got)
    determined = sum(choices.values()) % 2
    guessing = None
    if certify:
        run = runner_for("protocol1", topology, paths, corruption, adversary)
        guessing = input_guessing(run, corruption, instance.ell, instance.choice)
    return CollusionResult(frozenset({learned}), determined, 1 - determined, guessing)


# Claim 2: no honest path --------------------------------------------------

def _claim2_setting(topology: NetworkTopology, corruption_m, check_separation: bool) -> frozenset:
    m = frozenset(corruption_m.corrupted if isinstance(corruption_m, CorruptionSet) else corruption_m)
    if check_separation and not separates(topology, m):
        raise NotSeparating(f"{sorted(m)} does not separate {topology.alice} from {topology.bob}")
    return m


def _claim2_joint(run, m: frozenset, ell: int, bound: int):
    def experiment(rng):
        s0 = BitString.random(ell, rng)
        s1 = BitString.random(ell, rng)
        c = ChoiceBit.random(rng)
        view = run(s0, s1, c, rng).sim.view_of(m).canonical()
        return s0, s1, c, view

    return distribution(experiment, bound)


def claim2_guessers(protocol: str, topology: NetworkTopology, paths: PathSet, m: frozenset, ell: int,
                    bound: int = ENUMERATION_BOUND) -> tuple[dict, dict]:
    """M's maximum-likelihood guessers for s0 and s1, from its exact posterior."""
    run = runner_for(protocol, topology, paths, CorruptionSet(m, "alice"))
    joint = _claim2_joint(run, m, ell, bound)
    return (ml_guesser(joint.marginal(lambda k: (k[0], k[3]))),
            ml_guesser(joint.marginal(lambda k: (k[1], k[3]))))


def _claim2_trial(run, m, ell, guessers):
    def trial(rng):
        s0 = BitString.random(ell, rng)
        s1 = BitString.random(ell, rng)
        c = ChoiceBit.random(rng)
        view = run(s0, s1, c, rng).sim.view_of(m).canonical()
        b = rng.randbelow(2)
        guess = guessers[b].get(view)
        alice_says = b if guess == (s0, s1)[b] else 1 - b
        return alice_says == c.value
    return trial


def claim2_exact(protocol: str, topology: NetworkTopology, paths: PathSet, corruption_m, ell: int,
                 *, check_separation: bool = True, bound: int = ENUMERATION_BOUND) -> Fraction:
    """Exact success probability of dishonest Alice's guess of c via M.

    Alice runs honestly on random inputs, picks b at random and asks M for
    s_b; she answers b if M was right and 1 - b otherwise.
    """
    m = _claim2_setting(topology, corruption_m, check_separation)
    guessers = claim2_guessers(protocol, topology, paths, m, ell, bound)
    run = runner_for(protocol, topology, paths, CorruptionSet(m, "alice"))
    return distribution(_claim2_trial(run, m, ell, guessers), bound).get(True, Fraction(0))


def claim2_attack(protocol: str, topology: NetworkTopology, paths: PathSet, corruption_m, ell: int,
                  trials: int, seed: int = 0, *, check_separation: bool = True) -> tuple[float, float]:
    """Monte Carlo frequency (and 99% half-width) of the same attack."""
    m = _claim2_setting(topology, corruption_m, check_separation)
    guessers = claim2_guessers(protocol, topology, paths, m, ell)
    run = runner_for(protocol, topology, paths, CorruptionSet(m, "alice"))
    return monte_carlo(_claim2_trial(run, m, ell, guessers), trials, seed)


def claim2_dichotomy(protocol: str, topology: NetworkTopology, paths: PathSet, corruption_m, ell: int,
                     *, bound: int = ENUMERATION_BOUND) -> dict[str, Fraction]:
    """Smallest epsilon each condition tolerates when M separates Alice from Bob.

    ``alice``: Pr[Alice guesses c] - 1/2 under the attack above.
    ``bob``: Pr[Bob and M guess the input they know least about] - 2^-ell, Bob honest.
    ``correctness``: 1 - Pr[Bob outputs s_c].
    No protocol can keep all three below 1/4 - 2^-(ell+2).
    """
    m = _claim2_setting(topology, corruption_m, True)
    eps_alice = claim2_exact(protocol, topology, paths, m, ell, bound=bound) - Fraction(1, 2)
    bob_side = CorruptionSet(m, "bob")
    run = runner_for(protocol, topology, paths, bob_side)
    guesses = []
    for c in (0, 1):
        guesses.append(hidden_input_guessing(run, bob_side, ell, ChoiceBit(c), bound))
    eps_bob = max(guesses) - Fraction(1, 2 ** ell)
    eps_correct = 1 - correctness_rate(runner_for(protocol, topology, paths), ell, bound)
    return {"alice": eps_alice, "bob": eps_bob, "correctness": eps_correct}


# Tampering intermediaries ---------------------------------------------------

def flip_adversary(paths: PathSet, j: int, node: str, target: str = "choice",
                   mask: BitString | None = None) -> Adversary:
    """Corrupt ``node`` on path ``j`` (0-based) flips c_j or XORs ``mask`` into t_j."""
    if node not in paths.internal(j):
        raise ContractViolation(f"{node} is not an internal node of path {j}")
    v = paths.alice_neighbor(j)
    ctag, otag, ttag = f"c{j + 1}", f"ot{j + 1}", f"t{j + 1}"
    if target == "choice":
        def on_transmit(at, tag, payload):
            return payload.flip() if at == node and tag == ctag and isinstance(payload, ChoiceBit) else payload

        def ot_choice(at, tag, choice):
            return choice.flip() if at == node == v and tag == otag else choice

        return Adversary(on_transmit=on_transmit, ot_choice=ot_choice)
    if target == "output":
        def on_transmit(at, tag, payload):
            if at == node and tag == ttag and isinstance(payload, BitString):
                return payload ^ (mask if mask is not None else BitString((1 << payload.length) - 1, payload.length))
            return payload

        return Adversary(on_transmit=on_transmit)
    raise ContractViolation(f"unknown tamper target {target!r}")


def tamper_attack(flip_target: int, instance: PathOTInstance, topology: NetworkTopology, tape=None, *,
                  node: str | None = None, target: str = "choice", mask: BitString | None = None) -> BitString:
    """Bob's output when one intermediary on path ``flip_target`` tampers (everyone else honest)."""
    paths = instance.path_set
    node = node or paths.alice_neighbor(flip_target)
    corruption = CorruptionSet({node}, "independent")
    adversary = flip_adversary(paths, flip_target, node, target, mask)
    return run_protocol1(instance, topology, corruption, tape, adversary=adversary).output


def tamper_detection_probability(instance: PathOTInstance, topology: NetworkTopology,
                                 corruption: CorruptionSet | None, k: int, open_fraction: float,
                                 adversary_for_run: Callable[[int], Adversary | None] | None = None,
                                 *, given_inconsistent: Sequence[int] = ()) -> Fraction:
    """Exact abort probability of :func:`tamper_check_run`.

    Each run's inconsistency probability is computed by enumerating that
    run's tape; opened subsets are enumerated explicitly.  Runs listed in
    ``given_inconsistent`` are conditioned on being inconsistent.
    """
    m = opened_count(k, open_fraction)
    fail = []
    for i in range(k):
        if i in given_inconsistent:
            fail.append(Fraction(1))
            continue
        adversary = adversary_for_run(i) if adversary_for_run else None
        dist = distribution(lambda rng: sample_run(instance, topology, corruption, rng, adversary).consistent)
        fail.append(dist.get(False, Fraction(0)))
    subsets = list(itertools.combinations(range(k), m))
    total = Fraction(0)
    for subset in subsets:
        survive = Fraction(1)
        for i in subset:
            survive *= 1 - fail[i]
        total += 1 - survive
    return total / len(subsets)


# Combiner attack --------------------------------------------------------------

def combined_choice_attack(group: CyclicGroup, paths: PathSet, corruption: CorruptionSet) -> AttackStrategy:
    """Alice's coalition guesses c = cA + cB.

    cA is read off the shares of candidate A if every one passed a coalition
    node; cB comes from solving DDH on Bob's request.  Anything unknown is a
    coin flip.
    """
    def guess(view: AdversaryView, rng: Rng) -> int:
        shares = [view.payloads(f"A/c{j + 1}") for j in range(paths.n)]
        if all(shares):
            ca = sum(int(s[0]) for s in shares) % 2
        else:
            ca = rng.randbelow(2)
        requests = view.payloads("B/req")
        try:
            pk, e = requests[0]
            cb = sender_guess_choice(group, pk, e)
        except (IndexError, TypeError, ValueError, RefusesToBruteForce):
            cb = rng.randbelow(2)
        return ca ^ cb

    return AttackStrategy("combined-choice", corruption, None, guess)


def combined_attack_frequency(group: CyclicGroup, topology: NetworkTopology, paths: PathSet,
                              corrupted, ell: int, trials: int, seed: int = 0) -> tuple[float, float]:
    corruption = CorruptionSet(corrupted, "alice")
    strategy = combined_choice_attack(group, paths, corruption)

    def trial(rng):
        s0 = BitString.random(ell, rng)
        s1 = BitString.random(ell, rng)
        c = ChoiceBit.random(rng)
        inst = PathOTInstance(paths, s0, s1, c)
        result = run_combined(inst, topology, corruption, group, rng)
        return strategy.guess(result.view, rng) == c.value

    return monte_carlo(trial, trials, seed)


def combined_component_distance(topology: NetworkTopology, paths: PathSet, corrupted, ell: int,
                                group: CyclicGroup, s0: BitString | None = None, s1: BitString | None = None,
                                *, aux_seed: int = 0, bound: int = ENUMERATION_BOUND) -> Fraction:
    """Distance of Alice's candidate-A sub-view between cA = 0 and cA = 1.

    This is the leakage left once DDH is broken and cB is known to her.
    The DDH randomness is pinned to ``aux_seed``; the main tape is enumerated.
    """
    s0 = s0 if s0 is not None else BitString.zeros(ell)
    s1 = s1 if s1 is not None else BitString((1 << ell) - 1, ell)
    corruption = CorruptionSet(corrupted, "alice")
    run = runner_for("combined", topology, paths, corruption, group=group, aux_seed=aux_seed)

    def experiment(rng):
        result = run(s0, s1, ChoiceBit(0), rng)
        cb = result.sim.states["bob"].draws[0]
        return cb, result.view.restrict("A/").canonical()

    joint = distribution(experiment, bound)
    # c = 0, so cA = cB: condition on each value of Bob's combiner bit.
    by_ca = [joint.condition(lambda k, v=v: k[0] == v).marginal(lambda k: k[1]) for v in (0, 1)]
    return statistical_distance(*by_ca)


# Anne/Bill reduction -----------------------------------------------------------

TWO_PARTY = NetworkTopology.from_edges([("Anne", "Bill")], "Anne", "Bill")


@dataclass
class TwoPartyRun:
    output: BitString
    transcript: list[TranscriptEntry]
    sessions: list
    sim: SimulationResult
    corruption: CorruptionSet

    @property
    def view(self) -> AdversaryView:
        return self.sim.view_for(self.corruption)

    def view_for(self, corruption: CorruptionSet) -> AdversaryView:
        return self.sim.view_for(corruption)


@dataclass
class AnneBillOT:
    """Two-party OT obtained by letting Anne and Bill simulate a path-OT network.

    Anne plays Alice and every internal node of her paths; Bill plays Bob and
    the internal nodes of his.  Only messages and link-OTs between the two
    halves touch the real Anne-Bill link.
    """

    protocol: str
    topology: NetworkTopology
    paths: PathSet
    anne_nodes: frozenset
    bill_nodes: frozenset

    def side(self, node: str) -> str:
        return "Anne" if node in self.anne_nodes else "Bill"

    def corruption(self, dishonest: str | None) -> CorruptionSet:
        if dishonest is None:
            return CorruptionSet()
        if dishonest == "anne":
            return CorruptionSet(self.anne_nodes - {self.topology.alice}, "alice")
        if dishonest == "bill":
            return CorruptionSet(self.bill_nodes - {self.topology.bob}, "bob")
        raise ContractViolation(f"dishonest must be None, 'anne' or 'bill', not {dishonest!r}")

    def run(self, s0: BitString, s1: BitString, c: ChoiceBit, tape=None, *, dishonest: str | None = None,
            adversary: Adversary | None = None) -> TwoPartyRun:
        corruption = self.corruption(dishonest)
        build = protocol1_processes if self.protocol == "protocol1" else protocol2_processes
        specs = build(self.topology, self.paths, s0, s1, c)
        result = _execute(self.topology, corruption, as_rng(tape), specs, adversary=adversary)
        sim = result.sim
        link = []
        for e in sim.transcript:
            a, b = self.side(e.sender), self.side(e.receiver)
            if a != b:
                link.append(dataclasses.replace(e, sender=a, receiver=b))
        sessions = [s for s in sim.sessions if self.side(s.sender) != self.side(s.receiver)]
        return TwoPartyRun(result.output, link, sessions, sim, corruption)

    def runner(self, dishonest: str | None = None, adversary: Adversary | None = None):
        """(s0, s1, c, rng) -> run, in the form the analysis metrics take."""
        return lambda s0, s1, c, rng: self.run(s0, s1, c, rng, dishonest=dishonest, adversary=adversary)

    def bill_receiver_sessions(self) -> list[str]:
        if self.protocol == "protocol1":
            return [f"ot{j + 1}" for j in range(self.paths.n) if self.paths.alice_neighbor(j) in self.bill_nodes]
        return [f"ot{j + 1}" for j in range(self.paths.n)]


def anne_bill_reduction(path_ot_protocol: str, topology: NetworkTopology, paths: PathSet,
                        path_partition: tuple[Sequence[int], Sequence[int]]) -> AnneBillOT:
    """Turn a path-OT protocol into a two-party OT between Anne and Bill."""
    anne_paths, bill_paths = (list(p) for p in path_partition)
    if not anne_paths or not bill_paths:
        raise ContractViolation("both Anne and Bill need at least one path")
    if sorted(anne_paths + bill_paths) != list(range(paths.n)):
        raise ContractViolation("the partition must cover every path exactly once")
    if path_ot_protocol not in ("protocol1", "protocol2"):
        raise ContractViolation(f"unsupported protocol {path_ot_protocol!r}")
    anne = {topology.alice} | {n for j in anne_paths for n in paths.internal(j)}
    bill = {topology.bob} | ({n for j in bill_paths for n in paths.internal(j)} - anne)
    rest = topology.nodes - anne - bill
    return AnneBillOT(path_ot_protocol, topology, paths.validate(topology), frozenset(anne | rest), frozenset(bill))


def reduction_checks(reduction: AnneBillOT, ell: int) -> dict[str, Fraction]:
    """Correctness, worst hidden-input guess against Bill, choice leakage to Anne."""
    correct = correctness_rate(reduction.runner(), ell)
    bill = reduction.corruption("bill")
    tags = reduction.bill_receiver_sessions()
    worst = Fraction(0)
    for bits in [None] + list(itertools.product((0, 1), repeat=len(tags))):
        adversary = choice_override(dict(zip(tags, bits))) if bits is not None else None
        worst = max(worst, hidden_input_guessing(reduction.runner("bill", adversary), bill, ell, ChoiceBit(0)))
    anne = reduction.corruption("anne")
    s0, s1 = BitString.zeros(ell), BitString((1 << ell) - 1, ell)
    leak = choice_distance(reduction.runner("anne"), anne, s0, s1)
    return {"correctness": correct, "hidden_guess": worst, "choice_distance": leak}
