"""Exact and sampled security metrics.

Exact metrics come from walking every random tape of a deterministic
experiment.  A tape is a sequence of uniform digits whose radices are
discovered on the fly, so experiments may mix bits with draws from Z_q and
each leaf carries probability prod(1/radix).  All exact arithmetic uses
:class:`fractions.Fraction`.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from statistics import NormalDist
from typing import Any, Callable, Hashable, Iterator, Mapping

from .classical_ot import TOY_GROUP
from .core import BitString, ChoiceBit, SeededRng
from .errors import ContractViolation, EnumerationBound
from .netsim import Adversary, CorruptionSet, exists_honest_path
from .protocols import WeakOTInstance, run_weak_ot, runner_for

ENUMERATION_BOUND = 1 << 24


class EnumeratingRng:
    """Odometer over all tapes.  Use through :func:`enumerate_tapes`."""

    def __init__(self):
        self.digits: list[int] = []
        self.radices: list[int] = []
        self.position = 0

    def randbelow(self, n: int) -> int:
        if n < 1:
            raise ContractViolation(f"randbelow needs n >= 1, got {n}")
        i = self.position
        self.position += 1
        if i < len(self.digits):
            if self.radices[i] != n:
                del self.digits[i:], self.radices[i:]
            else:
                return self.digits[i]
        self.digits.append(0)
        self.radices.append(n)
        return 0

    def _advance(self) -> bool:
        del self.digits[self.position:], self.radices[self.position:]
        while self.digits and self.digits[-1] + 1 == self.radices[-1]:
            self.digits.pop()
            self.radices.pop()
        if not self.digits:
            return False
        self.digits[-1] += 1
        self.position = 0
        return True


def enumerate_tapes(experiment: Callable[[Any], Any], bound: int = ENUMERATION_BOUND) -> Iterator[tuple[Fraction, Any]]:
    """Yield ``(probability, experiment(rng))`` once per random tape.

    Raises :class:`EnumerationBound` if the tape space is larger than ``bound``
    leaves (checked against the first tape's radices, then while walking).
    """
    rng = EnumeratingRng()
    leaves = 0
    while True:
        result = experiment(rng)
        used = rng.radices[:rng.position]
        if leaves == 0 and math.prod(used) > bound:
            raise EnumerationBound(f"{math.prod(used)} tapes exceed the bound {bound}")
        leaves += 1
        if leaves > bound:
            raise EnumerationBound(f"more than {bound} tapes")
        yield Fraction(1, math.prod(used)), result
        if not rng._advance():
            return


class ViewDistribution(dict):
    """Exact distribution: outcome -> Fraction."""

    def total(self) -> Fraction:
        return sum(self.values(), Fraction(0))

    def marginal(self, f: Callable[[Any], Hashable]) -> ViewDistribution:
        out = ViewDistribution()
        for k, p in self.items():
            key = f(k)
            out[key] = out.get(key, Fraction(0)) + p
        return out

    def condition(self, pred: Callable[[Any], bool]) -> ViewDistribution:
        kept = {k: p for k, p in self.items() if pred(k)}
        mass = sum(kept.values(), Fraction(0))
        if mass == 0:
            raise ContractViolation("conditioning on a null event")
        return ViewDistribution({k: p / mass for k, p in kept.items()})

    def probability(self, pred: Callable[[Any], bool]) -> Fraction:
        return sum((p for k, p in self.items() if pred(k)), Fraction(0))


def distribution(experiment: Callable[[Any], Hashable], bound: int = ENUMERATION_BOUND) -> ViewDistribution:
    """Exact distribution of ``experiment(rng)`` over all tapes."""
    out = ViewDistribution()
    for p, result in enumerate_tapes(experiment, bound):
        out[result] = out.get(result, Fraction(0)) + p
    return out


def exact_view_distribution(runner: Callable[[Any], Any], corruption=None,
                            bound: int = ENUMERATION_BOUND) -> ViewDistribution:
    """Distribution of the canonical coalition view of ``runner(rng)``.

    ``runner`` returns anything with a ``sim`` (protocol run) or the
    simulation result itself; ``corruption`` defaults to the run's own.
    """
    def experiment(rng):
        result = runner(rng)
        sim = getattr(result, "sim", result)
        view = sim.view if corruption is None else sim.view_for(corruption)
        return view.canonical()

    return distribution(experiment, bound)


def statistical_distance(d1: Mapping, d2: Mapping) -> Fraction:
    keys = set(d1) | set(d2)
    zero = Fraction(0)
    return sum((abs(d1.get(k, zero) - d2.get(k, zero)) for k in keys), zero) / 2


def guessing_probability(joint: Mapping[tuple[Hashable, Hashable], Fraction]) -> Fraction:
    """Sum over views of the largest joint mass: the optimal guess's success."""
    best: dict = defaultdict(Fraction)
    for (secret, view), p in joint.items():
        if p > best[view]:
            best[view] = p
    return sum(best.values(), Fraction(0))


def ml_guesser(joint: Mapping[tuple[Hashable, Hashable], Fraction]) -> dict:
    """view -> maximum-likelihood secret.  Ties go to the smallest secret in sort order."""
    table: dict = {}
    for (secret, view), p in sorted(joint.items(), key=lambda kv: repr(kv[0][0])):
        if view not in table or p > table[view][1]:
            table[view] = (secret, p)
    return {view: secret for view, (secret, _) in table.items()}


Z99 = NormalDist().inv_cdf(0.995)


def monte_carlo(trial: Callable[[SeededRng], bool], trials: int, seed: int) -> tuple[float, float]:
    """(success frequency, 99% normal-approximation half-width).

    Trial ``i`` gets the stream ``SeededRng.derive(seed, i)``.
    """
    if trials < 100:
        raise ContractViolation("monte_carlo needs at least 100 trials")
    hits = sum(bool(trial(SeededRng.derive(seed, i))) for i in range(trials))
    freq = hits / trials
    return freq, Z99 * math.sqrt(freq * (1 - freq) / trials)


@dataclass
class SecurityReport:
    epsilon_receiver: Fraction | None
    epsilon_sender: Fraction | None
    correctness_rate: Fraction | float | None
    metadata: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)

    def __post_init__(self):
        for name in ("epsilon_receiver", "epsilon_sender", "correctness_rate"):
            v = getattr(self, name)
            if v is not None and not 0 <= v <= 1:
                raise ContractViolation(f"{name}={v} outside [0, 1]")

    def to_json(self) -> dict:
        def num(v):
            if isinstance(v, Fraction):
                return {"value": float(v), "exact": str(v)}
            return v

        data = asdict(self)
        for k in ("epsilon_receiver", "epsilon_sender", "correctness_rate"):
            data[k] = num(getattr(self, k))
        data["extra"] = {k: num(v) for k, v in self.extra.items()}
        return data


# Protocol-level metrics ------------------------------------------------------
# ``run`` is any callable (s0, s1, c, rng) -> run result, e.g. protocols.runner_for(...).

def _uniform_inputs(rng, ell):
    return BitString.random(ell, rng), BitString.random(ell, rng)


def correctness_rate(run, ell: int, bound: int = ENUMERATION_BOUND) -> Fraction:
    """Exact probability that Bob outputs s_c, over uniform inputs and all tapes."""
    def experiment(rng):
        s0, s1 = _uniform_inputs(rng, ell)
        c = ChoiceBit.random(rng)
        return run(s0, s1, c, rng).output == (s1 if c.value else s0)

    return distribution(experiment, bound).get(True, Fraction(0))


def choice_distance(run, corruption, s0, s1, bound: int = ENUMERATION_BOUND) -> Fraction:
    """Statistical distance between the coalition's views for c = 0 and c = 1."""
    views = [distribution(lambda rng, c=c: run(s0, s1, ChoiceBit(c), rng).view_for(corruption).canonical(), bound)
             for c in (0, 1)]
    return statistical_distance(*views)


def input_guessing(run, corruption, ell: int, choice, bound: int = ENUMERATION_BOUND) -> tuple[Fraction, Fraction]:
    """Optimal probabilities of guessing s0 and s1 from the coalition view, inputs uniform."""
    def experiment(rng):
        s0, s1 = _uniform_inputs(rng, ell)
        return s0, s1, run(s0, s1, choice, rng).view_for(corruption).canonical()

    joint = distribution(experiment, bound)
    g0 = guessing_probability(joint.marginal(lambda k: (k[0], k[2])))
    g1 = guessing_probability(joint.marginal(lambda k: (k[1], k[2])))
    return g0, g1


def hidden_input_guessing(run, corruption, ell: int, choice, bound: int = ENUMERATION_BOUND) -> Fraction:
    """Probability of guessing the input the coalition knows least about, chosen per view.

    Sum over views of min_b max_s Pr[s_b = s, view].  Picking the hidden input
    after seeing the view matters when the learned index depends on the
    coalition's own coins: averaging first would credit it with partial
    knowledge of both inputs.
    """
    def experiment(rng):
        s0, s1 = _uniform_inputs(rng, ell)
        return s0, s1, run(s0, s1, choice, rng).view_for(corruption).canonical()

    best: list[dict] = [defaultdict(Fraction), defaultdict(Fraction)]
    joint = distribution(experiment, bound)
    for b in (0, 1):
        for (secret, view), p in joint.marginal(lambda k, b=b: (k[b], k[2])).items():
            best[b][view] = max(best[b][view], p)
    return sum((min(best[0][v], best[1][v]) for v in best[0]), Fraction(0))


def receiver_sessions(variant: str, topology, paths, coalition) -> list[str]:
    """Tags of link-OT sessions whose receiver the coalition controls."""
    if variant in ("protocol1", "hybrid1"):
        return [f"ot{j + 1}" for j in range(paths.n) if paths.alice_neighbor(j) in coalition]
    return [f"ot{j + 1}" for j in range(paths.n)] if topology.bob in coalition else []


def choice_override(choices: Mapping[str, int]):
    """Adversary whose coalition receivers use fixed OT choices per session tag."""
    return Adversary(ot_choice=lambda node, tag, c: ChoiceBit(choices[tag]) if tag in choices else c)


def sender_epsilon(variant: str, topology, paths, corrupted, ell: int, choice,
                   bound: int = ENUMERATION_BOUND) -> Fraction:
    """max over receiver strategies of (Pr[guess the hidden input] - 2^-ell) for a Bob coalition.

    Strategies are the passive one plus every fixed choice vector on the
    coalition-controlled OT sessions.
    """
    corruption = CorruptionSet(corrupted, "bob")
    tags = receiver_sessions(variant, topology, paths, corruption.coalition(topology))
    strategies = [None] + [dict(zip(tags, bits)) for bits in itertools.product((0, 1), repeat=len(tags))]
    worst = Fraction(0)
    for strategy in strategies:
        adversary = choice_override(strategy) if strategy is not None else None
        run = runner_for(variant, topology, paths, corruption, adversary)
        worst = max(worst, hidden_input_guessing(run, corruption, ell, choice, bound) - Fraction(1, 2 ** ell))
    return worst


def expectations(variant: str, topology, paths, corrupted) -> dict[str, bool]:
    """Which metrics must vanish in this setting."""
    honest_path = exists_honest_path(topology, paths, CorruptionSet(corrupted))
    honest_v = any(paths.alice_neighbor(j) not in corrupted for j in range(paths.n))
    honest_w = any(paths.bob_neighbor(j) not in corrupted for j in range(paths.n))
    return {
        "protocol1": {"sender": True, "receiver": honest_path},
        "protocol2": {"sender": honest_path, "receiver": True},
        "hybrid1": {"sender": True, "receiver": honest_v},
        "hybrid2": {"sender": honest_w, "receiver": True},
    }.get(variant, {"sender": False, "receiver": False})


def security_report(variant: str, topology, paths, corrupted=frozenset(), ell: int = 1, s0=None, s1=None,
                    choice=0, *, group=None, bound: int = ENUMERATION_BOUND) -> SecurityReport:
    """Exact metrics for one configuration plus the list of violated invariants."""
    group = group or TOY_GROUP
    corrupted = frozenset(corrupted)
    s0 = s0 if s0 is not None else BitString.zeros(ell)
    s1 = s1 if s1 is not None else BitString((1 << ell) - 1, ell)
    choice = choice if isinstance(choice, ChoiceBit) else ChoiceBit(int(choice))
    honest = runner_for(variant, topology, paths, group=group)
    correct = correctness_rate(honest, ell, bound)
    alice_side = CorruptionSet(corrupted, "alice")
    eps_r = choice_distance(runner_for(variant, topology, paths, alice_side, group=group), alice_side, s0, s1, bound)
    eps_s = sender_epsilon(variant, topology, paths, corrupted, ell, choice, bound) if variant != "combined" else None
    honest_path = exists_honest_path(topology, paths, CorruptionSet(corrupted))
    report = SecurityReport(
        eps_r, eps_s, correct,
        metadata={
            "protocol": variant,
            "ell": ell,
            "N": paths.n,
            "corrupt": sorted(corrupted),
            "honest_path": honest_path,
            "paths_disjoint": paths.internally_disjoint(),
            "topology": topology.to_json(),
            "paths": paths.to_json(),
        },
    )
    must = expectations(variant, topology, paths, corrupted)
    if correct != 1:
        report.violations.append("correctness")
    if must["receiver"] and eps_r != 0:
        report.violations.append("receiver_security")
    if must["sender"] and eps_s not in (None, 0):
        report.violations.append("sender_security")
    return report


# Weak OT -----------------------------------------------------------------------

def weak_ot_profile(topology, paths, ell: int = 1, bound: int = ENUMERATION_BOUND) -> dict:
    """Knowledge counts for the sequential Protocol 1 + Protocol 2 weak OT.

    ``honest_correct``: Pr[honest Bob gets (s_{0c}, s_{1c'})], inputs uniform.
    ``bob_side_determined``: largest number of the four inputs a Bob coalition
    of every non-Alice node determines, over passive and fixed-choice strategies.
    ``bob_side_hidden``: smallest guessing probability of the input it knows
    least about (2^-ell means one input stays exactly uniform).
    ``alice_side_c`` / ``alice_side_c_prime``: view distance of an Alice
    coalition of every non-Bob node between the two values of each index bit.
    """
    everyone = frozenset(topology.nodes) - {topology.alice, topology.bob}

    def inputs(rng):
        return tuple(BitString.random(ell, rng) for _ in range(4))

    def correct(rng):
        s = inputs(rng)
        c, cp = ChoiceBit.random(rng), ChoiceBit.random(rng)
        out = run_weak_ot(WeakOTInstance(paths, *s, c, cp), topology, None, rng).outputs
        return out == (s[c.value], s[2 + cp.value])

    honest = distribution(correct, bound).get(True, Fraction(0))

    bob_side = CorruptionSet(everyone, "bob")
    tags = [f"w1/ot{j + 1}" for j in range(paths.n)]
    determined, hidden = 0, Fraction(1)
    for bits in [None] + list(itertools.product((0, 1), repeat=len(tags))):
        adversary = choice_override(dict(zip(tags, bits))) if bits is not None else None
        for c, cp in itertools.product((0, 1), repeat=2):
            def experiment(rng, c=c, cp=cp, adversary=adversary):
                s = inputs(rng)
                inst = WeakOTInstance(paths, *s, ChoiceBit(c), ChoiceBit(cp))
                view = run_weak_ot(inst, topology, bob_side, rng, adversary=adversary).view_for(bob_side)
                return s, view.canonical()

            joint = distribution(experiment, bound)
            guesses = [guessing_probability(joint.marginal(lambda k, i=i: (k[0][i], k[1]))) for i in range(4)]
            determined = max(determined, sum(g == 1 for g in guesses))
            hidden = min(hidden, min(guesses))

    alice_side = CorruptionSet(everyone, "alice")
    zero, one = BitString.zeros(ell), BitString((1 << ell) - 1, ell)

    def views(c, cp):
        inst = WeakOTInstance(paths, zero, one, zero, one, ChoiceBit(c), ChoiceBit(cp))
        return distribution(lambda rng: run_weak_ot(inst, topology, alice_side, rng).view_for(alice_side).canonical(),
                            bound)

    table = {(c, cp): views(c, cp) for c in (0, 1) for cp in (0, 1)}
    c_distance = min(statistical_distance(table[0, cp], table[1, cp]) for cp in (0, 1))
    cp_distance = max(statistical_distance(table[c, 0], table[c, 1]) for c in (0, 1))
    return {
        "honest_correct": honest,
        "bob_side_determined": determined,
        "bob_side_hidden": hidden,
        "alice_side_c": c_distance,
        "alice_side_c_prime": cp_distance,
    }
