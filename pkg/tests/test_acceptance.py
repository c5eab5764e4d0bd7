"""Acceptance criteria, one test per criterion.

Each check prints a single PASS/FAIL line; the lines are also collected and
repeated in the pytest terminal summary.  Exact checks compare Fractions
with tolerance 0; Monte Carlo checks use +/-0.02.

    python tests/test_acceptance.py     # runs the checks without pytest
"""

from __future__ import annotations

import itertools
import time
from fractions import Fraction

import pytest

from pathot.adversary import (
    anne_bill_reduction,
    claim2_attack,
    claim2_dichotomy,
    claim2_exact,
    colluding_bob_attack,
    combined_attack_frequency,
    combined_component_distance,
    flip_adversary,
    reduction_checks,
    tamper_detection_probability,
)
from pathot.analysis import (
    choice_distance,
    correctness_rate,
    distribution,
    monte_carlo,
    statistical_distance,
    weak_ot_profile,
)
from pathot.classical_ot import (
    LARGE_GROUP,
    TOY_GROUP,
    ddh_ot_int,
    ddh_solve_toy,
    decrypt,
    receiver_request,
    run_ddh_ot,
    sender_guess_choice,
    sender_respond,
)
from pathot.core import BitString, ChoiceBit, SeededRng, TapeRng
from pathot.netsim import (
    CorruptionSet,
    diamond_topology,
    enumerate_paths,
    exists_honest_path,
    line_topology,
    three_path_topology,
)
from pathot.protocols import PathOTInstance, runner_for, tamper_check_run

MC_TOLERANCE = 0.02
RESULTS: list[str] = []


def settings():
    line = line_topology("v")
    diamond = diamond_topology()
    three = three_path_topology()
    return [(1, line, enumerate_paths(line, 1)),
            (2, diamond, enumerate_paths(diamond, 2)),
            (3, three, enumerate_paths(three, 3))]


def ones(ell):
    return BitString((1 << ell) - 1, ell)


def record(number: int, ok: bool, detail: str, started: float) -> None:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} ({time.perf_counter() - started:.1f}s) {detail}"
    print(line)
    RESULTS.append(line)


# 1. correctness ---------------------------------------------------------------

def check_correctness():
    failures = []
    for n, topology, paths in settings():
        for ell in (1, 2):
            for variant in ("protocol1", "protocol2"):
                rate = correctness_rate(runner_for(variant, topology, paths), ell)
                if rate != 1:
                    failures.append((variant, n, ell, rate))
    return not failures, f"failures={failures}"


# 2. sender security against a colluding Bob -------------------------------------

def check_sender_security():
    bad = []
    for n, topology, paths in settings()[1:]:
        for ell in (1, 2):
            inst = PathOTInstance(paths, BitString.zeros(ell), ones(ell), ChoiceBit(0))
            for d in itertools.product((0, 1), repeat=n):
                res = colluding_bob_attack(d, inst, topology, 0, certify=True)
                hidden = res.guessing[res.undetermined]
                if hidden != Fraction(1, 2 ** ell) or res.guessing[res.determined] != 1:
                    bad.append((n, ell, d, res.guessing))
    return not bad, f"violations={bad}"


# 3. receiver security: distance 0 iff an honest path exists -------------------

def check_receiver_security():
    bad = []
    checked = 0
    for _, topology, paths in settings()[1:]:
        inner = sorted(topology.nodes - {topology.alice, topology.bob})
        for r in range(len(inner) + 1):
            for subset in itertools.combinations(inner, r):
                corruption = CorruptionSet(subset, "alice")
                run = runner_for("protocol1", topology, paths, corruption)
                dist = choice_distance(run, corruption, BitString.zeros(1), ones(1))
                want = 0 if exists_honest_path(topology, paths, CorruptionSet(subset)) else 1
                checked += 1
                if dist != want:
                    bad.append((subset, dist))
    return not bad, f"{checked} corruption sets, violations={bad}"


# 4. the no-honest-path attack -----------------------------------------------

def check_claim2():
    line = line_topology("v")
    paths = enumerate_paths(line, 1)
    exact = {ell: claim2_exact("protocol1", line, paths, {"v"}, ell) for ell in (1, 3, 4)}
    exact_ok = all(p == 1 - Fraction(1, 2 ** (ell + 1)) for ell, p in exact.items())
    freq, half = claim2_attack("protocol1", line, paths, {"v"}, 1, 10_000, seed=1)
    mc_ok = abs(freq - 0.75) <= MC_TOLERANCE
    dichotomy = claim2_dichotomy("protocol1", line, paths, {"v"}, 1)
    floor = Fraction(1, 4) - Fraction(1, 8)
    dichotomy_ok = max(dichotomy.values()) >= floor
    detail = (f"exact={ {k: str(v) for k, v in exact.items()} } mc={freq:.4f}+/-{half:.4f} "
              f"max_eps={max(dichotomy.values())} >= {floor}")
    return exact_ok and mc_ok and dichotomy_ok, detail


# 5. classical OT profile -----------------------------------------------------

def check_classical_ot():
    group = TOY_GROUP
    wrong = 0
    for m0, m1, c in itertools.product(range(group.q), range(group.q), (0, 1)):
        for seed in range(3):
            if ddh_ot_int(m0, m1, ChoiceBit(c), group, SeededRng(seed)) != (m1 if c else m0):
                wrong += 1
    size = group.chunk_bits
    for a, b, c in itertools.product(BitString.all(size), BitString.all(size), (0, 1)):
        if run_ddh_ot((a, b), ChoiceBit(c), group, SeededRng(a.value * 31 + b.value)) != (b if c else a):
            wrong += 1

    # Unconditional sender security: for every request E, one branch is uniform over (r0, r1).
    sk = 3
    pk = group.exp(sk)
    not_uniform = 0
    elements = [group.exp(i) for i in range(group.q)]
    uniform = {v: Fraction(1, group.q) for v in range(group.q)}
    for a, b in itertools.product(elements, elements):
        for m in range(group.q):
            branches = [dict.fromkeys(range(group.q), Fraction(0)) for _ in range(2)]
            for r0, r1 in itertools.product(range(group.q), repeat=2):
                z = sender_respond(group, pk, (a, b), m, (m + 1) % group.q, TapeRng([r0, r1, 0, 0]))
                for i in (0, 1):
                    branches[i][decrypt(group, sk, z[i])] += Fraction(1, group.q ** 2)
            if not any(statistical_distance(br, uniform) == 0 for br in branches):
                not_uniform += 1

    # A sender who can solve DDH reads the choice off every request.
    hits = total = 0
    for c in (0, 1):
        for key, k in itertools.product(range(group.q - 1), range(group.q)):
            pk_, _, e = receiver_request(group, ChoiceBit(c), TapeRng([key, k]))
            hits += sender_guess_choice(group, pk_, e) == c
            total += 1
    dh_ok = ddh_solve_toy(group, (group.exp(2), group.exp(3), group.exp(6)))
    ok = wrong == 0 and not_uniform == 0 and hits == total and dh_ok
    return ok, f"wrong={wrong} non_uniform_requests={not_uniform} attack={hits}/{total}"


# 6. combiner backup ----------------------------------------------------------

def check_combiner():
    diamond = diamond_topology()
    paths = enumerate_paths(diamond, 2)
    freq, half = combined_attack_frequency(LARGE_GROUP, diamond, paths, {"v1", "v2"}, 1, 10_000, seed=2)
    dist = combined_component_distance(diamond, paths, {"v1"}, 1, TOY_GROUP)
    ok = abs(freq - 0.5) <= MC_TOLERANCE and dist == 0
    return ok, f"large-group guess={freq:.4f}+/-{half:.4f} toy-group candidate-A distance={dist}"


# 7. weak OT ------------------------------------------------------------------

def check_weak_ot():
    diamond = diamond_topology()
    profile = weak_ot_profile(diamond, enumerate_paths(diamond, 2), ell=1)
    ok = (profile["honest_correct"] == 1
          and profile["bob_side_determined"] <= 3
          and profile["bob_side_hidden"] == Fraction(1, 2)
          and profile["alice_side_c_prime"] == 0
          and profile["alice_side_c"] == 1)
    return ok, " ".join(f"{k}={v}" for k, v in profile.items())


# 8. tamper detection ---------------------------------------------------------

def _single_flip_seed(inst, topology, corruption, adversary):
    # A run tape on which the tampered run 0 comes out inconsistent.
    for seed in range(100):
        result = tamper_check_run(inst, topology, corruption, 8, 0.5, seed,
                                  lambda i: adversary if i == 0 else None, subset_tape=[0] * 4)
        if not result.runs[0].consistent:
            return seed
    raise AssertionError("no inconsistent run found")


def check_tamper():
    diamond = diamond_topology()
    paths = enumerate_paths(diamond, 2)
    inst = PathOTInstance(paths, BitString.zeros(1), ones(1), ChoiceBit(0))
    corruption = CorruptionSet({"v1"})
    flip = flip_adversary(paths, 0, "v1")
    k, fraction = 8, 0.5

    seed = _single_flip_seed(inst, diamond, corruption, flip)

    def opened_subset(subset_rng):
        result = tamper_check_run(inst, diamond, corruption, k, fraction, seed,
                                  lambda i: flip if i == 0 else None, subset_tape=subset_rng)
        return not result.accepted

    single = distribution(opened_subset).get(True, Fraction(0))
    single_formula = tamper_detection_probability(inst, diamond, corruption, k, fraction,
                                                  lambda i: flip if i == 0 else None, given_inconsistent=(0,))
    always = tamper_detection_probability(inst, diamond, corruption, k, fraction, lambda i: flip)
    target = 1 - Fraction(1, 2 ** int(k * fraction))

    def trial(rng):
        return not tamper_check_run(inst, diamond, corruption, k, fraction, rng, lambda i: flip).accepted

    freq, half = monte_carlo(trial, 4000, seed=3)
    ok = (single == Fraction(1, 2) and single_formula == Fraction(1, 2) and always == target
          and abs(freq - float(target)) <= MC_TOLERANCE)
    return ok, f"single={single} always={always} (target {target}) always_mc={freq:.4f}+/-{half:.4f}"


# 9. Anne/Bill reduction -------------------------------------------------------

def check_reduction():
    details = []
    ok = True
    for name, topology, paths, partition in [
        ("diamond", diamond_topology(), enumerate_paths(diamond_topology(), 2), ([0], [1])),
        ("three-path", three_path_topology(), enumerate_paths(three_path_topology(), 3), ([0], [1, 2])),
    ]:
        for protocol in ("protocol1", "protocol2"):
            reduction = anne_bill_reduction(protocol, topology, paths, partition)
            checks = reduction_checks(reduction, ell=1)
            run = reduction.run(BitString.zeros(1), ones(1), ChoiceBit(1), 0)
            two_party = all({e.sender, e.receiver} == {"Anne", "Bill"} for e in run.transcript)
            good = (checks["correctness"] == 1 and checks["hidden_guess"] == Fraction(1, 2)
                    and checks["choice_distance"] == 0 and two_party and run.output == ones(1))
            ok = ok and good
            details.append(f"{name}/{protocol}:{'ok' if good else checks}")
    return ok, " ".join(details)


CRITERIA = [
    (1, check_correctness, 60),
    (2, check_sender_security, 120),
    (3, check_receiver_security, None),
    (4, check_claim2, 120),
    (5, check_classical_ot, None),
    (6, check_combiner, None),
    (7, check_weak_ot, None),
    (8, check_tamper, None),
    (9, check_reduction, None),
]


@pytest.mark.parametrize("number,check,limit", CRITERIA, ids=[f"criterion_{n}" for n, _, _ in CRITERIA])
def test_criterion(number, check, limit):
    started = time.perf_counter()
    ok, detail = check()
    elapsed = time.perf_counter() - started
    if limit is not None and elapsed >= limit:
        ok, detail = False, f"{detail} runtime {elapsed:.1f}s over the {limit}s limit"
    record(number, ok, detail, started)
    assert ok, detail


if __name__ == "__main__":
    for number, check, limit in CRITERIA:
        start = time.perf_counter()
        passed, info = check()
        record(number, passed, info, start)
