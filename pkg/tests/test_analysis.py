from fractions import Fraction

import pytest

from pathot.analysis import (
    EnumeratingRng,
    SecurityReport,
    ViewDistribution,
    distribution,
    enumerate_tapes,
    exact_view_distribution,
    expectations,
    guessing_probability,
    hidden_input_guessing,
    input_guessing,
    ml_guesser,
    monte_carlo,
    security_report,
    sender_epsilon,
    statistical_distance,
)
from pathot.core import BitString, ChoiceBit
from pathot.errors import ContractViolation, EnumerationBound
from pathot.netsim import CorruptionSet, Simulation, diamond_topology, enumerate_paths, line_topology
from pathot.protocols import PathOTInstance, run_protocol1, runner_for

half = Fraction(1, 2)


class TestEnumeration:
    def test_mixed_radix_probabilities(self):
        leaves = list(enumerate_tapes(lambda rng: (rng.randbelow(2), rng.randbelow(3))))
        assert len(leaves) == 6
        assert all(p == Fraction(1, 6) for p, _ in leaves)

    def test_data_dependent_radix(self):
        # Second draw only happens on one branch.
        dist = distribution(lambda rng: rng.randbelow(2) and rng.randbelow(4))
        assert dist == {0: Fraction(1, 2) + Fraction(1, 8), 1: Fraction(1, 8), 2: Fraction(1, 8), 3: Fraction(1, 8)}
        assert dist.total() == 1

    def test_bound(self):
        with pytest.raises(EnumerationBound):
            distribution(lambda rng: [rng.randbelow(2) for _ in range(10)], bound=100)

    def test_rng_rejects_zero_radix(self):
        with pytest.raises(ContractViolation):
            EnumeratingRng().randbelow(0)

    def test_trivial_protocol_single_empty_view(self):
        def runner(rng):
            sim = Simulation(diamond_topology(), CorruptionSet({"v1"}), rng)
            return sim.run()

        dist = exact_view_distribution(runner)
        assert list(dist.values()) == [1]
        assert list(dist) == [((), (), ())]


class TestMetrics:
    def test_statistical_distance_examples(self):
        assert statistical_distance({"a": half, "b": half}, {"a": half, "b": half}) == 0
        assert statistical_distance({"a": Fraction(1)}, {"b": Fraction(1)}) == 1
        assert statistical_distance({"a": half, "b": half}, {"a": Fraction(1, 4), "b": Fraction(3, 4)}) == Fraction(1, 4)

    def test_guessing_independent_view(self):
        joint = {(s, "v"): half for s in (0, 1)}
        assert guessing_probability(joint) == half

    def test_guessing_view_is_secret(self):
        joint = {(s, s): half for s in (0, 1)}
        assert guessing_probability(joint) == 1

    def test_ml_guesser_ties_smallest(self):
        joint = {(1, "v"): half, (0, "v"): half}
        assert ml_guesser(joint) == {"v": 0}

    def test_distribution_helpers(self):
        d = ViewDistribution({(0, "a"): half, (1, "b"): half})
        assert d.marginal(lambda k: k[1]) == {"a": half, "b": half}
        assert d.condition(lambda k: k[0] == 1) == {(1, "b"): 1}
        assert d.probability(lambda k: k[0] == 0) == half
        with pytest.raises(ContractViolation):
            d.condition(lambda k: False)


class TestMonteCarlo:
    def test_deterministic(self):
        assert monte_carlo(lambda rng: True, 100, 0) == (1.0, 0.0)

    def test_fair_coin(self):
        freq, half_width = monte_carlo(lambda rng: rng.randbelow(2) == 1, 10_000, 5)
        assert half_width <= 0.013
        assert abs(freq - 0.5) <= half_width

    def test_min_trials(self):
        with pytest.raises(ContractViolation):
            monte_carlo(lambda rng: True, 99, 0)

    def test_reproducible(self):
        trial = lambda rng: rng.randbelow(3) == 0  # noqa: E731
        assert monte_carlo(trial, 500, 9) == monte_carlo(trial, 500, 9)

    def test_agrees_with_exact(self):
        topology = line_topology("v")
        paths = enumerate_paths(topology, 1)
        corruption = CorruptionSet({"v"}, "alice")
        run = runner_for("protocol1", topology, paths, corruption)

        def trial(rng):
            c = ChoiceBit.random(rng)
            view = run(BitString.zeros(1), BitString.zeros(1), c, rng).view
            return view.payloads("c1")[0] == c

        freq, width = monte_carlo(trial, 1000, 1)
        assert freq == 1.0 and width == 0.0


class TestProtocolMetrics:
    def test_view_distance_examples(self):
        diamond = diamond_topology()
        paths = enumerate_paths(diamond, 2)

        def views(corrupted, c):
            corruption = CorruptionSet(corrupted, "alice")
            inst = PathOTInstance(paths, BitString.zeros(1), BitString.from_str("1"), ChoiceBit(c))
            return exact_view_distribution(lambda rng: run_protocol1(inst, diamond, corruption, rng))

        assert statistical_distance(views({"v2"}, 0), views({"v2"}, 1)) == 0
        line = line_topology("v")
        line_paths = enumerate_paths(line, 1)
        corruption = CorruptionSet({"v"}, "alice")
        dists = [exact_view_distribution(lambda rng, c=c: run_protocol1(
            PathOTInstance(line_paths, BitString.zeros(1), BitString.from_str("1"), ChoiceBit(c)), line, corruption, rng))
            for c in (0, 1)]
        assert statistical_distance(*dists) == 1

    def test_hidden_input_ell2(self):
        diamond = diamond_topology()
        paths = enumerate_paths(diamond, 2)
        corruption = CorruptionSet({"v1", "v2"}, "bob")
        g0, g1 = input_guessing(runner_for("protocol1", diamond, paths, corruption), corruption, 2, ChoiceBit(0))
        assert (g0, g1) == (1, Fraction(1, 4))

    def test_hidden_input_chosen_per_view(self):
        # Choice index depends on the coalition's coin, yet per view one input is hidden.
        diamond = diamond_topology()
        paths = enumerate_paths(diamond, 2)
        corruption = CorruptionSet({"v1"}, "bob")
        run = runner_for("protocol1", diamond, paths, corruption)
        assert hidden_input_guessing(run, corruption, 1, ChoiceBit(0)) == half

    def test_sender_epsilon(self):
        diamond = diamond_topology()
        paths = enumerate_paths(diamond, 2)
        assert sender_epsilon("protocol1", diamond, paths, {"v1", "v2"}, 1, ChoiceBit(0)) == 0
        assert sender_epsilon("protocol2", diamond, paths, {"v1", "v2"}, 1, ChoiceBit(0)) == half
        assert sender_epsilon("protocol2", diamond, paths, {"v1"}, 1, ChoiceBit(0)) == 0

    def test_expectations(self):
        diamond = diamond_topology()
        paths = enumerate_paths(diamond, 2)
        assert expectations("protocol1", diamond, paths, {"v1", "v2"}) == {"sender": True, "receiver": False}
        assert expectations("protocol2", diamond, paths, {"v1"}) == {"sender": True, "receiver": True}


class TestReport:
    def test_honest_path_report(self):
        diamond = diamond_topology()
        report = security_report("protocol1", diamond, enumerate_paths(diamond, 2), {"v2"})
        assert report.epsilon_receiver == 0 and report.epsilon_sender == 0 and report.correctness_rate == 1
        assert report.violations == []
        data = report.to_json()
        assert data["epsilon_receiver"] == {"value": 0.0, "exact": "0"}
        assert data["metadata"]["honest_path"] is True

    def test_no_honest_path_is_not_a_violation(self):
        diamond = diamond_topology()
        report = security_report("protocol1", diamond, enumerate_paths(diamond, 2), {"v1", "v2"})
        assert report.epsilon_receiver == 1
        assert report.violations == []

    def test_range_checked(self):
        with pytest.raises(ContractViolation):
            SecurityReport(Fraction(3, 2), None, None)
