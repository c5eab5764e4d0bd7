import itertools

import pytest

from pathot.adversary import flip_adversary
from pathot.analysis import choice_distance, correctness_rate
from pathot.classical_ot import LARGE_GROUP, TOY_GROUP
from pathot.core import BitString, ChoiceBit, SeededRng, reconstruct_xor
from pathot.errors import ContractViolation
from pathot.netsim import (
    Adversary,
    CorruptionSet,
    complete_topology,
    diamond_topology,
    enumerate_paths,
    line_topology,
    three_path_topology,
)
from pathot.protocols import (
    PathOTInstance,
    WeakOTInstance,
    coerce_bits,
    protocol1_tables,
    run_combined,
    run_hybrid,
    run_path_ot,
    run_protocol1,
    run_protocol2,
    run_weak_ot,
    runner_for,
    tamper_check_run,
)

bs = BitString.from_str


@pytest.fixture
def diamond():
    topology = diamond_topology()
    return topology, enumerate_paths(topology, 2)


class TestProtocol1:
    def test_example(self, diamond):
        topology, paths = diamond
        inst = PathOTInstance(paths, bs("101"), bs("110"), ChoiceBit(1))
        assert run_protocol1(inst, topology, tape=0).output == bs("110")

    def test_tables(self):
        s0, s1 = bs("01"), bs("10")
        keys = [bs("11"), bs("01"), bs("10")]  # XOR to zero
        tables = protocol1_tables(s0, s1, keys)
        assert tables[0] == (s0 ^ bs("11"), s1 ^ bs("11"))
        assert tables[1] == (bs("01"), s0 ^ s1 ^ bs("01"))
        # XOR of the entries picked by shares summing to c gives s_c.
        for shares in itertools.product((0, 1), repeat=3):
            c = sum(shares) % 2
            assert reconstruct_xor([t[b] for t, b in zip(tables, shares)]) == (s1 if c else s0)

    def test_single_path(self):
        topology = line_topology("v")
        inst = PathOTInstance(enumerate_paths(topology, 1), bs("0"), bs("1"), ChoiceBit(0))
        assert run_protocol1(inst, topology, tape=3).output == bs("0")

    def test_direct_edge_path(self):
        topology = complete_topology(("v1",))
        paths = enumerate_paths(topology, 2)
        assert paths[0] == ("A", "B")
        assert correctness_rate(runner_for("protocol1", topology, paths), 1) == 1

    def test_shares_visible_on_path(self, diamond):
        topology, paths = diamond
        inst = PathOTInstance(paths, bs("0"), bs("1"), ChoiceBit(1))
        result = run_protocol1(inst, topology, CorruptionSet({"v1", "v2"}, "alice"), tape=5)
        shares = [result.view.payloads(f"c{j}")[0] for j in (1, 2)]
        assert reconstruct_xor(shares) == ChoiceBit(1)

    def test_variant_mismatch(self, diamond):
        topology, paths = diamond
        inst = PathOTInstance(paths, bs("0"), bs("1"), ChoiceBit(1), "protocol2")
        with pytest.raises(ContractViolation):
            run_protocol1(inst, topology)

    def test_unequal_inputs_rejected(self, diamond):
        _, paths = diamond
        with pytest.raises(ContractViolation):
            PathOTInstance(paths, bs("0"), bs("10"), ChoiceBit(1))

    def test_resized_message_is_coerced(self, diamond):
        topology, paths = diamond
        long_mask = Adversary(on_transmit=lambda node, tag, p: bs("1111") if tag.startswith("t") else p)
        inst = PathOTInstance(paths, bs("00"), bs("00"), ChoiceBit(0))
        out = run_protocol1(inst, topology, CorruptionSet({"v1"}), tape=0, adversary=long_mask).output
        assert out.length == 2

    def test_coerce_bits(self):
        assert coerce_bits(bs("1011"), 2) == bs("11")
        assert coerce_bits("junk", 2) == bs("00")


class TestProtocol2:
    def test_example(self, diamond):
        topology, paths = diamond
        for c in (0, 1):
            inst = PathOTInstance(paths, bs("101"), bs("110"), ChoiceBit(c), "protocol2")
            assert run_protocol2(inst, topology, tape=c).output == (bs("110") if c else bs("101"))

    def test_three_paths(self):
        topology = three_path_topology()
        paths = enumerate_paths(topology, 3)
        inst = PathOTInstance(paths, bs("01"), bs("10"), ChoiceBit(1), "protocol2")
        assert run_path_ot(inst, topology, tape=9).output == bs("10")

    def test_receiver_security_even_without_honest_path(self, diamond):
        topology, paths = diamond
        corruption = CorruptionSet({"v1", "v2"}, "alice")
        run = runner_for("protocol2", topology, paths, corruption)
        assert choice_distance(run, corruption, bs("0"), bs("1")) == 0


class TestHybrid:
    @pytest.mark.parametrize("variant", ["hybrid1", "hybrid2"])
    def test_correct(self, diamond, variant):
        topology, paths = diamond
        assert correctness_rate(runner_for(variant, topology, paths), 2) == 1

    def test_traffic_is_direct(self, diamond):
        topology, paths = diamond
        inst = PathOTInstance(paths, bs("0"), bs("1"), ChoiceBit(1), "hybrid1")
        result = run_hybrid(inst, topology, tape=0)
        assert {(e.sender, e.receiver) for e in result.transcript} <= {("B", "v1"), ("B", "v2"), ("v1", "B"),
                                                                      ("v2", "B")}

    def test_hybrid1_inner_corruption_hidden(self):
        # A - v - x - B with x corrupted: x never carries c_1 (it goes straight to v).
        topology = line_topology("v", "x")
        paths = enumerate_paths(topology, 1)
        corruption = CorruptionSet({"x"}, "alice")
        assert choice_distance(runner_for("hybrid1", topology, paths, corruption), corruption, bs("0"), bs("1")) == 0
        # Protocol 1 on the same line leaks c through x.
        assert choice_distance(runner_for("protocol1", topology, paths, corruption), corruption, bs("0"), bs("1")) == 1

    def test_hybrid1_alice_neighbour_corrupted_leaks(self):
        topology = line_topology("x", "v")
        paths = enumerate_paths(topology, 1)
        corruption = CorruptionSet({"x"}, "alice")
        assert choice_distance(runner_for("hybrid1", topology, paths, corruption), corruption, bs("0"), bs("1")) == 1

    def test_hybrid2_bob_neighbours_corrupted(self, diamond):
        topology, paths = diamond
        corruption = CorruptionSet({"v1", "v2"}, "alice")
        run = runner_for("hybrid2", topology, paths, corruption)
        assert choice_distance(run, corruption, bs("0"), bs("1")) == 0


class TestCombined:
    def test_honest_large_group(self, diamond):
        topology, paths = diamond
        s0, s1 = bs("1011"), bs("0110")
        for c in (0, 1):
            inst = PathOTInstance(paths, s0, s1, ChoiceBit(c))
            assert run_combined(inst, topology, None, LARGE_GROUP, tape=c).output == (s1 if c else s0)

    def test_toy_group_exhaustive_inputs(self, diamond):
        topology, paths = diamond
        for s0, s1, c in itertools.product(BitString.all(2), BitString.all(2), (0, 1)):
            inst = PathOTInstance(paths, s0, s1, ChoiceBit(c))
            assert run_combined(inst, topology, None, TOY_GROUP, tape=s0.value, aux_tape=7).output == (s1 if c else s0)

    def test_ddh_messages_routed_through_network(self, diamond):
        topology, paths = diamond
        inst = PathOTInstance(paths, bs("0"), bs("1"), ChoiceBit(0))
        result = run_combined(inst, topology, CorruptionSet({"v1"}), TOY_GROUP, tape=0)
        assert result.view.payloads("B/req") and result.view.payloads("B/resp")


class TestWeakOT:
    def test_honest_outputs(self, diamond):
        topology, paths = diamond
        inputs = [bs("00"), bs("01"), bs("10"), bs("11")]
        for c, cp in itertools.product((0, 1), repeat=2):
            inst = WeakOTInstance(paths, *inputs, ChoiceBit(c), ChoiceBit(cp))
            assert run_weak_ot(inst, topology, tape=c * 2 + cp).outputs == (inputs[c], inputs[2 + cp])

    def test_transcript_rounds_are_sequential(self, diamond):
        topology, paths = diamond
        inst = WeakOTInstance(paths, bs("0"), bs("1"), bs("0"), bs("1"), ChoiceBit(0), ChoiceBit(1))
        result = run_weak_ot(inst, topology, tape=0)
        first = [e.round for e in result.transcript if e.tag.startswith("w1/")]
        second = [e.round for e in result.transcript if e.tag.startswith("w2/")]
        assert max(first) < min(second)


class TestTamperCheck:
    def test_no_tampering_accepts(self, diamond):
        topology, paths = diamond
        inst = PathOTInstance(paths, bs("01"), bs("10"), ChoiceBit(1))
        for seed in range(10):
            result = tamper_check_run(inst, topology, None, 4, 0.5, seed)
            assert result.accepted and result.output == bs("10")
            assert len(result.opened) == 2

    def test_abort_names_run(self, diamond):
        topology, paths = diamond
        inst = PathOTInstance(paths, bs("0"), bs("1"), ChoiceBit(0))
        flip = flip_adversary(paths, 0, "v1")
        aborts = [tamper_check_run(inst, topology, CorruptionSet({"v1"}), 4, 0.5, seed, lambda i: flip)
                  for seed in range(20)]
        for result in aborts:
            if not result.accepted:
                assert result.abort.run_index in result.opened
                assert not result.runs[result.abort.run_index].consistent
        assert any(not r.accepted for r in aborts)

    def test_bad_parameters(self, diamond):
        topology, paths = diamond
        inst = PathOTInstance(paths, bs("0"), bs("1"), ChoiceBit(0))
        with pytest.raises(ContractViolation):
            tamper_check_run(inst, topology, None, 1, 0.5)
        with pytest.raises(ContractViolation):
            tamper_check_run(inst, topology, None, 4, 0.99)


def test_determinism(diamond):
    topology, paths = diamond
    inst = PathOTInstance(paths, bs("01"), bs("10"), ChoiceBit(1))
    a = run_protocol1(inst, topology, tape=SeededRng(11)).sim.to_jsonl()
    b = run_protocol1(inst, topology, tape=SeededRng(11)).sim.to_jsonl()
    assert a == b
