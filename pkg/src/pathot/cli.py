"""Command-line front door.

    pathot run --config exp.json [--trials T] [--seed S] [--out report.json]
    pathot sweep --config exp.json --sweep sweep.json [--out table.csv]

Exit status: 0 on success, 1 on a configuration error, 2 when a security
invariant the configuration is expected to satisfy does not hold.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import sys
from fractions import Fraction
from typing import Any

from . import adversary, analysis
from .classical_ot import LARGE_GROUP, ORDER_31_GROUP, SMALL_GROUP, TOY_GROUP
from .core import BitString, ChoiceBit, SeededRng
from .errors import ConfigError, ContractViolation, EnumerationBound
from .netsim import CorruptionSet, NetworkTopology, PathSet, enumerate_paths, exists_honest_path
from .protocols import (
    VARIANTS,
    PathOTInstance,
    WeakOTInstance,
    coerce_bits,
    run_combined,
    run_weak_ot,
    runner_for,
    tamper_check_run,
)

PROTOCOLS = {"p1": "protocol1", "p2": "protocol2", "hybrid1": "hybrid1", "hybrid2": "hybrid2",
             "protocol1": "protocol1", "protocol2": "protocol2",
             "combined": "combined", "weak": "weak", "tamper": "tamper"}
ATTACKS = ("claim2", "collude", "tamper", "reduction")
GROUPS = {"toy": TOY_GROUP, "order31": ORDER_31_GROUP, "small": SMALL_GROUP, "large": LARGE_GROUP}
MC_TOLERANCE = 0.02
CSV_COLUMNS = ["protocol", "attack", "ell", "N", "corrupt", "honest_path",
               "epsilon_receiver", "epsilon_sender", "correctness_rate", "attack_success", "violations"]


class Experiment:
    """A validated experiment config."""

    def __init__(self, raw: Any):
        if not isinstance(raw, dict):
            raise ConfigError("$", "config must be a JSON object")
        self.raw = raw
        for key in ("nodes", "edges", "alice", "bob", "paths", "protocol"):
            if key not in raw:
                raise ConfigError(key, "required field is missing")
        if not isinstance(raw["nodes"], list) or not all(isinstance(n, str) for n in raw["nodes"]):
            raise ConfigError("nodes", "must be a list of node names")
        if not isinstance(raw["edges"], list) or not all(isinstance(e, list) and len(e) == 2 for e in raw["edges"]):
            raise ConfigError("edges", "must be a list of [a, b] pairs")
        try:
            self.topology = NetworkTopology(frozenset(raw["nodes"]), frozenset(frozenset(e) for e in raw["edges"]),
                                            raw["alice"], raw["bob"])
        except ContractViolation as exc:
            raise ConfigError("edges", str(exc)) from exc
        paths = raw["paths"]
        if isinstance(paths, int):
            self.paths = self._wrap("paths", lambda: enumerate_paths(self.topology, paths))
        elif isinstance(paths, list) and paths:
            self.paths = self._wrap("paths", lambda: PathSet(tuple(tuple(p) for p in paths)).validate(self.topology))
        else:
            raise ConfigError("paths", "must be a non-empty list of paths or a path count")
        if not isinstance(raw.get("corrupt", []), list):
            raise ConfigError("corrupt", "must be a list of node names")
        self.corrupt = frozenset(raw.get("corrupt", []))
        self.controller = raw.get("controller", "independent")
        self._wrap("corrupt", lambda: CorruptionSet(self.corrupt, self.controller).validate(self.topology))
        protocol = raw["protocol"]
        if protocol not in PROTOCOLS:
            raise ConfigError("protocol", f"unknown protocol {protocol!r}; pick one of {sorted(set(PROTOCOLS))}")
        self.protocol = PROTOCOLS[protocol]
        self.attack = raw.get("attack")
        if self.attack is not None and self.attack not in ATTACKS:
            raise ConfigError("attack", f"unknown attack {self.attack!r}; pick one of {list(ATTACKS)}")
        self.mode = raw.get("mode", "exact")
        if self.mode not in ("exact", "montecarlo"):
            raise ConfigError("mode", "must be 'exact' or 'montecarlo'")
        self.ell = self._int("ell", raw.get("ell", 1), 1)
        self.trials = self._int("trials", raw.get("trials", 10_000), 100)
        self.seed = self._int("seed", raw.get("seed", 0), 0)
        self.k = self._int("k", raw.get("k", 8), 2)
        self.open_fraction = raw.get("open_fraction", 0.5)
        if not isinstance(self.open_fraction, (int, float)) or not 0 < self.open_fraction < 1:
            raise ConfigError("open_fraction", "must be a number strictly between 0 and 1")
        group = raw.get("group", "toy")
        if group not in GROUPS:
            raise ConfigError("group", f"unknown group {group!r}; pick one of {sorted(GROUPS)}")
        self.group = GROUPS[group]
        self.inputs = self._inputs(raw.get("inputs", {}))
        choice = raw.get("choice", 0)
        if choice not in (0, 1):
            raise ConfigError("choice", "must be 0 or 1")
        self.choice = ChoiceBit(choice)
        self.choice_prime = ChoiceBit(raw.get("choice_prime", 0) & 1)
        self.partition = raw.get("partition", [[0], list(range(1, self.paths.n))])

    @staticmethod
    def _wrap(field: str, build):
        try:
            return build()
        except ContractViolation as exc:
            raise ConfigError(field, str(exc)) from exc

    @staticmethod
    def _int(field: str, value: Any, minimum: int) -> int:
        if not isinstance(value, int) or isinstance(value, bool) or value < minimum:
            raise ConfigError(field, f"must be an integer >= {minimum}")
        return value

    def _inputs(self, raw: Any) -> dict[str, BitString]:
        if not isinstance(raw, dict):
            raise ConfigError("inputs", "must be an object of bit strings")
        names = ("s00", "s01", "s10", "s11") if self.protocol == "weak" else ("s0", "s1")
        defaults = {"s0": 0, "s1": -1, "s00": 0, "s01": -1, "s10": -1, "s11": 0}
        out = {}
        for name in names:
            value = raw.get(name)
            if value is None:
                out[name] = BitString(defaults[name] % (1 << self.ell), self.ell)
                continue
            if not isinstance(value, str) or set(value) - {"0", "1"}:
                raise ConfigError(f"inputs.{name}", "must be a string of 0s and 1s")
            out[name] = coerce_bits(BitString.from_str(value), self.ell)
        return out

    def corruption(self, controller: str | None = None) -> CorruptionSet:
        return CorruptionSet(self.corrupt, controller or self.controller)

    def instance(self) -> PathOTInstance:
        variant = self.protocol if self.protocol in VARIANTS else "protocol1"
        return PathOTInstance(self.paths, self.inputs["s0"], self.inputs["s1"], self.choice, variant)

    def metadata(self) -> dict:
        return {
            "protocol": self.protocol,
            "attack": self.attack,
            "mode": self.mode,
            "ell": self.ell,
            "N": self.paths.n,
            "corrupt": sorted(self.corrupt),
            "controller": self.controller,
            "honest_path": exists_honest_path(self.topology, self.paths, self.corruption()),
            "paths_disjoint": self.paths.internally_disjoint(),
            "topology": self.topology.to_json(),
            "paths": self.paths.to_json(),
            "seed": self.seed,
            "trials": self.trials if self.mode == "montecarlo" else None,
        }


def _num(value: Any) -> Any:
    if isinstance(value, Fraction):
        return {"value": float(value), "exact": str(value)}
    if isinstance(value, dict):
        return {k: _num(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_num(v) for v in value]
    if isinstance(value, (BitString, ChoiceBit)):
        return str(value) if isinstance(value, BitString) else value.value
    return value


def _mc_correctness(exp: Experiment, variant: str) -> tuple[float, float]:
    run = runner_for(variant, exp.topology, exp.paths, group=exp.group)

    def trial(rng):
        s0, s1 = BitString.random(exp.ell, rng), BitString.random(exp.ell, rng)
        c = ChoiceBit.random(rng)
        return run(s0, s1, c, rng).output == (s1 if c.value else s0)

    return analysis.monte_carlo(trial, exp.trials, exp.seed)


def _protocol_report(exp: Experiment) -> dict:
    variant = exp.protocol
    if exp.mode == "montecarlo":
        freq, half = _mc_correctness(exp, variant)
        violations = ["correctness"] if freq < 1 else []
        return {"epsilon_receiver": None, "epsilon_sender": None, "correctness_rate": freq,
                "extra": {"halfwidth": half}, "violations": violations}
    report = analysis.security_report(variant, exp.topology, exp.paths, exp.corrupt, exp.ell,
                                      exp.inputs["s0"], exp.inputs["s1"], exp.choice, group=exp.group)
    data = report.to_json()
    return {k: data[k] for k in ("epsilon_receiver", "epsilon_sender", "correctness_rate", "extra", "violations")}


def _combined_report(exp: Experiment) -> dict:
    extra: dict = {}
    violations = []
    inst = PathOTInstance(exp.paths, exp.inputs["s0"], exp.inputs["s1"], exp.choice)
    out = run_combined(inst, exp.topology, None, exp.group, SeededRng(exp.seed)).output
    extra["output"] = out
    if out != inst.expected:
        violations.append("correctness")
    honest_path = exists_honest_path(exp.topology, exp.paths, exp.corruption())
    if exp.mode == "exact":
        dist = adversary.combined_component_distance(exp.topology, exp.paths, exp.corrupt, exp.ell, exp.group,
                                                     exp.inputs["s0"], exp.inputs["s1"], aux_seed=exp.seed)
        extra["component_distance"] = dist
        if honest_path and dist != 0:
            violations.append("receiver_security")
    else:
        freq, half = adversary.combined_attack_frequency(exp.group, exp.topology, exp.paths, exp.corrupt,
                                                         exp.ell, exp.trials, exp.seed)
        extra.update(attack_success=freq, halfwidth=half)
        hard = exp.group.q > 1 << 20
        if (honest_path or hard) and abs(freq - 0.5) > MC_TOLERANCE:
            violations.append("receiver_security")
    return {"epsilon_receiver": extra.get("component_distance"), "epsilon_sender": None,
            "correctness_rate": None, "extra": extra, "violations": violations}


def _weak_report(exp: Experiment) -> dict:
    inst = WeakOTInstance(exp.paths, exp.inputs["s00"], exp.inputs["s01"], exp.inputs["s10"], exp.inputs["s11"],
                          exp.choice, exp.choice_prime)
    outputs = run_weak_ot(inst, exp.topology, exp.corruption(), SeededRng(exp.seed)).outputs
    profile = analysis.weak_ot_profile(exp.topology, exp.paths, exp.ell)
    violations = []
    if profile["honest_correct"] != 1:
        violations.append("correctness")
    if profile["bob_side_determined"] > 3 or profile["bob_side_hidden"] != Fraction(1, 2 ** exp.ell):
        violations.append("sender_security")
    if profile["alice_side_c_prime"] != 0:
        violations.append("receiver_security")
    return {"epsilon_receiver": profile["alice_side_c_prime"], "epsilon_sender": None,
            "correctness_rate": profile["honest_correct"],
            "extra": {"outputs": list(outputs), **profile}, "violations": violations}


def _tamper_report(exp: Experiment) -> dict:
    inst = exp.instance()
    corruption = CorruptionSet(exp.corrupt, "independent")
    flipper = None
    if exp.corrupt:
        node = sorted(exp.corrupt)[0]
        j = next((j for j in range(exp.paths.n) if node in exp.paths.internal(j)), None)
        if j is None:
            raise ConfigError("corrupt", f"{node} is not an internal node of any path")
        adv = adversary.flip_adversary(exp.paths, j, node)
        flipper = lambda i: adv  # noqa: E731
    result = tamper_check_run(inst, exp.topology, corruption, exp.k, exp.open_fraction, SeededRng(exp.seed), flipper)
    extra: dict = {"accepted": result.accepted, "output": result.output,
                   "abort_run": result.abort.run_index if result.abort else None}
    violations = []
    if result.accepted and result.output != inst.expected and not exp.corrupt:
        violations.append("correctness")
    if exp.mode == "exact":
        extra["detection_probability"] = adversary.tamper_detection_probability(
            inst, exp.topology, corruption, exp.k, exp.open_fraction, flipper)
    return {"epsilon_receiver": None, "epsilon_sender": None, "correctness_rate": None,
            "extra": extra, "violations": violations}


def _attack_report(exp: Experiment) -> dict:
    variant = exp.protocol if exp.protocol in VARIANTS else "protocol1"
    extra: dict = {}
    violations = []
    if exp.attack == "claim2":
        target = 1 - Fraction(1, 2 ** (exp.ell + 1))
        extra["bound"] = target
        if exp.mode == "exact":
            success = adversary.claim2_exact(variant, exp.topology, exp.paths, exp.corrupt, exp.ell)
            dichotomy = adversary.claim2_dichotomy(variant, exp.topology, exp.paths, exp.corrupt, exp.ell)
            extra.update(attack_success=success, dichotomy=dichotomy)
            if max(dichotomy.values()) < Fraction(1, 4) - Fraction(1, 2 ** (exp.ell + 2)):
                violations.append("claim2_dichotomy")
            if variant == "protocol1" and success < target:
                violations.append("claim2_bound")
        else:
            freq, half = adversary.claim2_attack(variant, exp.topology, exp.paths, exp.corrupt, exp.ell,
                                                 exp.trials, exp.seed)
            extra.update(attack_success=freq, halfwidth=half)
            if variant == "protocol1" and freq < float(target) - MC_TOLERANCE:
                violations.append("claim2_bound")
    elif exp.attack == "collude":
        inst = exp.instance().with_variant("protocol1")
        rows = []
        for d in itertools.product((0, 1), repeat=exp.paths.n):
            res = adversary.colluding_bob_attack(d, inst, exp.topology, SeededRng(exp.seed), certify=True)
            hidden = res.guessing[res.undetermined]
            rows.append({"d": list(d), "determined": res.determined, "hidden_guessing": hidden})
            if hidden != Fraction(1, 2 ** exp.ell) or res.guessing[res.determined] != 1:
                violations.append(f"sender_security:d={''.join(map(str, d))}")
        extra["strategies"] = rows
    elif exp.attack == "tamper":
        inst = exp.instance().with_variant("protocol1")
        node = sorted(exp.corrupt)[0] if exp.corrupt else exp.paths.alice_neighbor(0)
        j = next((j for j in range(exp.paths.n) if node in exp.paths.internal(j)), 0)
        out = adversary.tamper_attack(j, inst, exp.topology, SeededRng(exp.seed), node=node)
        flipped = inst.s0 if exp.choice.value else inst.s1
        extra.update(output=out, flipped_to_other=out == flipped)
    elif exp.attack == "reduction":
        if variant not in ("protocol1", "protocol2"):
            raise ConfigError("protocol", "the reduction needs p1 or p2")
        reduction = exp._wrap("partition", lambda: adversary.anne_bill_reduction(
            variant, exp.topology, exp.paths, tuple(exp.partition)))
        checks = adversary.reduction_checks(reduction, exp.ell)
        extra.update(checks)
        if checks["correctness"] != 1:
            violations.append("correctness")
        if checks["hidden_guess"] != Fraction(1, 2 ** exp.ell):
            violations.append("sender_security")
        if checks["choice_distance"] != 0:
            violations.append("receiver_security")
    return {"epsilon_receiver": None, "epsilon_sender": None, "correctness_rate": None,
            "extra": extra, "violations": violations}


def evaluate(exp: Experiment) -> dict:
    """Run one experiment and return its JSON-ready report."""
    try:
        if exp.attack is not None:
            body = _attack_report(exp)
        elif exp.protocol == "combined":
            body = _combined_report(exp)
        elif exp.protocol == "weak":
            body = _weak_report(exp)
        elif exp.protocol == "tamper":
            body = _tamper_report(exp)
        else:
            body = _protocol_report(exp)
    except EnumerationBound as exc:
        raise ConfigError("mode", f"exact enumeration is too large ({exc}); use montecarlo") from exc
    body["metadata"] = exp.metadata()
    return _num(body)


def load_json(path: str, what: str = "config") -> Any:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(what, f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(what, f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def _emit(text: str, out: str | None) -> None:
    if out and out != "-":
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_run(args) -> int:
    raw = load_json(args.config)
    if isinstance(raw, dict):
        raw = dict(raw)
        if args.trials is not None:
            raw["trials"] = args.trials
        if args.seed is not None:
            raw["seed"] = args.seed
    report = evaluate(Experiment(raw))
    _emit(json.dumps(report, sort_keys=True, indent=2) + "\n", args.out)
    return 2 if report["violations"] else 0


def sweep_configs(raw: dict, spec: Any) -> list[dict]:
    """Expand a sweep spec into configs, in a fixed order.

    Keys: "ell" (list of ints), "N" (list of path counts), "corrupt" (list of
    node lists, or "all" for every subset of the non-endpoint nodes).  A
    missing key keeps the base config's value; an empty spec or an empty
    list yields no rows.
    """
    if not isinstance(spec, dict):
        raise ConfigError("sweep", "must be a JSON object")
    if not spec:
        return []
    ells = spec.get("ell", [raw.get("ell", 1)])
    counts = spec.get("N", [None])
    corrupt = spec.get("corrupt", [raw.get("corrupt", [])])
    if corrupt == "all":
        inner = sorted(set(raw.get("nodes", [])) - {raw.get("alice"), raw.get("bob")})
        corrupt = [list(c) for r in range(len(inner) + 1) for c in itertools.combinations(inner, r)]
    for name, values in (("ell", ells), ("N", counts), ("corrupt", corrupt)):
        if not isinstance(values, list):
            raise ConfigError(f"sweep.{name}", "must be a list")
    out = []
    for ell, n, subset in itertools.product(sorted(ells), sorted(counts, key=lambda x: (x is not None, x or 0)),
                                            sorted((sorted(s) for s in corrupt), key=lambda s: (len(s), s))):
        cfg = dict(raw, ell=ell, corrupt=subset)
        if n is not None:
            cfg["paths"] = n
        out.append(cfg)
    return out


def _cell(value: Any) -> str:
    if isinstance(value, dict) and "exact" in value:
        return value["exact"]
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def cmd_sweep(args) -> int:
    raw = load_json(args.config)
    if not isinstance(raw, dict):
        raise ConfigError("$", "config must be a JSON object")
    spec = load_json(args.sweep, "sweep")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    failed = False
    for cfg in sweep_configs(raw, spec):
        report = evaluate(Experiment(cfg))
        meta = report["metadata"]
        failed = failed or bool(report["violations"])
        writer.writerow([
            meta["protocol"], meta["attack"] or "", meta["ell"], meta["N"], "+".join(meta["corrupt"]) or "-",
            _cell(meta["honest_path"]), _cell(report["epsilon_receiver"]), _cell(report["epsilon_sender"]),
            _cell(report["correctness_rate"]), _cell(report["extra"].get("attack_success")),
            "+".join(report["violations"]) or "-",
        ])
    _emit(buf.getvalue(), args.out)
    return 2 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pathot", description="Run path-OT experiments and security checks.")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one experiment and write a JSON report")
    run.add_argument("--config", required=True)
    run.add_argument("--trials", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--out")
    run.set_defaults(func=cmd_run)
    sweep = sub.add_parser("sweep", help="run a grid of experiments and write a CSV table")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--sweep", required=True)
    sweep.add_argument("--out")
    sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
