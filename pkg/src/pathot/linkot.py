"""Link-OT: the 1-out-of-2 string OT available between adjacent nodes.

The default realization is an ideal functionality.  :class:`DDHLinkOT` swaps in
the classical DDH-based OT for end-to-end demos; security metrics are only
meaningful against :class:`IdealLinkOT`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

from .core import BitString, ChoiceBit, Rng
from .errors import ContractViolation, NotALink

if TYPE_CHECKING:
    from .classical_ot import CyclicGroup
    from .netsim import NetworkTopology


@dataclass(frozen=True)
class OTSession:
    """One link-OT invocation.

    A coalition holding the receiver learns ``choice`` and ``output`` only;
    a coalition holding the sender learns ``inputs`` only.
    """

    sender: str
    receiver: str
    tag: str
    inputs: tuple[BitString, BitString]
    choice: ChoiceBit
    output: BitString
    round: int = 0

    def receiver_leak(self) -> tuple:
        return ("ot-recv", self.round, self.sender, self.receiver, self.tag, self.choice, self.output)

    def sender_leak(self) -> tuple:
        return ("ot-send", self.round, self.sender, self.receiver, self.tag, self.inputs)

    def to_json(self) -> dict:
        return {
            "kind": "ot",
            "round": self.round,
            "tag": self.tag,
            "sender": self.sender,
            "receiver": self.receiver,
            "choice_visible_to": [self.receiver],
            "received": str(self.output),
        }


class IdealLinkOT:
    """Trusted-party OT: hands ``inputs[choice]`` to the receiver, nothing else to anyone."""

    name = "ideal"

    def transfer(self, m0: BitString, m1: BitString, choice: ChoiceBit, rng: Rng) -> BitString:
        return m1 if choice.value else m0


class DDHLinkOT:
    """Computes the transfer by actually running the DDH-based OT."""

    name = "ddh"

    def __init__(self, group: CyclicGroup):
        self.group = group

    def transfer(self, m0: BitString, m1: BitString, choice: ChoiceBit, rng: Rng) -> BitString:
        from .classical_ot import run_ddh_ot

        return run_ddh_ot((m0, m1), choice, self.group, rng)


def ideal_ot(
    topology: NetworkTopology,
    sender: str,
    receiver: str,
    inputs: tuple[BitString, BitString],
    choice: ChoiceBit,
    *,
    tag: str = "ot",
    round: int = 0,
) -> OTSession:
    """Single link-OT between adjacent nodes, outside any simulation."""
    if not topology.adjacent(sender, receiver):
        raise NotALink(f"{sender} and {receiver} share no link")
    m0, m1 = inputs
    if m0.length != m1.length:
        raise ContractViolation("link-OT inputs must have equal length")
    output = IdealLinkOT().transfer(m0, m1, choice, rng=None)
    return OTSession(sender, receiver, tag, (m0, m1), choice, output, round)
