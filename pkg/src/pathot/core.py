"""Bit strings over GF(2), XOR secret sharing and replayable randomness.

Every random draw in the package goes through an object exposing
``randbelow(n)``.  Three implementations exist:

* :class:`SeededRng` -- pseudo-random, reproducible from a 64-bit seed;
* :class:`TapeRng` -- replays an explicit list of digits;
* ``analysis.EnumeratingRng`` -- walks every possible tape exactly once.

Bits are drawn as radix-2 digits, so a tape of bits means the same thing to
all three.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import reduce
from typing import Any, Protocol, Sequence, TypeVar, Union

import numpy as np

from .errors import ContractViolation

MAX_LENGTH = 4096


class Rng(Protocol):
    def randbelow(self, n: int) -> int: ...


@dataclass(frozen=True, slots=True)
class BitString:
    """A fixed-length string of bits, stored as an int (MSB first)."""

    value: int
    length: int

    def __post_init__(self):
        if not isinstance(self.length, int) or not 1 <= self.length <= MAX_LENGTH:
            raise ContractViolation(f"length must be in [1, {MAX_LENGTH}], got {self.length!r}")
        if not 0 <= self.value < (1 << self.length):
            raise ContractViolation(f"value {self.value} does not fit in {self.length} bits")

    @classmethod
    def from_str(cls, text: str) -> BitString:
        if not text or set(text) - {"0", "1"}:
            raise ContractViolation(f"not a bit string: {text!r}")
        return cls(int(text, 2), len(text))

    @classmethod
    def from_bits(cls, bits: Sequence[int]) -> BitString:
        value = 0
        for b in bits:
            value = (value << 1) | (int(b) & 1)
        return cls(value, len(bits))

    @classmethod
    def zeros(cls, length: int) -> BitString:
        return cls(0, length)

    @classmethod
    def random(cls, length: int, rng: Rng) -> BitString:
        value = 0
        for _ in range(length):
            value = (value << 1) | rng.randbelow(2)
        return cls(value, length)

    @classmethod
    def all(cls, length: int):
        """Every string of the given length, in increasing numeric order."""
        return [cls(v, length) for v in range(1 << length)]

    @property
    def bits(self) -> tuple[int, ...]:
        return tuple((self.value >> (self.length - 1 - i)) & 1 for i in range(self.length))

    def __xor__(self, other: BitString) -> BitString:
        if not isinstance(other, BitString):
            return NotImplemented
        if other.length != self.length:
            raise ContractViolation(f"length mismatch: {self.length} vs {other.length}")
        return BitString(self.value ^ other.value, self.length)

    def __and__(self, other: BitString) -> BitString:
        if not isinstance(other, BitString):
            return NotImplemented
        if other.length != self.length:
            raise ContractViolation(f"length mismatch: {self.length} vs {other.length}")
        return BitString(self.value & other.value, self.length)

    def scale(self, bit: int | ChoiceBit) -> BitString:
        """Multiply every bit by a single bit (GF(2) scalar product)."""
        return self if int(bit) else BitString(0, self.length)

    def fit(self, length: int) -> BitString:
        """Truncate (keeping the low-order bits) or zero-pad to ``length``."""
        if length >= self.length:
            return BitString(self.value, length)
        return BitString(self.value & ((1 << length) - 1), length)

    def zero(self) -> BitString:
        return BitString(0, self.length)

    def chunks(self, size: int) -> list[BitString]:
        """Split MSB-first into pieces of at most ``size`` bits."""
        text = str(self)
        return [BitString.from_str(text[i:i + size]) for i in range(0, self.length, size)]

    @classmethod
    def concat(cls, parts: Sequence[BitString]) -> BitString:
        return cls.from_str("".join(str(p) for p in parts))

    def __len__(self) -> int:
        return self.length

    def __str__(self) -> str:
        return format(self.value, f"0{self.length}b")

    def __repr__(self) -> str:
        return f"BitString('{self}')"


@dataclass(frozen=True, slots=True)
class ChoiceBit:
    """A receiver's choice bit or a share of one.

    Deliberately not interchangeable with a 1-bit :class:`BitString`.
    """

    value: int

    def __post_init__(self):
        if self.value not in (0, 1):
            raise ContractViolation(f"choice bit must be 0 or 1, got {self.value!r}")

    @classmethod
    def random(cls, rng: Rng) -> ChoiceBit:
        return cls(rng.randbelow(2))

    def __xor__(self, other: ChoiceBit) -> ChoiceBit:
        if not isinstance(other, ChoiceBit):
            return NotImplemented
        return ChoiceBit(self.value ^ other.value)

    def flip(self) -> ChoiceBit:
        return ChoiceBit(1 - self.value)

    def zero(self) -> ChoiceBit:
        return ChoiceBit(0)

    def __int__(self) -> int:
        return self.value

    def __index__(self) -> int:
        return self.value

    def __repr__(self) -> str:
        return f"ChoiceBit({self.value})"


Shareable = TypeVar("Shareable", BitString, ChoiceBit)


def xor(a: BitString, b: BitString) -> BitString:
    """Bitwise addition mod 2."""
    return a ^ b


def _random_like(secret: Shareable, rng: Rng) -> Shareable:
    if isinstance(secret, ChoiceBit):
        return ChoiceBit.random(rng)
    return BitString.random(secret.length, rng)


def share_xor(secret: Shareable, n: int, rng: Rng) -> list[Shareable]:
    """Split ``secret`` into ``n`` shares whose XOR is the secret.

    The first ``n - 1`` shares are drawn uniformly from ``rng``; the last one
    closes the sum.
    """
    if not isinstance(n, int) or n < 1:
        raise ContractViolation(f"need at least one share, got n={n!r}")
    shares = [_random_like(secret, rng) for _ in range(n - 1)]
    last = reduce(lambda acc, s: acc ^ s, shares, secret)
    return shares + [last]


def reconstruct_xor(shares: Sequence[Shareable]) -> Shareable:
    if not shares:
        raise ContractViolation("cannot reconstruct from an empty share list")
    return reduce(lambda acc, s: acc ^ s, shares[1:], shares[0])


class SeededRng:
    """Reproducible pseudo-random source: identical seeds give identical streams."""

    def __init__(self, seed: int):
        self.seed = int(seed) & 0xFFFF_FFFF_FFFF_FFFF
        self.counter = 0
        self._random = random.Random(self.seed)

    def randbelow(self, n: int) -> int:
        if n < 1:
            raise ContractViolation(f"randbelow needs n >= 1, got {n}")
        self.counter += 1
        return self._random.randrange(n)

    @staticmethod
    def derive(seed: int, index: int) -> SeededRng:
        """Independent child stream for trial ``index`` of a run seeded with ``seed``."""
        state = np.random.SeedSequence([int(seed) & 0xFFFF_FFFF_FFFF_FFFF, index]).generate_state(1, np.uint64)
        return SeededRng(int(state[0]))

    def __repr__(self) -> str:
        return f"SeededRng(seed={self.seed}, counter={self.counter})"


class TapeRng:
    """Replays a fixed sequence of digits; digit ``i`` answers the ``i``-th draw."""

    def __init__(self, digits: Sequence[int]):
        self.digits = list(digits)
        self.position = 0

    def randbelow(self, n: int) -> int:
        if self.position >= len(self.digits):
            raise ContractViolation(f"random tape exhausted after {self.position} draws")
        d = self.digits[self.position]
        if not 0 <= d < n:
            raise ContractViolation(f"tape digit {d} at position {self.position} out of range for radix {n}")
        self.position += 1
        return d


RngLike = Union[Rng, int, Sequence[int], None]


def as_rng(tape: RngLike) -> Rng:
    """Accept an rng object, an integer seed or an explicit digit tape."""
    if tape is None:
        return SeededRng(0)
    if isinstance(tape, (int, np.integer)):
        return SeededRng(int(tape))
    if hasattr(tape, "randbelow"):
        return tape
    return TapeRng(tape)


def encode(payload: Any) -> Any:
    """JSON-compatible form of a message payload."""
    if isinstance(payload, BitString):
        return str(payload)
    if isinstance(payload, ChoiceBit):
        return {"choice": payload.value}
    if isinstance(payload, (tuple, list)):
        return [encode(p) for p in payload]
    if isinstance(payload, dict):
        return {str(k): encode(v) for k, v in sorted(payload.items(), key=lambda kv: str(kv[0]))}
    if payload is None or isinstance(payload, (int, str, bool)):
        return payload
    return repr(payload)
