"""Classical 1-out-of-2 OT from additively homomorphic (exponent) ElGamal.

Receiver with choice c sends E = Enc(c).  The sender answers

    Z0 = Enc(m0) + r0 * E            -> decrypts to m0 + r0 * c
    Z1 = Enc(m1) + r1 * (Enc(1) - E) -> decrypts to m1 + r1 * (1 - c)

with r0, r1 uniform in Z_q.  Whatever E encrypts, at least one of c, 1 - c is
non-zero mod q, so that branch is a one-time pad over Z_q: the sender is
protected unconditionally.  The receiver's choice is hidden only as long as
the sender cannot decide DDH in the group.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import sympy

from .core import BitString, ChoiceBit, Rng
from .errors import ContractViolation, RefusesToBruteForce

BRUTE_FORCE_LIMIT = 1 << 20
TABLE_LIMIT = 1 << 16
CHUNK_BITS = 8


@dataclass(frozen=True)
class CyclicGroup:
    """Order-q subgroup of Z_p^*, generated by g."""

    p: int
    q: int
    g: int

    def __post_init__(self):
        if not (sympy.isprime(self.p) and sympy.isprime(self.q)):
            raise ContractViolation("p and q must be prime")
        if (self.p - 1) % self.q:
            raise ContractViolation("q must divide p - 1")
        if self.g % self.p in (0, 1) or pow(self.g, self.q, self.p) != 1:
            raise ContractViolation(f"g={self.g} does not generate an order-{self.q} subgroup")

    def exp(self, k: int) -> int:
        return pow(self.g, k % self.q, self.p)

    def contains(self, x: int) -> bool:
        return 0 < x < self.p and pow(x, self.q, self.p) == 1

    @property
    def chunk_bits(self) -> int:
        """Bits per plaintext chunk: at most 8 and always below q."""
        return max(1, min(CHUNK_BITS, self.q.bit_length() - 1))

    def to_json(self) -> dict:
        return {"p": self.p, "q": self.q, "g": self.g}


TOY_GROUP = CyclicGroup(23, 11, 2)
ORDER_31_GROUP = CyclicGroup(311, 31, 91)
SMALL_GROUP = CyclicGroup(131267, 65633, 4)
LARGE_GROUP = CyclicGroup(4611686018427394499, 2305843009213697249, 4)


@lru_cache(maxsize=8)
def _log_table(group: CyclicGroup) -> dict[int, int]:
    table = {}
    x = 1
    for k in range(group.q):
        table[x] = k
        x = x * group.g % group.p
    return table


def discrete_log(group: CyclicGroup, h: int, bound: int | None = None) -> int:
    """Smallest k with g^k = h.

    With ``bound`` the search covers [0, bound) only (plaintext decoding).
    Without it a full log is computed, which is refused for q > 2^20.
    """
    if bound is not None:
        x = 1
        for k in range(min(bound, group.q)):
            if x == h:
                return k
            x = x * group.g % group.p
        raise ValueError(f"{h} is not g^k for any k < {bound}")
    if group.q > BRUTE_FORCE_LIMIT:
        raise RefusesToBruteForce(f"q has {group.q.bit_length()} bits; brute force capped at 2^20")
    if group.q <= TABLE_LIMIT:
        try:
            return _log_table(group)[h]
        except KeyError:
            raise ValueError(f"{h} is not in the subgroup") from None
    m = math.isqrt(group.q) + 1
    baby = {}
    x = 1
    for j in range(m):
        baby.setdefault(x, j)
        x = x * group.g % group.p
    giant = pow(group.g, -m, group.p)
    y = h % group.p
    for i in range(m + 1):
        if y in baby:
            return (i * m + baby[y]) % group.q
        y = y * giant % group.p
    raise ValueError(f"{h} is not in the subgroup")


# ElGamal with the message in the exponent.  Ciphertexts are (a, b) = (g^k, g^m pk^k).

def keygen(group: CyclicGroup, rng: Rng) -> tuple[int, int]:
    """(pk, sk) with sk uniform in [1, q - 1]."""
    sk = 1 + rng.randbelow(group.q - 1)
    return group.exp(sk), sk


def encrypt(group: CyclicGroup, pk: int, m: int, rng: Rng) -> tuple[int, int]:
    k = rng.randbelow(group.q)
    return group.exp(k), group.exp(m) * pow(pk, k, group.p) % group.p


def combine(group: CyclicGroup, c1: tuple[int, int], c2: tuple[int, int]) -> tuple[int, int]:
    return c1[0] * c2[0] % group.p, c1[1] * c2[1] % group.p


def negate(group: CyclicGroup, c: tuple[int, int]) -> tuple[int, int]:
    return pow(c[0], -1, group.p), pow(c[1], -1, group.p)


def scalar(group: CyclicGroup, c: tuple[int, int], k: int) -> tuple[int, int]:
    return pow(c[0], k, group.p), pow(c[1], k, group.p)


def decrypt_exponent(group: CyclicGroup, sk: int, c: tuple[int, int]) -> int:
    """g^m for the plaintext m of ``c``."""
    a, b = c
    return b * pow(a, -sk, group.p) % group.p


def decrypt(group: CyclicGroup, sk: int, c: tuple[int, int], bound: int | None = None) -> int:
    return discrete_log(group, decrypt_exponent(group, sk, c), bound)


def _sanitize(group: CyclicGroup, c) -> tuple[int, int]:
    # Out-of-subgroup components are replaced by the identity so the sender
    # always answers inside the group.
    try:
        a, b = (int(x) for x in c)
    except (TypeError, ValueError):
        return 1, 1
    return (a if group.contains(a) else 1), (b if group.contains(b) else 1)


def receiver_request(group: CyclicGroup, choice: ChoiceBit, rng: Rng) -> tuple[int, int, tuple[int, int]]:
    """Receiver's first move: (pk, sk, E = Enc_pk(choice))."""
    pk, sk = keygen(group, rng)
    return pk, sk, encrypt(group, pk, int(choice), rng)


def sender_respond(group: CyclicGroup, pk: int, e, m0: int, m1: int, rng: Rng):
    """(Z0, Z1) for integer messages m0, m1 in Z_q.

    Randomness is drawn in the order r0, r1, k0, k1.
    """
    pk = pk if group.contains(int(pk)) else group.g
    e = _sanitize(group, e)
    r0 = rng.randbelow(group.q)
    r1 = rng.randbelow(group.q)
    z0 = combine(group, encrypt(group, pk, m0, rng), scalar(group, e, r0))
    one_minus_e = combine(group, (1, group.g), negate(group, e))
    z1 = combine(group, encrypt(group, pk, m1, rng), scalar(group, one_minus_e, r1))
    return z0, z1


def receiver_finish(group: CyclicGroup, sk: int, choice: ChoiceBit, response, bound: int | None = None) -> int:
    return decrypt(group, sk, response[int(choice)], bound)


def ddh_ot_int(m0: int, m1: int, choice: ChoiceBit, group: CyclicGroup, rng: Rng) -> int:
    """One OT of integers in [0, q)."""
    if not (0 <= m0 < group.q and 0 <= m1 < group.q):
        raise ContractViolation(f"messages must lie in [0, {group.q})")
    pk, sk, e = receiver_request(group, choice, rng)
    response = sender_respond(group, pk, e, m0, m1, rng)
    return receiver_finish(group, sk, choice, response, bound=max(m0, m1) + 1 if group.q > BRUTE_FORCE_LIMIT else None)


def run_ddh_ot(sender_inputs: tuple[BitString, BitString], choice: ChoiceBit,
               group: CyclicGroup, rng: Rng) -> BitString:
    """OT of bit strings, chunked to ``group.chunk_bits`` bits per transfer.

    All chunks use one receiver request, so they share the choice bit.
    """
    m0, m1 = sender_inputs
    if m0.length != m1.length:
        raise ContractViolation("OT inputs must have equal length")
    size = group.chunk_bits
    pk, sk, e = receiver_request(group, choice, rng)
    out = []
    for a, b in zip(m0.chunks(size), m1.chunks(size)):
        response = sender_respond(group, pk, e, a.value, b.value, rng)
        value = receiver_finish(group, sk, choice, response, bound=1 << a.length)
        out.append(BitString(value, a.length))
    return BitString.concat(out)


def ddh_solve_toy(group: CyclicGroup, triple: tuple[int, int, int]) -> bool:
    """Decide whether (g^a, g^b, g^c) has c = ab mod q, by brute-force logs."""
    x, y, z = triple
    a = discrete_log(group, x)
    return pow(y, a, group.p) == z % group.p


def sender_guess_choice(group: CyclicGroup, pk: int, e) -> int:
    """A corrupt sender's DDH attack on the receiver request.

    E = (g^k, g^c pk^k), so (pk, g^k, b) is a DH triple exactly when c = 0.
    Raises :class:`RefusesToBruteForce` on groups too large to attack.
    """
    a, b = _sanitize(group, e)
    return 0 if ddh_solve_toy(group, (pk, a, b)) else 1
