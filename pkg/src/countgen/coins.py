"""Unbiased bit sources and the exact integer routines built on them.

Everything downstream draws randomness exclusively through a coin source:
a deterministic, replayable stream of unbiased bits.  The production
source expands a 64-bit seed in counter mode; tests substitute an explicit
finite tape so distributions can be enumerated exactly.
"""

from __future__ import annotations

import hashlib
import math
from fractions import Fraction

from .exceptions import TapeExhausted


class Fail:
    """Distinguished failure outcome, distinct from every domain value."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "FAIL"

    def __bool__(self):
        return False


FAIL = Fail()

_MASK64 = (1 << 64) - 1
_BLOCK_BITS = 512


class CoinSource:
    """Replayable stream of unbiased bits keyed by a 64-bit seed.

    Blocks of the tape come from a keyed hash in counter mode, so equal
    seeds always replay the identical bit sequence.  ``bits_consumed``
    advances by exactly k on every k-bit draw.
    """

    def __init__(self, seed: int):
        self.seed = seed & _MASK64
        self.bits_consumed = 0
        self._key = self.seed.to_bytes(8, "little")
        self._block_index = -1
        self._block = 0

    def _bit(self, i: int) -> int:
        block, offset = divmod(i, _BLOCK_BITS)
        if block != self._block_index:
            digest = hashlib.blake2b(
                block.to_bytes(8, "little"), key=self._key
            ).digest()
            self._block = int.from_bytes(digest, "little")
            self._block_index = block
        return (self._block >> offset) & 1

    def draw(self, k: int) -> int:
        """Next k tape bits as an integer, bit j weighted 2**j."""
        if k < 0:
            raise ValueError("bit count must be nonnegative")
        base = self.bits_consumed
        value = 0
        for j in range(k):
            value |= self._bit(base + j) << j
        self.bits_consumed = base + k
        return value


class TapeSource:
    """Coin source reading an explicit, finite tape of 0/1 cells."""

    def __init__(self, bits):
        bits = tuple(bits)
        if any(b not in (0, 1) for b in bits):
            raise ValueError("tape cells must be 0 or 1")
        self._bits = bits
        self.bits_consumed = 0

    def draw(self, k: int) -> int:
        if k < 0:
            raise ValueError("bit count must be nonnegative")
        base = self.bits_consumed
        if base + k > len(self._bits):
            raise TapeExhausted(f"tape of {len(self._bits)} bits exhausted")
        value = 0
        for j in range(k):
            value |= self._bits[base + j] << j
        self.bits_consumed = base + k
        return value


def draw_bits(src, k: int) -> int:
    """Integer formed by the next k bits of ``src`` (little-endian)."""
    return src.draw(k)


def bit_size(n: int) -> int:
    """Bits needed to index {1..n}: the unique b with 2**(b-1) < n <= 2**b.

    By convention ``bit_size(1) == 0``: indexing a singleton needs no bits.
    """
    if n < 1:
        raise ValueError("bit_size requires n >= 1")
    return (n - 1).bit_length()


def lcm_upto(n: int) -> int:
    """Least common multiple of {1..n}."""
    if n < 1:
        raise ValueError("lcm_upto requires n >= 1")
    out = 1
    for i in range(2, n + 1):
        out = out * i // math.gcd(out, i)
    return out


def retries_for(delta) -> int:
    """Smallest t >= 1 with 2**-t <= delta: attempts for a half-good trial."""
    delta = Fraction(delta)
    t = 1
    while (1 << t) * delta.numerator < delta.denominator:
        t += 1
    return t


def gen_uniform(src, n: int, delta=Fraction(1, 4)):
    """Uniform integer in {1..n}, or FAIL with probability below ``delta``.

    Each trial draws ``bit_size(n)`` bits and rejects values above n, so a
    non-FAIL output is exactly uniform.
    """
    if n < 1:
        raise ValueError("range must contain at least 1")
    delta = Fraction(delta)
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0,1)")
    width = bit_size(n)
    for _ in range(retries_for(delta)):
        u = src.draw(width) + 1
        if u <= n:
            return u
    return FAIL


def outcome_law(run, max_depth: int = 96, max_leaves: int = 1_000_000) -> dict:
    """Exact output distribution of ``run`` over all random tapes.

    ``run`` takes a coin source and returns a hashable outcome.  The
    consumed bit prefixes are explored exhaustively; the result maps each
    outcome to its probability as an exact Fraction.  Only usable when
    ``run`` consumes boundedly many bits on every path.
    """
    law: dict = {}
    stack = [()]
    explored = 0
    while stack:
        prefix = stack.pop()
        explored += 1
        if explored > max_leaves:
            raise RuntimeError("outcome_law: tape tree exceeded max_leaves")
        if len(prefix) > max_depth:
            raise RuntimeError("outcome_law: consumption exceeded max_depth")
        try:
            out = run(TapeSource(prefix))
        except TapeExhausted:
            stack.append(prefix + (0,))
            stack.append(prefix + (1,))
            continue
        weight = Fraction(1, 1 << len(prefix))
        law[out] = law.get(out, Fraction(0)) + weight
    return law
