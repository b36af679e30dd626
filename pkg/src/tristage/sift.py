"""Parity-based disturbance detection over sifted keys.

After a session both parties hold bit strings that should be identical.
Comparing parities of random key subsets over the public channel reveals
disturbance: a subset with odd overlap with the error pattern flips exactly
one of the two parities.  Any uniformly random nonempty subset of an n-bit
key has odd overlap with any fixed nonzero error pattern with probability
2^(n-1) / (2^n - 1), slightly above one half, independent of the pattern.

Bits used in any parity round are publicly disclosed and flagged so callers
can discard them from the final key.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Largest key length for which subset masks are drawn as single integers;
# longer keys fall back to per-bit draws with rejection of the empty subset.
_INTEGER_MASK_LIMIT = 62


@dataclass(frozen=True)
class ParityRound:
    """One disclosed subset with both parties' parities over it."""

    subset_mask: int
    alice_parity: int
    bob_parity: int

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(
            i for i in range(self.subset_mask.bit_length()) if self.subset_mask >> i & 1
        )

    @property
    def mismatch(self) -> bool:
        return self.alice_parity != self.bob_parity


@dataclass(frozen=True)
class SiftReport:
    """Outcome of a parity comparison: rounds, verdict, and consumed bits."""

    rounds: tuple
    detected: bool
    disclosed_indices: frozenset


def _key_to_int(key, side: str) -> int:
    value = 0
    for i, bit in enumerate(key):
        if bit not in (0, 1):
            raise ValueError(f"{side} key must contain bits, got {bit!r} at index {i}")
        value |= bit << i
    return value


def parity_check(
    alice_key,
    bob_key,
    rounds: int,
    rng: np.random.Generator,
) -> SiftReport:
    """Compare parities of uniformly random nonempty key subsets.

    Args:
        alice_key: Alice's bit list.
        bob_key: Bob's bit list, same length.
        rounds: How many independent subsets to draw; each consumes the
            bits it touches (they become disclosed).
        rng: Random stream for the subset draws.

    Returns:
        A `SiftReport`; ``detected`` is true iff some round's parities
        disagree.

    Raises:
        ValueError: On length mismatch, empty keys, or rounds < 1.
    """
    if len(alice_key) != len(bob_key):
        raise ValueError(
            f"key lengths differ: {len(alice_key)} vs {len(bob_key)}"
        )
    length = len(alice_key)
    if length == 0:
        raise ValueError("keys must be non-empty")
    if rounds < 1:
        raise ValueError(f"rounds must be >= 1, got {rounds}")
    alice_int = _key_to_int(alice_key, "alice")
    bob_int = _key_to_int(bob_key, "bob")
    if length <= _INTEGER_MASK_LIMIT:
        masks = [int(m) for m in rng.integers(1, 2**length, size=rounds)]
    else:
        masks = []
        for _ in range(rounds):
            while True:
                bits = rng.integers(0, 2, size=length)
                if bits.any():
                    break
            masks.append(sum(int(b) << i for i, b in enumerate(bits)))
    round_results = []
    union = 0
    for mask in masks:
        union |= mask
        round_results.append(
            ParityRound(
                subset_mask=mask,
                alice_parity=(mask & alice_int).bit_count() & 1,
                bob_parity=(mask & bob_int).bit_count() & 1,
            )
        )
    return SiftReport(
        rounds=tuple(round_results),
        detected=any(r.mismatch for r in round_results),
        disclosed_indices=frozenset(i for i in range(length) if union >> i & 1),
    )


def detection_probability(key_length: int, error_weight: int, rounds: int) -> float:
    """Exact chance that parity comparison catches an error pattern.

    For any nonzero pattern over a key of the given length, each round
    detects independently with probability 2^(n-1) / (2^n - 1); the result
    is one minus the chance that all rounds miss.  A zero-weight pattern is
    never detected.

    Raises:
        ValueError: If counts are out of range.
    """
    if key_length < 1:
        raise ValueError(f"key_length must be >= 1, got {key_length}")
    if not 0 <= error_weight <= key_length:
        raise ValueError(
            f"error_weight must lie in [0, {key_length}], got {error_weight}"
        )
    if rounds < 1:
        raise ValueError(f"rounds must be >= 1, got {rounds}")
    if error_weight == 0:
        return 0.0
    per_round = 2 ** (key_length - 1) / (2**key_length - 1)
    return 1.0 - (1.0 - per_round) ** rounds
