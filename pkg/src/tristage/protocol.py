"""The three-stage exchange and multi-block key-distribution sessions.

One protocol run moves a secret basis state across the channel three times:
Alice applies her secret operator and sends, Bob applies his and sends back,
Alice undoes hers and forwards, and Bob undoes his before measuring.  When
the two operators commute up to a global phase the recovered state equals
the secret up to that phase, so Bob's computational measurement reads the
secret bits exactly on a clean channel.

`run_key_session` repeats the exchange over many blocks with independently
drawn secrets and operators, producing the two parties' bit strings and the
observed error rate.  Sessions are reproducible: each block derives its
random stream from the session seed and the block index.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .adversary import ChannelContext, EveStrategy, NoiseModel, transmit
from .opsets import commutation_phase, get_family
from .qcore import (
    DEFAULT_TOL,
    Outcome,
    StateVector,
    UnitaryOperator,
    adjoint,
    apply,
    basis_state,
    equal_up_to_global_phase,
    measure,
)


class StageLabel(Enum):
    """The three transmissions of one protocol run, in order."""

    ALICE_TO_BOB_1 = 1
    BOB_TO_ALICE_2 = 2
    ALICE_TO_BOB_3 = 3

    @property
    def number(self) -> int:
        return self.value


#: The stages in transmission order.
STAGES: tuple[StageLabel, ...] = tuple(StageLabel)


class NonCommutingOperatorsError(ValueError):
    """Raised when a run pairs operators that do not commute up to phase."""


@dataclass(frozen=True)
class Transcript:
    """Complete record of one protocol run.

    ``wire_states`` holds the state as it left the sender at each stage,
    ``delivered_states`` the state after channel interference.  Treat all
    fields as read-only.
    """

    secret: StateVector
    alice_op: UnitaryOperator
    bob_op: UnitaryOperator
    wire_states: dict
    delivered_states: dict
    recovered: StateVector
    measured: Outcome
    eve_records: tuple


def run_three_stage(
    secret: StateVector,
    alice_op: UnitaryOperator,
    bob_op: UnitaryOperator,
    channel: ChannelContext,
    rng: np.random.Generator,
) -> Transcript:
    """Execute one three-stage exchange and measure the recovered state.

    Args:
        secret: The state Alice wants to convey (normally a basis state).
        alice_op: Alice's secret operator, undone at stage three.
        bob_op: Bob's secret operator, undone before the final measurement.
        channel: Interference applied to each of the three transmissions.
        rng: Random stream for channel randomness and the final measurement.

    Returns:
        A `Transcript` of every intermediate state plus the final outcome.

    Raises:
        NonCommutingOperatorsError: If the operator pair does not commute up
            to a global phase, which the protocol requires.
        ValueError: If dimensions disagree.
    """
    if not secret.dim == alice_op.dim == bob_op.dim:
        raise ValueError(
            f"dims disagree: secret {secret.dim}, "
            f"alice {alice_op.dim}, bob {bob_op.dim}"
        )
    if commutation_phase(alice_op, bob_op) is None:
        raise NonCommutingOperatorsError(
            f"operators {alice_op.label or '<alice>'} and {bob_op.label or '<bob>'} "
            "do not commute up to a global phase"
        )
    wire: dict = {}
    delivered: dict = {}
    records = []

    def send(stage: StageLabel, psi: StateVector) -> StateVector:
        wire[stage] = psi
        arrived, record = transmit(stage, psi, channel, rng)
        delivered[stage] = arrived
        if record is not None:
            records.append((stage, record))
        return arrived

    state = send(StageLabel.ALICE_TO_BOB_1, apply(alice_op, secret))
    state = send(StageLabel.BOB_TO_ALICE_2, apply(bob_op, state))
    state = send(StageLabel.ALICE_TO_BOB_3, apply(adjoint(alice_op), state))
    recovered = apply(adjoint(bob_op), state)
    measured, _ = measure(recovered, rng)
    return Transcript(
        secret=secret,
        alice_op=alice_op,
        bob_op=bob_op,
        wire_states=wire,
        delivered_states=delivered,
        recovered=recovered,
        measured=measured,
        eve_records=tuple(records),
    )


def verify_recovery(transcript: Transcript, tol: float = DEFAULT_TOL) -> bool:
    """True when the recovered state equals the secret up to a global phase."""
    return equal_up_to_global_phase(transcript.recovered, transcript.secret, tol)


@dataclass(frozen=True)
class SessionConfig:
    """Configuration of a multi-block key session."""

    family_name: str
    blocks: int
    eve_strategy: EveStrategy | None = None
    noise: NoiseModel | None = None
    seed: int = 0

    def __post_init__(self):
        if self.blocks < 1:
            raise ValueError(f"blocks must be >= 1, got {self.blocks}")
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")


@dataclass(frozen=True)
class SessionReport:
    """Result of a key session: both bit strings and the derived rates."""

    alice_bits: tuple
    bob_bits: tuple
    block_transcripts: tuple
    bit_error_rate: float
    eve_guess_success_rate: float | None


def run_key_session(
    config: SessionConfig,
    eve_guesser: Callable[[tuple], int] | None = None,
) -> SessionReport:
    """Run a session of independent protocol blocks and collect key bits.

    Per block: Alice draws a uniformly random basis secret (one bit for
    dimension-2 families, two bits for dimension-4), both parties draw
    family members uniformly and independently, and one three-stage run
    executes.  Bob's bits come from measuring each recovered state.

    The block random stream is derived from (session seed, block index), so
    identical configs reproduce identical reports bit for bit.

    Args:
        config: Session parameters; the family name must be in the catalog.
        eve_guesser: Optional map from the eavesdropper's per-block record
            tuple to a guessed secret index.  When given and Eve is active,
            the report includes her empirical guess success rate.

    Raises:
        ValueError: If the family name is unknown.
    """
    family = get_family(config.family_name)
    num_qubits = family.dim.bit_length() - 1
    channel = ChannelContext(eve=config.eve_strategy, noise=config.noise)
    member_count = len(family)
    alice_bits: list[int] = []
    bob_bits: list[int] = []
    transcripts = []
    guesses_right = []
    for block in range(config.blocks):
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=config.seed, spawn_key=(block,))
        )
        secret_index = int(rng.integers(0, family.dim))
        alice_op = family.members[int(rng.integers(0, member_count))]
        bob_op = family.members[int(rng.integers(0, member_count))]
        transcript = run_three_stage(
            basis_state(secret_index, num_qubits), alice_op, bob_op, channel, rng
        )
        alice_bits.extend(Outcome.from_index(secret_index, num_qubits).bits)
        bob_bits.extend(transcript.measured.bits)
        transcripts.append(transcript)
        if eve_guesser is not None and config.eve_strategy is not None:
            record_key = tuple(outcome.index for _, outcome in transcript.eve_records)
            guesses_right.append(int(eve_guesser(record_key) == secret_index))
    mismatches = sum(a != b for a, b in zip(alice_bits, bob_bits))
    success_rate = (
        sum(guesses_right) / len(guesses_right) if guesses_right else None
    )
    return SessionReport(
        alice_bits=tuple(alice_bits),
        bob_bits=tuple(bob_bits),
        block_transcripts=tuple(transcripts),
        bit_error_rate=mismatches / len(alice_bits),
        eve_guess_success_rate=success_rate,
    )
