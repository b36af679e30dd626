"""Channel interference: eavesdropping and noise between transmissions.

Everything that can happen to a state in flight is collected in a
`ChannelContext`: an optional intercept-resend eavesdropper followed by
optional per-qubit bit-flip noise.  `transmit` pushes one state through the
context for a named stage and reports the eavesdropper's measurement record
when she intercepted.

The eavesdropper measures every qubit in the computational basis by default.
A pre-rotation unitary generalizes the attack basis: she rotates the
intercepted state, measures, re-prepares the observed basis state, and
un-rotates before forwarding.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cache
from typing import TYPE_CHECKING

import numpy as np

from .qcore import Outcome, StateVector, UnitaryOperator, adjoint, apply, measure

if TYPE_CHECKING:
    from .protocol import StageLabel

_PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
_IDENTITY_2 = np.eye(2, dtype=complex)


@cache
def _flip_operator(num_qubits: int, qubit: int) -> UnitaryOperator:
    factors = [_PAULI_X if q == qubit else _IDENTITY_2 for q in range(num_qubits)]
    matrix = factors[0]
    for factor in factors[1:]:
        matrix = np.kron(matrix, factor)
    return UnitaryOperator(matrix, f"flip{qubit}")


@dataclass(frozen=True)
class EveStrategy:
    """Intercept-resend attack plan.

    Args:
        stages: Non-empty set of stage labels to intercept.
        pre_rotation: Optional unitary defining the measurement basis; None
            means the computational basis.
    """

    stages: frozenset
    pre_rotation: UnitaryOperator | None = None

    def __post_init__(self):
        object.__setattr__(self, "stages", frozenset(self.stages))
        if not self.stages:
            raise ValueError("an eavesdropping strategy needs at least one stage")

    def attacks(self, stage: StageLabel) -> bool:
        return stage in self.stages


@dataclass(frozen=True)
class NoiseModel:
    """Independent bit flip on each qubit of each transmission."""

    bit_flip_probability: float

    def __post_init__(self):
        p = self.bit_flip_probability
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"bit flip probability must lie in [0, 1], got {p}")


@dataclass(frozen=True)
class ChannelContext:
    """What the channel does to a state: optional Eve, then optional noise."""

    eve: EveStrategy | None = None
    noise: NoiseModel | None = None

    @property
    def clean(self) -> bool:
        return self.eve is None and self.noise is None


def transmit(
    stage: StageLabel,
    psi: StateVector,
    ctx: ChannelContext,
    rng: np.random.Generator,
) -> tuple[StateVector, Outcome | None]:
    """Send a state through the channel for one stage.

    If the eavesdropper intercepts this stage she applies her pre-rotation
    (when set), measures every qubit, re-prepares the collapsed basis state,
    and applies the adjoint rotation before forwarding.  Noise then flips
    each qubit independently with the configured probability.

    Args:
        stage: Which transmission this is; decides whether Eve intercepts.
        psi: The state as it left the sender.
        ctx: Channel configuration.
        rng: Random stream driving Eve's collapse and the noise flips.

    Returns:
        The delivered state and Eve's measurement record (None when she did
        not intercept this stage).

    Raises:
        ValueError: If the pre-rotation dimension does not match the state.
    """
    record = None
    if ctx.eve is not None and ctx.eve.attacks(stage):
        rotation = ctx.eve.pre_rotation
        if rotation is not None:
            if rotation.dim != psi.dim:
                raise ValueError(
                    f"pre-rotation dim {rotation.dim} does not match state dim {psi.dim}"
                )
            record, collapsed = measure(apply(rotation, psi), rng)
            psi = apply(adjoint(rotation), collapsed)
        else:
            record, psi = measure(psi, rng)
    if ctx.noise is not None:
        p = ctx.noise.bit_flip_probability
        for qubit in range(psi.num_qubits):
            if rng.random() < p:
                psi = apply(_flip_operator(psi.num_qubits, qubit), psi)
    return psi, record
