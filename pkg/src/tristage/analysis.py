"""Exact and sampled statistics for eavesdropped protocol runs.

Two routes lead to the same quantities.  `exact_analysis` enumerates every
operator pair and every eavesdropper measurement branch with exact Born-rule
weights, giving closed-form rates.  `monte_carlo_analysis` estimates the
same rates by sampling, using a vectorized state pipeline that draws the
same random quantities a per-run simulation would (operator choices, one
collapse per intercepted stage, per-qubit noise flips, one final
measurement) without paying per-run overhead.  The two routes share only
the eavesdropper's decision rule, never probability values, so tests can
drive them against each other.

The eavesdropper's guess is maximum-a-posteriori: from the exact joint
distribution of (secret, records) under uniform secrets and operator
choices, each observable record tuple maps to the most likely secret index
(lowest index on ties).  This is the strongest deterministic classical
post-processing of her records, so leakage numbers are conservative.

Rates reported:

* ``bit_error_rate``: expected fraction of secret bits Bob reads wrongly.
* ``detection_relevant_disturbance``: probability Bob's whole outcome
  differs from the secret, i.e. the per-block chance of a detectable error.
* ``eve_guess_success_rate``: probability the MAP guess equals the whole
  secret.

For one-qubit families the first two coincide.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cache
from typing import Callable, Iterator

import numpy as np

from .adversary import ChannelContext, EveStrategy
from .opsets import OperatorFamily
from .protocol import STAGES
from .qcore import StateVector, is_basis_state

#: Branches below this probability are dropped from the enumeration.
_PRUNE = 1e-15

#: Conservation tolerance for the enumerated branch probabilities.
_CONSERVATION_TOL = 1e-12


@cache
def _hamming_table(dim: int) -> np.ndarray:
    table = np.zeros((dim, dim), dtype=np.int64)
    for i in range(dim):
        for j in range(dim):
            table[i, j] = (i ^ j).bit_count()
    return table


@dataclass(frozen=True)
class ExactAnalysis:
    """Closed-form rates for one (family, strategy, secret) scenario."""

    bit_error_rate: float
    detection_relevant_disturbance: float
    eve_guess_success_rate: float
    branch_count: int


@dataclass(frozen=True)
class MonteCarloAnalysis:
    """Sampled rates with standard errors for the same scenario."""

    trials: int
    bit_error_rate: float
    bit_error_rate_stderr: float
    detection_relevant_disturbance: float
    detection_relevant_disturbance_stderr: float
    eve_guess_success_rate: float | None
    eve_guess_success_rate_stderr: float | None


def _rotation_matrices(eve: EveStrategy, dim: int):
    """Eve's measurement rotation and re-preparation table.

    Row k of the re-preparation table is the state she forwards after
    observing outcome k (the un-rotated basis state).
    """
    if eve.pre_rotation is None:
        identity = np.eye(dim, dtype=complex)
        return None, identity
    if eve.pre_rotation.dim != dim:
        raise ValueError(
            f"pre-rotation dim {eve.pre_rotation.dim} does not match family dim {dim}"
        )
    rotation = eve.pre_rotation.matrix
    return rotation, np.conjugate(rotation)


def _branches(
    family: OperatorFamily, eve: EveStrategy, secret_index: int
) -> Iterator[tuple[float, tuple, np.ndarray]]:
    """Enumerate all measurement branches for a fixed basis secret.

    Yields (probability, eavesdropper record tuple, final outcome
    distribution) over all operator pairs (uniform weights) and all
    non-negligible collapse outcomes at the intercepted stages.
    """
    dim = family.dim
    rotation, reprep = _rotation_matrices(eve, dim)
    pair_weight = 1.0 / len(family) ** 2
    attacked = {stage: eve.attacks(stage) for stage in STAGES}
    first, second, third = STAGES
    for alice in family.members:
        for bob in family.members:
            pipeline = (
                (first, bob.matrix),
                (second, alice.matrix.conj().T),
                (third, bob.matrix.conj().T),
            )
            stack = [(pair_weight, alice.matrix[:, secret_index], ())]
            for stage, post in pipeline:
                grown = []
                for prob, psi, records in stack:
                    if attacked[stage]:
                        amps = rotation @ psi if rotation is not None else psi
                        for k, weight in enumerate(np.abs(amps) ** 2):
                            branch_prob = prob * weight
                            if branch_prob <= _PRUNE:
                                continue
                            grown.append(
                                (branch_prob, post @ reprep[k], records + (k,))
                            )
                    else:
                        grown.append((prob, post @ psi, records))
                stack = grown
            for prob, psi, records in stack:
                yield prob, records, np.abs(psi) ** 2


def map_decision_table(family: OperatorFamily, eve: EveStrategy) -> dict:
    """MAP guess per observable record tuple, from the exact joint law.

    Built by enumerating every basis secret with uniform prior; ties break
    toward the lowest secret index, making the table deterministic.
    """
    dim = family.dim
    likelihood: dict[tuple, np.ndarray] = {}
    for secret_index in range(dim):
        for prob, records, _ in _branches(family, eve, secret_index):
            likelihood.setdefault(records, np.zeros(dim))[secret_index] += prob
    return {records: int(np.argmax(v)) for records, v in likelihood.items()}


def map_guesser(family: OperatorFamily, eve: EveStrategy) -> Callable[[tuple], int]:
    """Callable form of `map_decision_table`; unseen records guess index 0."""
    table = map_decision_table(family, eve)
    return lambda records: table.get(tuple(records), 0)


def exact_analysis(
    family: OperatorFamily, eve: EveStrategy, secret: StateVector
) -> ExactAnalysis:
    """Compute disturbance and leakage rates by exhaustive enumeration.

    Enumerates all operator pairs with uniform weights and, inside each, the
    full tree of eavesdropper collapse outcomes with exact probabilities.

    Args:
        secret: A computational basis state of the family's dimension.

    Raises:
        ValueError: If dimensions disagree or the secret is not a basis state.
        RuntimeError: If the enumerated branch probabilities fail to sum
            to one, which would indicate a broken enumeration.
    """
    if family.dim != secret.dim:
        raise ValueError(f"family dim {family.dim} does not match secret dim {secret.dim}")
    secret_index = is_basis_state(secret)
    if secret_index is None:
        raise ValueError("exact analysis needs a computational basis secret")
    table = map_decision_table(family, eve)
    hamming = _hamming_table(family.dim)[secret_index]
    num_bits = secret.num_qubits
    total = 0.0
    bit_error = 0.0
    disturbance = 0.0
    success = 0.0
    count = 0
    for prob, records, dist in _branches(family, eve, secret_index):
        count += 1
        total += prob
        bit_error += prob * float(dist @ hamming) / num_bits
        disturbance += prob * (1.0 - float(dist[secret_index]))
        if table.get(records, 0) == secret_index:
            success += prob
    if abs(total - 1.0) > _CONSERVATION_TOL:
        raise RuntimeError(f"branch probabilities sum to {total!r}, expected 1")
    return ExactAnalysis(
        bit_error_rate=float(bit_error),
        detection_relevant_disturbance=float(disturbance),
        eve_guess_success_rate=float(success),
        branch_count=count,
    )


def _decode_records(code: int, count: int, dim: int) -> tuple:
    digits = []
    for _ in range(count):
        digits.append(code % dim)
        code //= dim
    return tuple(reversed(digits))


def monte_carlo_analysis(
    family: OperatorFamily,
    ctx: ChannelContext,
    secret: StateVector,
    trials: int,
    seed: int,
) -> MonteCarloAnalysis:
    """Estimate the scenario rates by simulating many independent runs.

    Each trial draws the two operators, collapses the state at every
    intercepted stage, applies per-qubit noise flips per transmission, and
    measures the recovered state, all from one seeded stream.  Trials with
    the same operator pair are simulated together as a batch of state rows,
    which changes nothing statistically.

    Standard errors: the bit-error rate uses the sample standard error of
    the per-trial bit-error fractions; the whole-block rates use the
    binomial formula.

    Raises:
        ValueError: If dimensions disagree, the secret is not a basis
            state, or ``trials`` < 1.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if family.dim != secret.dim:
        raise ValueError(f"family dim {family.dim} does not match secret dim {secret.dim}")
    secret_index = is_basis_state(secret)
    if secret_index is None:
        raise ValueError("monte carlo analysis needs a computational basis secret")
    dim = family.dim
    num_qubits = secret.num_qubits
    members = family.members
    member_count = len(members)
    eve = ctx.eve
    noise_p = ctx.noise.bit_flip_probability if ctx.noise is not None else None
    rotation, reprep = _rotation_matrices(eve, dim) if eve is not None else (None, None)
    attacked = [stage for stage in STAGES if eve is not None and eve.attacks(stage)]
    guess_by_code = None
    if eve is not None:
        table = map_decision_table(family, eve)
        codes = dim ** len(attacked)
        guess_by_code = np.array(
            [table.get(_decode_records(c, len(attacked), dim), 0) for c in range(codes)],
            dtype=np.int64,
        )

    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed))
    alice_idx = rng.integers(0, member_count, size=trials)
    bob_idx = rng.integers(0, member_count, size=trials)
    outcomes = np.empty(trials, dtype=np.int64)
    record_codes = np.zeros(trials, dtype=np.int64)
    column_index = np.arange(dim)

    def sample(prob_rows: np.ndarray) -> np.ndarray:
        cumulative = np.cumsum(prob_rows, axis=1)
        u = rng.random(len(prob_rows))
        return np.minimum((cumulative < u[:, None]).sum(axis=1), dim - 1)

    for ai in range(member_count):
        for bi in range(member_count):
            group = (alice_idx == ai) & (bob_idx == bi)
            n = int(group.sum())
            if n == 0:
                continue
            alice_m = members[ai].matrix
            bob_m = members[bi].matrix
            # Rows are transposed states: applying U maps row -> row @ U.T.
            batch = np.repeat(alice_m[:, secret_index][None, :], n, axis=0)
            codes = np.zeros(n, dtype=np.int64)
            pipeline = (
                (STAGES[0], bob_m.T),
                (STAGES[1], alice_m.conj()),
                (STAGES[2], bob_m.conj()),
            )
            for stage, post in pipeline:
                if eve is not None and eve.attacks(stage):
                    amps = batch @ rotation.T if rotation is not None else batch
                    k = sample(np.abs(amps) ** 2)
                    batch = reprep[k]
                    codes = codes * dim + k
                if noise_p is not None:
                    flips = rng.random((n, num_qubits)) < noise_p
                    masks = np.zeros(n, dtype=np.int64)
                    for q in range(num_qubits):
                        masks |= flips[:, q].astype(np.int64) << (num_qubits - 1 - q)
                    if masks.any():
                        batch = batch[
                            np.arange(n)[:, None], column_index[None, :] ^ masks[:, None]
                        ]
                batch = batch @ post
            final = sample(np.abs(batch) ** 2)
            outcomes[group] = final
            record_codes[group] = codes

    bit_fractions = _hamming_table(dim)[secret_index][outcomes] / num_qubits
    bit_error = float(bit_fractions.mean())
    bit_error_stderr = (
        float(bit_fractions.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    )
    wrong_block = outcomes != secret_index
    disturbance = float(wrong_block.mean())
    disturbance_stderr = math.sqrt(disturbance * (1.0 - disturbance) / trials)
    if eve is not None:
        right = guess_by_code[record_codes] == secret_index
        success = float(right.mean())
        success_stderr = math.sqrt(success * (1.0 - success) / trials)
    else:
        success = None
        success_stderr = None
    return MonteCarloAnalysis(
        trials=trials,
        bit_error_rate=bit_error,
        bit_error_rate_stderr=bit_error_stderr,
        detection_relevant_disturbance=disturbance,
        detection_relevant_disturbance_stderr=disturbance_stderr,
        eve_guess_success_rate=success,
        eve_guess_success_rate_stderr=success_stderr,
    )
