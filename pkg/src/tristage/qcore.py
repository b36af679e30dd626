"""Dense complex linear algebra for one- and two-qubit pure states.

States are normalized amplitude vectors over the computational basis and
operators are unitary matrices of dimension 2 or 4.  Basis indices are read
with qubit 0 as the most significant bit, so for two qubits index 2 is |10>.

Two comparison notions are used throughout:

* exact representation equality (``==`` on the wrapper types), used by
  determinism checks, and
* equality up to a global phase (`equal_up_to_global_phase`), the physically
  meaningful notion, since a unit-modulus scalar in front of a state is
  unobservable.

All wrapper types are immutable after construction (the underlying numpy
buffers are marked read-only) and safe to share between threads.  Random
sampling goes through an explicit `numpy.random.Generator` so that every
stochastic operation is reproducible from a seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

#: Default tolerance for derived quantities (norms, phase comparisons).
DEFAULT_TOL = 1e-9

_SUPPORTED_NUM_QUBITS = (1, 2)
_SUPPORTED_DIMS = (2, 4)


def _as_readonly_complex(values, shape_kind: str) -> np.ndarray:
    arr = np.array(values, dtype=complex, order="C")
    if not np.all(np.isfinite(arr.view(float))):
        raise ValueError(f"{shape_kind} entries must be finite (no NaN or infinity)")
    arr.setflags(write=False)
    return arr


def proportional_phase(a: np.ndarray, b: np.ndarray, tol: float = DEFAULT_TOL):
    """Return the unit scalar ``c`` with ``a = c * b``, or None if there is none.

    The candidate phase is extracted at the largest-modulus entry of ``b`` to
    avoid dividing by a near-zero amplitude, then checked entrywise.

    Args:
        a: Complex array.
        b: Complex array of the same shape.
        tol: Entrywise tolerance for the comparison.

    Returns:
        A complex scalar of modulus 1 (within ``tol``), or None if ``a`` is
        not a unit-modulus multiple of ``b``.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    pivot = np.argmax(np.abs(b))
    pivot_value = b.flat[pivot]
    if abs(pivot_value) <= tol:
        return None
    c = a.flat[pivot] / pivot_value
    if abs(abs(c) - 1.0) > tol:
        return None
    if np.max(np.abs(a - c * b)) > tol:
        return None
    return complex(c)


@dataclass(frozen=True, eq=False)
class StateVector:
    """Pure state of one or two qubits as a normalized amplitude vector.

    Attributes:
        num_qubits: 1 or 2.
        amplitudes: Complex vector of length ``2**num_qubits`` with unit norm
            (within 1e-9); read-only after construction.
    """

    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.num_qubits not in _SUPPORTED_NUM_QUBITS:
            raise ValueError(f"num_qubits must be 1 or 2, got {self.num_qubits}")
        arr = _as_readonly_complex(self.amplitudes, "state")
        if arr.shape != (2**self.num_qubits,):
            raise ValueError(
                f"state over {self.num_qubits} qubit(s) needs "
                f"{2**self.num_qubits} amplitudes, got shape {arr.shape}"
            )
        norm = float(np.sum(np.abs(arr) ** 2))
        if abs(norm - 1.0) > DEFAULT_TOL:
            raise ValueError(f"state norm squared is {norm}, expected 1 within {DEFAULT_TOL}")
        object.__setattr__(self, "amplitudes", arr)

    @property
    def dim(self) -> int:
        return 2**self.num_qubits

    def __eq__(self, other) -> bool:
        if not isinstance(other, StateVector):
            return NotImplemented
        return self.num_qubits == other.num_qubits and bool(
            np.array_equal(self.amplitudes, other.amplitudes)
        )

    def __repr__(self) -> str:
        return f"StateVector({self.num_qubits}, {self.amplitudes.tolist()!r})"


@dataclass(frozen=True, eq=False)
class UnitaryOperator:
    """Square complex matrix with verified unitarity, dimension 2 or 4.

    Attributes:
        matrix: The operator entries; read-only after construction.
        label: Short display name, e.g. ``"X"`` or ``"DFT4"``.
    """

    matrix: np.ndarray
    label: str = ""

    def __post_init__(self):
        arr = _as_readonly_complex(self.matrix, "operator")
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"operator must be square, got shape {arr.shape}")
        if arr.shape[0] not in _SUPPORTED_DIMS:
            raise ValueError(f"operator dimension must be 2 or 4, got {arr.shape[0]}")
        deviation = np.max(np.abs(arr.conj().T @ arr - np.eye(arr.shape[0])))
        if deviation > DEFAULT_TOL:
            raise ValueError(
                f"matrix {self.label!r} is not unitary: max |U†U - I| = {deviation:.3e}"
            )
        object.__setattr__(self, "matrix", arr)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, UnitaryOperator):
            return NotImplemented
        return self.label == other.label and bool(np.array_equal(self.matrix, other.matrix))

    def __repr__(self) -> str:
        return f"UnitaryOperator({self.label!r}, dim={self.dim})"


@dataclass(frozen=True)
class Outcome:
    """Result of a computational-basis measurement.

    ``bits`` is the binary expansion of ``index`` with qubit 0 first
    (most significant).
    """

    index: int
    bits: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if not self.bits:
            raise ValueError("bits must be non-empty")
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError(f"bits must be 0/1, got {self.bits}")
        expected = int("".join(str(b) for b in self.bits), 2)
        if expected != self.index:
            raise ValueError(f"bits {self.bits} do not encode index {self.index}")

    @classmethod
    def from_index(cls, index: int, num_qubits: int) -> "Outcome":
        if not 0 <= index < 2**num_qubits:
            raise ValueError(f"index {index} out of range for {num_qubits} qubit(s)")
        bits = tuple((index >> (num_qubits - 1 - q)) & 1 for q in range(num_qubits))
        return cls(index=index, bits=bits)


def basis_state(index: int, num_qubits: int) -> StateVector:
    """Return the computational basis state with the given index.

    Args:
        index: Basis index in ``[0, 2**num_qubits)``.
        num_qubits: 1 or 2.

    Raises:
        ValueError: If the index is out of range or num_qubits unsupported.
    """
    if num_qubits not in _SUPPORTED_NUM_QUBITS:
        raise ValueError(f"num_qubits must be 1 or 2, got {num_qubits}")
    if not 0 <= index < 2**num_qubits:
        raise ValueError(f"basis index {index} out of range for {num_qubits} qubit(s)")
    amps = np.zeros(2**num_qubits, dtype=complex)
    amps[index] = 1.0
    return StateVector(num_qubits=num_qubits, amplitudes=amps)


def is_basis_state(psi: StateVector, tol: float = DEFAULT_TOL) -> int | None:
    """Return the basis index of ``psi`` if it is a basis state up to phase.

    Returns None when more than one amplitude exceeds ``tol`` in modulus.
    """
    moduli = np.abs(psi.amplitudes)
    large = np.flatnonzero(moduli > tol)
    if large.size != 1:
        return None
    return int(large[0])


def apply(u: UnitaryOperator, psi: StateVector) -> StateVector:
    """Apply a unitary to a state: the matrix-vector product ``U @ psi``.

    Raises:
        ValueError: If the operator dimension does not match the state.
    """
    if u.dim != psi.dim:
        raise ValueError(f"operator dim {u.dim} does not match state dim {psi.dim}")
    return StateVector(num_qubits=psi.num_qubits, amplitudes=u.matrix @ psi.amplitudes)


def compose(u: UnitaryOperator, v: UnitaryOperator) -> UnitaryOperator:
    """Return the matrix product ``U @ V`` (apply ``V`` first, then ``U``)."""
    if u.dim != v.dim:
        raise ValueError(f"operator dims differ: {u.dim} vs {v.dim}")
    return UnitaryOperator(matrix=u.matrix @ v.matrix, label=f"{u.label}·{v.label}")


def adjoint(u: UnitaryOperator) -> UnitaryOperator:
    """Return the conjugate transpose ``U†``."""
    return UnitaryOperator(matrix=u.matrix.conj().T, label=f"{u.label}†")


def tensor(u: UnitaryOperator, v: UnitaryOperator) -> UnitaryOperator:
    """Return the 4x4 Kronecker product of two single-qubit operators."""
    if u.dim != 2 or v.dim != 2:
        raise ValueError(f"tensor expects two 2x2 operators, got dims {u.dim} and {v.dim}")
    return UnitaryOperator(matrix=np.kron(u.matrix, v.matrix), label=f"{u.label}⊗{v.label}")


def outcome_distribution(psi: StateVector) -> np.ndarray:
    """Return the Born-rule probabilities ``|amplitude[k]|**2`` as a float vector."""
    return np.abs(psi.amplitudes) ** 2


def measure(psi: StateVector, rng: np.random.Generator) -> tuple[Outcome, StateVector]:
    """Measure all qubits in the computational basis.

    Samples outcome ``k`` with probability ``|amplitude[k]|**2`` and collapses
    the state to the corresponding basis state.

    Args:
        psi: State to measure.
        rng: Seeded random generator; consumes exactly one uniform draw.

    Returns:
        The sampled `Outcome` and the collapsed `StateVector`.
    """
    probs = outcome_distribution(psi)
    draw = rng.random()
    acc = 0.0
    index = len(probs) - 1
    for k, p in enumerate(probs):
        acc += p
        if draw < acc:
            index = k
            break
    return Outcome.from_index(index, psi.num_qubits), basis_state(index, psi.num_qubits)


def measure_qubit(
    psi: StateVector, qubit: int, rng: np.random.Generator
) -> tuple[int, StateVector]:
    """Measure a single qubit of a (possibly two-qubit) state.

    The bit is sampled from the marginal Born probabilities; the returned
    state is the renormalized conditional state on the unmeasured qubits,
    with the measured qubit collapsed.

    Args:
        psi: State to measure.
        qubit: Qubit position, 0 = most significant.
        rng: Seeded random generator; consumes exactly one uniform draw.

    Returns:
        The measured bit and the collapsed, renormalized state.
    """
    if not 0 <= qubit < psi.num_qubits:
        raise ValueError(f"qubit {qubit} out of range for {psi.num_qubits} qubit(s)")
    shift = psi.num_qubits - 1 - qubit
    indices = np.arange(psi.dim)
    bit_values = (indices >> shift) & 1
    probs = outcome_distribution(psi)
    p_one = float(probs[bit_values == 1].sum())
    bit = 1 if rng.random() < p_one else 0
    keep = bit_values == bit
    collapsed = np.where(keep, psi.amplitudes, 0.0)
    norm = np.sqrt(float(np.sum(np.abs(collapsed) ** 2)))
    return bit, StateVector(num_qubits=psi.num_qubits, amplitudes=collapsed / norm)


def equal_up_to_global_phase(a: StateVector, b: StateVector, tol: float = DEFAULT_TOL) -> bool:
    """Return True iff ``a = c * b`` for some unit-modulus scalar ``c``.

    The phase is derived at the largest-modulus amplitude of ``b`` and then
    checked entrywise within ``tol``.

    Raises:
        ValueError: If the states have different dimensions.
    """
    if a.num_qubits != b.num_qubits:
        raise ValueError(f"state dims differ: {a.dim} vs {b.dim}")
    return proportional_phase(a.amplitudes, b.amplitudes, tol) is not None
