"""Dense state-vector engine for registers of at most four labelled qubits.

Ordering convention: amplitudes are stored most-significant-bit first, and the
first label owns the most significant bit.  For labels ``("1", "2")`` the
vector is ``[<00|psi>, <01|psi>, <10|psi>, <11|psi>]`` with the left digit
belonging to qubit ``"1"``.

All values are immutable.  Operations return new states.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    ArityMismatch,
    CapacityExceeded,
    DegenerateState,
    DimensionMismatch,
    LabelCollision,
    NonUnitaryError,
    NormalizationError,
    UnknownLabel,
)

MAX_QUBITS = 4
ATOL = 1e-10
# Branches below this probability are dropped: their residual cannot be renormalised.
PROB_FLOOR = 1e-12

SQRT1_2 = 1 / math.sqrt(2)


class Basis(Enum):
    COMPUTATIONAL = "computational"
    PLUS_MINUS = "plus_minus"


class Outcome(Enum):
    """Measurement outcome labels.

    Plus pairs with Zero and Minus with One, because a PlusMinus measurement
    is a Computational measurement conjugated by Hadamard.
    """

    ZERO = "0"
    ONE = "1"
    PLUS = "+"
    MINUS = "-"

    @property
    def bit(self) -> int:
        return 0 if self in (Outcome.ZERO, Outcome.PLUS) else 1

    @property
    def basis(self) -> Basis:
        if self in (Outcome.ZERO, Outcome.ONE):
            return Basis.COMPUTATIONAL
        return Basis.PLUS_MINUS

    @classmethod
    def of(cls, basis: Basis, bit: int) -> "Outcome":
        if basis is Basis.COMPUTATIONAL:
            return cls.ONE if bit else cls.ZERO
        return cls.MINUS if bit else cls.PLUS


@dataclass(frozen=True)
class UnknownQubit:
    """The payload state ``alpha|0> + beta|1>``."""

    alpha: complex
    beta: complex

    def __post_init__(self):
        a, b = complex(self.alpha), complex(self.beta)
        if not all(math.isfinite(x) for x in (a.real, a.imag, b.real, b.imag)):
            raise NormalizationError("amplitudes must be finite")
        norm2 = abs(a) ** 2 + abs(b) ** 2
        if abs(norm2 - 1.0) > ATOL:
            raise NormalizationError(f"|alpha|^2 + |beta|^2 = {norm2!r}, expected 1")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)

    def as_state(self, label: str = "1") -> "PureState":
        return PureState([self.alpha, self.beta], (label,))


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalised amplitude vector over labelled qubits.

    A zero-qubit state (a single unit amplitude) is allowed so that measuring
    the last qubit of a register still yields a well-formed residual.
    """

    amplitudes: np.ndarray
    labels: tuple[str, ...]

    def __post_init__(self):
        labels = tuple(str(x) for x in self.labels)
        amps = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        n = len(labels)
        if n > MAX_QUBITS:
            raise CapacityExceeded(f"{n} qubits exceeds the limit of {MAX_QUBITS}")
        if len(set(labels)) != n:
            raise LabelCollision(f"duplicate labels in {labels}")
        if amps.shape[0] != 2**n:
            raise ValueError(f"{n} labels need {2**n} amplitudes, got {amps.shape[0]}")
        if not np.isfinite(amps).all():
            raise NormalizationError("amplitudes must be finite")
        norm = math.sqrt(float(np.vdot(amps, amps).real))
        if abs(norm - 1.0) > ATOL:
            raise NormalizationError(f"state norm is {norm!r}, expected 1")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "labels", labels)

    @property
    def num_qubits(self) -> int:
        return len(self.labels)

    def index_of(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise UnknownLabel(f"no qubit labelled {label!r} in {self.labels}") from None

    def amplitude(self, bits: str) -> complex:
        """Amplitude of the basis ket written as a bit string in label order."""
        return complex(self.amplitudes[int(bits, 2) if bits else 0])

    def relabel(self, labels: Sequence[str]) -> "PureState":
        return PureState(self.amplitudes, tuple(labels))

    def allclose(self, other: "PureState", atol: float = ATOL) -> bool:
        """Elementwise equality (not up to global phase)."""
        return self.labels == other.labels and bool(
            np.allclose(self.amplitudes, other.amplitudes, rtol=0.0, atol=atol)
        )

    def render(self) -> str:
        return render(self)

    def __repr__(self) -> str:
        return f"PureState({render(self)})"


def _clean(x: float) -> float:
    # Round away float noise and negative zero so goldens are stable.
    return round(x, 12) + 0.0


def render(state: PureState) -> str:
    """Debug text: ``[labels] amp|bits> amp|bits> ...`` with 12 significant digits.

    Kets whose amplitude rounds to zero are omitted.
    """
    n = state.num_qubits
    terms = []
    for idx, z in enumerate(state.amplitudes):
        re, im = _clean(z.real), _clean(z.imag)
        if re == 0.0 and im == 0.0:
            continue
        bits = format(idx, f"0{n}b") if n else ""
        terms.append(f"({re:+.12g}{im:+.12g}j)|{bits}>")
    return f"[{','.join(state.labels)}] " + " ".join(terms)


def ket(bits: str, labels: Sequence[str] | None = None) -> PureState:
    """Computational basis state, e.g. ``ket("01", ("A", "B"))``."""
    if labels is None:
        labels = tuple(str(i + 1) for i in range(len(bits)))
    amps = np.zeros(2 ** len(bits), dtype=np.complex128)
    amps[int(bits, 2) if bits else 0] = 1.0
    return PureState(amps, tuple(labels))


@lru_cache(maxsize=256)
def basis_ket(outcome: Outcome, label: str) -> PureState:
    """Single-qubit eigenstate for a measurement outcome."""
    vec = {
        Outcome.ZERO: (1.0, 0.0),
        Outcome.ONE: (0.0, 1.0),
        Outcome.PLUS: (SQRT1_2, SQRT1_2),
        Outcome.MINUS: (SQRT1_2, -SQRT1_2),
    }[outcome]
    return PureState(vec, (label,))


class GateKind(Enum):
    IDENTITY = "I"
    PAULI_X = "X"
    PAULI_Z = "Z"
    HADAMARD = "H"
    CNOT = "CNOT"
    CUSTOM = "U"


@dataclass(frozen=True, eq=False)
class Gate:
    kind: GateKind
    matrix: np.ndarray = field(repr=False)
    name: str = ""

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.complex128)
        d = 4 if self.kind is GateKind.CNOT else 2
        if m.shape != (d, d):
            raise ArityMismatch(f"{self.kind.name} needs a {d}x{d} matrix, got {m.shape}")
        err = np.max(np.abs(m.conj().T @ m - np.eye(d)))
        if err >= ATOL:
            raise NonUnitaryError(f"matrix is not unitary (max |U^dag U - I| = {err:.3g})")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        if not self.name:
            object.__setattr__(self, "name", self.kind.value)

    @property
    def arity(self) -> int:
        return 2 if self.kind is GateKind.CNOT else 1

    @classmethod
    def custom(cls, matrix, name: str = "U") -> "Gate":
        return cls(GateKind.CUSTOM, matrix, name)

    def __eq__(self, other):
        if not isinstance(other, Gate):
            return NotImplemented
        return self.kind is other.kind and np.array_equal(self.matrix, other.matrix)

    def __hash__(self):
        return hash((self.kind, self.matrix.tobytes()))


I = Gate(GateKind.IDENTITY, np.eye(2))
X = Gate(GateKind.PAULI_X, [[0, 1], [1, 0]])
Z = Gate(GateKind.PAULI_Z, [[1, 0], [0, -1]])
H = Gate(GateKind.HADAMARD, np.array([[1, 1], [1, -1]]) * SQRT1_2)
CNOT = Gate(
    GateKind.CNOT,
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]],
)

STANDARD_GATES = {g.name: g for g in (I, X, Z, H, CNOT)}


def tensor(a: PureState, b: PureState) -> PureState:
    """Joint state ``a (x) b``; labels are ``a.labels + b.labels``."""
    if set(a.labels) & set(b.labels):
        raise LabelCollision(f"labels {a.labels} and {b.labels} overlap")
    if a.num_qubits + b.num_qubits > MAX_QUBITS:
        raise CapacityExceeded(
            f"{a.num_qubits} + {b.num_qubits} qubits exceeds the limit of {MAX_QUBITS}"
        )
    return PureState(np.outer(a.amplitudes, b.amplitudes).reshape(-1), a.labels + b.labels)


def _apply_matrix(psi: np.ndarray, matrix: np.ndarray, axes: list[int]) -> np.ndarray:
    """Contract a k-qubit operator into the given axes of a (2,)*n tensor."""
    k = len(axes)
    op = matrix.reshape((2,) * (2 * k))
    out = np.tensordot(op, psi, axes=(list(range(k, 2 * k)), axes))
    return np.moveaxis(out, list(range(k)), axes)


def apply_gate(s: PureState, g: Gate, targets: str | Iterable[str]) -> PureState:
    """Apply ``g`` to ``targets``; a Cnot takes ``(control, target)``."""
    targets = (targets,) if isinstance(targets, str) else tuple(targets)
    if len(targets) != g.arity:
        raise ArityMismatch(f"{g.name} acts on {g.arity} qubit(s), got {len(targets)}")
    if len(set(targets)) != len(targets):
        raise ArityMismatch(f"control and target must differ, got {targets}")
    axes = [s.index_of(t) for t in targets]
    psi = s.amplitudes.reshape((2,) * s.num_qubits)
    out = _apply_matrix(psi, g.matrix, axes)
    return PureState(out.reshape(-1), s.labels)


@dataclass(frozen=True)
class MeasurementBranch:
    outcome: Outcome
    probability: float
    residual: PureState


def branch_decomposition(s: PureState, q: str, basis: Basis) -> list[MeasurementBranch]:
    """Every outcome of measuring ``q`` in ``basis``, with exact probabilities.

    Branches come in fixed order (Zero/Plus first).  Outcomes with probability
    below ``PROB_FLOOR`` are left out, so an eigenstate yields a single branch.
    The measured qubit is removed from each residual.
    """
    axis = s.index_of(q)
    psi = s.amplitudes.reshape((2,) * s.num_qubits)
    rest = s.labels[:axis] + s.labels[axis + 1:]
    v0, v1 = (np.take(psi, bit, axis=axis).reshape(-1) for bit in (0, 1))
    if basis is Basis.PLUS_MINUS:
        # <+|q psi> and <-|q psi>, i.e. Hadamard on q followed by a Z projection.
        v0, v1 = (v0 + v1) * SQRT1_2, (v0 - v1) * SQRT1_2
    slices = (v0, v1)
    masses = [float(np.vdot(v, v).real) for v in slices]
    total = masses[0] + masses[1]
    if total < PROB_FLOOR:
        raise DegenerateState(f"no probability mass when measuring {q!r}")
    branches = []
    for bit, (v, m) in enumerate(zip(slices, masses)):
        p = m / total
        if p < PROB_FLOOR:
            continue
        branches.append(
            MeasurementBranch(Outcome.of(basis, bit), p, PureState(v / math.sqrt(m), rest))
        )
    return branches


def measure(
    s: PureState,
    q: str,
    basis: Basis,
    rng: np.random.Generator | None,
    force: Outcome | None = None,
) -> tuple[MeasurementBranch, PureState]:
    """Sample one branch of measuring ``q``; returns the branch and collapsed state.

    Sampling consumes exactly one ``rng.random()`` draw.  Passing ``force``
    selects that outcome instead and consumes nothing, which lets tests walk
    every branch of a protocol deterministically.
    """
    branches = branch_decomposition(s, q, basis)
    if force is not None:
        if force.basis is not basis:
            raise ValueError(f"outcome {force} does not belong to basis {basis}")
        for b in branches:
            if b.outcome is force:
                return b, b.residual
        raise DegenerateState(f"forced outcome {force.value} has zero probability")
    u = rng.random()
    acc = 0.0
    for b in branches:
        acc += b.probability
        if u < acc:
            return b, b.residual
    return branches[-1], branches[-1].residual


def collapse(
    s: PureState,
    q: str,
    basis: Basis,
    rng: np.random.Generator | None,
    force: Outcome | None = None,
) -> tuple[Outcome, PureState]:
    """Measure ``q`` but keep it in the register, in the observed eigenstate."""
    branch, residual = measure(s, q, basis, rng, force)
    joint = tensor(residual, basis_ket(branch.outcome, q))
    return branch.outcome, reorder(joint, s.labels)


def reorder(s: PureState, labels: Sequence[str]) -> PureState:
    """Permute qubits so that they appear in ``labels`` order."""
    labels = tuple(labels)
    if sorted(labels) != sorted(s.labels):
        raise UnknownLabel(f"cannot reorder {s.labels} as {labels}")
    if labels == s.labels:
        return s
    perm = [s.index_of(x) for x in labels]
    psi = s.amplitudes.reshape((2,) * s.num_qubits).transpose(perm)
    return PureState(psi.reshape(-1), labels)


def fidelity(a: PureState, b: PureState) -> float:
    """``|<a|b>|^2``; labels are ignored, qubit counts must agree."""
    if a.num_qubits != b.num_qubits:
        raise DimensionMismatch(f"{a.num_qubits} vs {b.num_qubits} qubits")
    return abs(complex(np.vdot(a.amplitudes, b.amplitudes))) ** 2


def random_unknown_qubit(rng: np.random.Generator) -> UnknownQubit:
    """Haar-random qubit: cos(theta) uniform on [-1, 1], phase uniform on [0, 2pi)."""
    cos_theta = rng.uniform(-1.0, 1.0)
    phi = rng.uniform(0.0, 2 * math.pi)
    alpha = math.sqrt((1.0 + cos_theta) / 2)
    beta = complex(math.cos(phi), math.sin(phi)) * math.sqrt((1.0 - cos_theta) / 2)
    norm = math.sqrt(alpha**2 + abs(beta) ** 2)
    return UnknownQubit(alpha / norm, beta / norm)
