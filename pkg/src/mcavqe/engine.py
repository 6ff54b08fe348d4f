"""Dense statevector engine for small qubit registers.

Qubit ``k`` addresses bit ``k`` of the amplitude index (little-endian), so
``PauliString("XZ")`` acts with X on qubit 0 and Z on qubit 1.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigurationError, InvariantError, UsageError

MAX_QUBITS = 24
_LABELS = frozenset("IXYZ")


@dataclass(frozen=True)
class PauliString:
    axes: str

    def __post_init__(self):
        axes = "".join(self.axes).upper()
        if not axes or set(axes) - _LABELS:
            raise UsageError(f"invalid Pauli labels {self.axes!r}")
        if len(axes) > MAX_QUBITS:
            raise UsageError(f"Pauli string longer than {MAX_QUBITS} qubits")
        object.__setattr__(self, "axes", axes)

    @classmethod
    def from_sparse(cls, n_qubits: int, ops: dict[int, str]) -> "PauliString":
        """Build an n-qubit string from ``{qubit: label}``; unlisted qubits get I."""
        axes = ["I"] * n_qubits
        for q, label in ops.items():
            if not 0 <= q < n_qubits:
                raise UsageError(f"qubit {q} outside register of {n_qubits}")
            axes[q] = label
        return cls("".join(axes))

    @property
    def n_qubits(self) -> int:
        return len(self.axes)

    @property
    def x_mask(self) -> int:
        return sum(1 << k for k, a in enumerate(self.axes) if a in "XY")

    @property
    def z_mask(self) -> int:
        return sum(1 << k for k, a in enumerate(self.axes) if a in "ZY")

    @property
    def y_count(self) -> int:
        return self.axes.count("Y")

    def is_identity(self) -> bool:
        return set(self.axes) == {"I"}

    def __str__(self):
        body = " ".join(f"{a}{k}" for k, a in enumerate(self.axes) if a != "I")
        return body or "I"


@dataclass(frozen=True)
class WeightedPauliSum:
    terms: tuple[tuple[float, PauliString], ...] = ()

    def __post_init__(self):
        terms = []
        for coef, string in self.terms:
            if isinstance(coef, complex):
                if coef.imag != 0.0:
                    raise UsageError("coefficients must be real")
                coef = coef.real
            terms.append((float(coef), string))
        sizes = {s.n_qubits for _, s in terms}
        if len(sizes) > 1:
            raise UsageError(f"mixed register sizes {sorted(sizes)}")
        object.__setattr__(self, "terms", tuple(terms))

    @property
    def n_qubits(self) -> int | None:
        return self.terms[0][1].n_qubits if self.terms else None

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __add__(self, other: "WeightedPauliSum") -> "WeightedPauliSum":
        return WeightedPauliSum(self.terms + other.terms)


@dataclass
class StateVector:
    amplitudes: np.ndarray
    qubit_count: int = field(default=0)

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        n = self.amplitudes.size.bit_length() - 1
        if self.amplitudes.ndim != 1 or self.amplitudes.size != 1 << n:
            raise UsageError("amplitude vector length must be a power of two")
        if self.qubit_count and self.qubit_count != n:
            raise UsageError(f"{self.amplitudes.size} amplitudes do not match {self.qubit_count} qubits")
        self.qubit_count = n

    def norm_squared(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def copy(self) -> "StateVector":
        return StateVector(self.amplitudes.copy(), self.qubit_count)


def init_state(qubit_count: int) -> StateVector:
    if not isinstance(qubit_count, (int, np.integer)) or not 1 <= qubit_count <= MAX_QUBITS:
        raise ConfigurationError(f"qubit_count must be in [1, {MAX_QUBITS}], got {qubit_count!r}")
    amps = np.zeros(1 << int(qubit_count), dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(amps, int(qubit_count))


def _apply_1q(state: StateVector, qubit: int, matrix: np.ndarray) -> StateVector:
    if not 0 <= qubit < state.qubit_count:
        raise UsageError(f"qubit {qubit} outside register of {state.qubit_count}")
    view = state.amplitudes.reshape(-1, 2, 1 << qubit)
    lo = view[:, 0, :].copy()
    hi = view[:, 1, :]
    view[:, 0, :] = matrix[0, 0] * lo + matrix[0, 1] * hi
    view[:, 1, :] = matrix[1, 0] * lo + matrix[1, 1] * hi
    return state


def apply_ry(state: StateVector, qubit: int, theta: float) -> StateVector:
    """Apply exp(-i theta Y / 2) to ``qubit`` in place."""
    if not np.isfinite(theta):
        raise UsageError(f"non-finite rotation angle {theta!r}")
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return _apply_1q(state, qubit, np.array([[c, -s], [s, c]]))


def apply_rz(state: StateVector, qubit: int, phi: float) -> StateVector:
    """Apply exp(-i phi Z / 2) to ``qubit`` in place."""
    if not np.isfinite(phi):
        raise UsageError(f"non-finite rotation angle {phi!r}")
    p = np.exp(-0.5j * phi)
    return _apply_1q(state, qubit, np.array([[p, 0.0], [0.0, p.conjugate()]]))


@lru_cache(maxsize=512)
def _pauli_action(n: int, x_mask: int, z_mask: int) -> tuple[np.ndarray, np.ndarray]:
    idx = np.arange(1 << n, dtype=np.int64)
    src = idx ^ x_mask
    sign = 1.0 - 2.0 * (np.bitwise_count(src & z_mask) & 1)
    src.flags.writeable = False
    sign.flags.writeable = False
    return src, sign


def pauli_expectation(state: StateVector, string: PauliString) -> float:
    """<state|P|state> for a single Pauli string, without building a matrix."""
    if string.n_qubits != state.qubit_count:
        raise UsageError(
            f"Pauli string on {string.n_qubits} qubits, state has {state.qubit_count}"
        )
    if string.is_identity():
        return state.norm_squared()
    psi = state.amplitudes
    src, sign = _pauli_action(state.qubit_count, string.x_mask, string.z_mask)
    value = (1j ** (string.y_count % 4)) * np.vdot(psi, sign * psi[src])
    if abs(value.imag) > 1e-12:
        raise InvariantError(f"Pauli expectation has imaginary part {value.imag:.3e}")
    return float(value.real)


def _check_normalized(state: StateVector) -> None:
    dev = abs(state.norm_squared() - 1.0)
    if dev > 1e-9:
        raise InvariantError(f"state norm deviates from 1 by {dev:.3e}")


def _check_sizes(state: StateVector, op: WeightedPauliSum) -> None:
    if op.n_qubits is not None and op.n_qubits != state.qubit_count:
        raise UsageError(f"operator on {op.n_qubits} qubits, state has {state.qubit_count}")


def expectation(state: StateVector, op: WeightedPauliSum) -> float:
    _check_sizes(state, op)
    _check_normalized(state)
    return float(sum(c * pauli_expectation(state, p) for c, p in op))


def sample_expectation(state: StateVector, op: WeightedPauliSum, shots: int, seed: int) -> float:
    """Shot-based estimate: each term is measured independently ``shots`` times.

    Outcomes of a Pauli measurement are +-1 with probabilities (1 +- <P>)/2;
    terms are drawn in operator order from one seeded generator.
    """
    if int(shots) < 1:
        raise UsageError(f"shots must be >= 1, got {shots}")
    _check_sizes(state, op)
    _check_normalized(state)
    rng = np.random.default_rng(seed)
    total = 0.0
    for coef, string in op:
        p_plus = min(1.0, max(0.0, 0.5 * (1.0 + pauli_expectation(state, string))))
        hits = rng.binomial(int(shots), p_plus)
        total += coef * (2.0 * hits / shots - 1.0)
    return total


def shot_sigma(state: StateVector, op: WeightedPauliSum, shots: int) -> float:
    """Analytic standard error of ``sample_expectation`` for the same inputs."""
    var = sum(c * c * max(0.0, 1.0 - pauli_expectation(state, p) ** 2) for c, p in op)
    return float(np.sqrt(var / shots))


def pauli_matrix(string: PauliString) -> np.ndarray:
    """Dense 2^n x 2^n matrix of a Pauli string (little-endian qubit order)."""
    single = {
        "I": np.eye(2, dtype=complex),
        "X": np.array([[0, 1], [1, 0]], dtype=complex),
        "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
        "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    }
    out = np.ones((1, 1), dtype=complex)
    # kron puts its first factor on the most significant bit
    for label in reversed(string.axes):
        out = np.kron(out, single[label])
    return out


def product_state(angles: Sequence[tuple[float, float]] | Iterable) -> StateVector:
    """RY(theta_k) then RZ(phi_k) on each qubit k of |0...0>."""
    angles = list(angles)
    state = init_state(len(angles))
    for k, (theta, phi) in enumerate(angles):
        apply_ry(state, k, theta)
        apply_rz(state, k, phi)
    return state
