"""Exact statevector simulation of Ry/CZ circuits with seeded finite-shot sampling.

Bit ordering convention, used everywhere in this package: qubit 0 is the most
significant bit of a basis-state index, so the 4-qubit index 0b1010 means
qubit 0 = 1, qubit 1 = 0, qubit 2 = 1, qubit 3 = 0 and prints as "1010".
"""

from __future__ import annotations

from dataclasses import dataclass
from math import cos, sin

import numpy as np

# Register width ceiling; amplitudes are dense, so memory is 2^N complex.
MAX_QUBITS = 20

_NORM_TOL = 1e-10
_DIST_TOL = 1e-9


def _check_n_qubits(n_qubits: int) -> None:
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise ValueError(f"n_qubits must be in [1, {MAX_QUBITS}], got {n_qubits}")


@dataclass(frozen=True, order=True)
class BitString:
    """An N-bit measurement outcome; qubit 0 is the leftmost character."""

    width: int
    value: int

    def __post_init__(self) -> None:
        if self.width < 1:
            raise ValueError(f"width must be >= 1, got {self.width}")
        if not 0 <= self.value < 2**self.width:
            raise ValueError(f"value {self.value} out of range for width {self.width}")

    @classmethod
    def parse(cls, text: str) -> "BitString":
        """Parse a string like "1010" (leftmost bit = qubit 0)."""
        if not text or set(text) - {"0", "1"}:
            raise ValueError(f"not a bitstring: {text!r}")
        return cls(len(text), int(text, 2))

    def format(self) -> str:
        return format(self.value, f"0{self.width}b")

    def bit(self, qubit: int) -> int:
        """Bit of the given qubit (qubit 0 = most significant)."""
        if not 0 <= qubit < self.width:
            raise ValueError(f"qubit {qubit} out of range for width {self.width}")
        return (self.value >> (self.width - 1 - qubit)) & 1

    def __str__(self) -> str:
        return self.format()


@dataclass(frozen=True)
class StateVector:
    """Normalized register state: 2^N complex amplitudes."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        _check_n_qubits(self.n_qubits)
        amp = np.asarray(self.amplitudes, dtype=complex)
        if amp.shape != (2**self.n_qubits,):
            raise ValueError(
                f"expected {2**self.n_qubits} amplitudes, got shape {amp.shape}"
            )
        norm = float(np.sum(np.abs(amp) ** 2))
        if abs(norm - 1.0) > _NORM_TOL:
            raise ValueError(f"state not normalized: sum |amp|^2 = {norm!r}")
        object.__setattr__(self, "amplitudes", amp)


@dataclass(frozen=True)
class Distribution:
    """Probabilities over all 2^N basis states; sums to 1."""

    n_qubits: int
    probs: np.ndarray

    def __post_init__(self) -> None:
        _check_n_qubits(self.n_qubits)
        p = np.asarray(self.probs, dtype=float)
        if p.shape != (2**self.n_qubits,):
            raise ValueError(f"expected {2**self.n_qubits} probabilities, got shape {p.shape}")
        if np.any(p < 0):
            raise ValueError("probabilities must be non-negative")
        total = float(p.sum())
        if abs(total - 1.0) > _DIST_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        object.__setattr__(self, "probs", p)

    @classmethod
    def delta(cls, n_qubits: int, index: int) -> "Distribution":
        p = np.zeros(2**n_qubits)
        p[index] = 1.0
        return cls(n_qubits, p)


@dataclass(frozen=True)
class Histogram:
    """Integer shot counts over all 2^N basis states."""

    n_qubits: int
    counts: np.ndarray
    shots: int

    def __post_init__(self) -> None:
        _check_n_qubits(self.n_qubits)
        c = np.asarray(self.counts, dtype=np.int64)
        if c.shape != (2**self.n_qubits,):
            raise ValueError(f"expected {2**self.n_qubits} counts, got shape {c.shape}")
        if np.any(c < 0):
            raise ValueError("counts must be non-negative")
        if int(c.sum()) != self.shots:
            raise ValueError(f"counts sum to {int(c.sum())}, declared shots {self.shots}")
        object.__setattr__(self, "counts", c)


def zero_state(n_qubits: int) -> StateVector:
    """The all-zeros computational basis state |0...0>."""
    amp = np.zeros(2**n_qubits, dtype=complex)
    amp[0] = 1.0
    return StateVector(n_qubits, amp)


def apply_ry(state: StateVector, qubit: int, theta: float) -> StateVector:
    """Rotate one qubit around the y axis by theta.

    The 2x2 action on the (bit=0, bit=1) amplitude pair is
    [[cos(t/2), -sin(t/2)], [sin(t/2), cos(t/2)]].
    """
    n = state.n_qubits
    if not 0 <= qubit < n:
        raise ValueError(f"qubit {qubit} out of range for {n}-qubit state")
    if not np.isfinite(theta):
        raise ValueError(f"theta must be finite, got {theta!r}")
    c, s = cos(theta / 2.0), sin(theta / 2.0)
    amp = state.amplitudes.reshape([2] * n)
    a0 = amp.take(0, axis=qubit)
    a1 = amp.take(1, axis=qubit)
    out = np.stack([c * a0 - s * a1, s * a0 + c * a1], axis=qubit)
    return StateVector(n, out.reshape(-1))


def apply_cz(state: StateVector, qa: int, qb: int) -> StateVector:
    """Controlled-Z: negate amplitudes of basis states with both bits set."""
    n = state.n_qubits
    for q in (qa, qb):
        if not 0 <= q < n:
            raise ValueError(f"qubit {q} out of range for {n}-qubit state")
    if qa == qb:
        raise ValueError(f"cz needs two distinct qubits, got {qa} twice")
    amp = state.amplitudes.reshape([2] * n).copy()
    sel: list[object] = [slice(None)] * n
    sel[qa] = 1
    sel[qb] = 1
    amp[tuple(sel)] *= -1
    return StateVector(n, amp.reshape(-1))


def probabilities(state: StateVector) -> Distribution:
    """Born-rule outcome probabilities |amp|^2."""
    return Distribution(state.n_qubits, np.abs(state.amplitudes) ** 2)


def sample(dist: Distribution, shots: int, rng: np.random.Generator) -> Histogram:
    """Draw `shots` i.i.d. basis-state outcomes via inverse-CDF search.

    Deterministic for a fixed generator state.
    """
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    cdf = np.cumsum(dist.probs)
    cdf[-1] = 1.0  # guard against rounding in the last bin
    outcomes = np.searchsorted(cdf, rng.random(shots), side="right")
    counts = np.bincount(outcomes, minlength=len(dist.probs))
    return Histogram(dist.n_qubits, counts, shots)
