"""Synthetic readout-assignment noise, its calibration, and linear correction.

The channel flips each read bit independently: p10 = p(read 1 | true 0),
p01 = p(read 0 | true 1) per qubit.  Calibration prepares every basis state,
pushes shots through the channel and tallies columns of the transition
matrix M with p(y|x) in column x; correction solves M P_x = P_y back.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .sim import Distribution, Histogram, _check_n_qubits

DEFAULT_CALIBRATION_SHOTS = 10_000
DEFAULT_MAX_CONDITION = 1e8


@dataclass(frozen=True)
class PerQubitFlipModel:
    """Independent asymmetric bit-flip probabilities, one pair per qubit."""

    p10: tuple[float, ...]
    p01: tuple[float, ...]

    def __post_init__(self) -> None:
        p10 = tuple(float(p) for p in self.p10)
        p01 = tuple(float(p) for p in self.p01)
        if len(p10) != len(p01) or not p10:
            raise ValueError("p10 and p01 must be equal-length, non-empty")
        _check_n_qubits(len(p10))
        for name, probs in (("p10", p10), ("p01", p01)):
            for p in probs:
                if not 0.0 <= p < 0.5:
                    raise ValueError(f"{name} entries must lie in [0, 0.5), got {p}")
        object.__setattr__(self, "p10", p10)
        object.__setattr__(self, "p01", p01)

    @classmethod
    def uniform(cls, n_qubits: int, p10: float, p01: float | None = None) -> "PerQubitFlipModel":
        """Same flip pair on every qubit; symmetric if p01 is omitted."""
        if p01 is None:
            p01 = p10
        return cls((p10,) * n_qubits, (p01,) * n_qubits)

    @property
    def n_qubits(self) -> int:
        return len(self.p10)


@dataclass(frozen=True)
class ConfusionMatrix:
    """Column-stochastic transition matrix: entry (y, x) = p(read y | true x)."""

    n_qubits: int
    entries: np.ndarray

    def __post_init__(self) -> None:
        _check_n_qubits(self.n_qubits)
        m = np.asarray(self.entries, dtype=float)
        dim = 2**self.n_qubits
        if m.shape != (dim, dim):
            raise ValueError(f"expected {dim}x{dim} matrix, got shape {m.shape}")
        if np.any(m < 0):
            raise ValueError("entries must be non-negative")
        colsums = m.sum(axis=0)
        if np.any(np.abs(colsums - 1.0) > 1e-9):
            worst = float(np.max(np.abs(colsums - 1.0)))
            raise ValueError(f"columns must sum to 1 (worst deviation {worst:.3e})")
        object.__setattr__(self, "entries", m)

    def to_json(self) -> str:
        return json.dumps(
            {"n_qubits": self.n_qubits, "entries": self.entries.reshape(-1).tolist()}
        )

    @classmethod
    def from_json(cls, text: str) -> "ConfusionMatrix":
        doc = json.loads(text)
        n = int(doc["n_qubits"])
        dim = 2**n
        return cls(n, np.asarray(doc["entries"], dtype=float).reshape(dim, dim))


def synth_confusion(model: PerQubitFlipModel) -> ConfusionMatrix:
    """Exact channel matrix: Kronecker product of the per-qubit 2x2 blocks."""
    blocks = [
        np.array([[1.0 - p10, p01], [p10, 1.0 - p01]])
        for p10, p01 in zip(model.p10, model.p01)
    ]
    return ConfusionMatrix(model.n_qubits, reduce(np.kron, blocks))


def apply_channel_exact(p: Distribution, m: ConfusionMatrix) -> Distribution:
    """Push exact probabilities through the channel: P_y = M P_x."""
    if p.n_qubits != m.n_qubits:
        raise ValueError(f"width mismatch: {p.n_qubits} vs {m.n_qubits} qubits")
    return Distribution(p.n_qubits, m.entries @ p.probs)


def apply_channel_sampled(
    h: Histogram, model: PerQubitFlipModel, rng: np.random.Generator
) -> Histogram:
    """Corrupt a histogram shot by shot, flipping each bit independently."""
    n = h.n_qubits
    if n != model.n_qubits:
        raise ValueError(f"width mismatch: {n} vs {model.n_qubits} qubits")
    p10 = np.array(model.p10)
    p01 = np.array(model.p01)
    out = np.zeros_like(h.counts)
    for x in range(2**n):
        c = int(h.counts[x])
        if c == 0:
            continue
        bits = np.array([(x >> (n - 1 - q)) & 1 for q in range(n)])
        flip_prob = np.where(bits == 0, p10, p01)
        flips = rng.random((c, n)) < flip_prob
        read = bits[None, :] ^ flips
        y = read @ (1 << np.arange(n - 1, -1, -1))
        out += np.bincount(y, minlength=2**n)
    return Histogram(n, out, h.shots)


def calibrate(
    model: PerQubitFlipModel,
    shots_per_basis_state: int = DEFAULT_CALIBRATION_SHOTS,
    rng: np.random.Generator | None = None,
) -> ConfusionMatrix:
    """Estimate the channel matrix from one preparation experiment per basis state."""
    if shots_per_basis_state < 1:
        raise ValueError(f"shots must be >= 1, got {shots_per_basis_state}")
    if rng is None:
        rng = np.random.default_rng()
    n = model.n_qubits
    dim = 2**n
    cols = np.empty((dim, dim))
    for x in range(dim):
        prepared = np.zeros(dim, dtype=np.int64)
        prepared[x] = shots_per_basis_state
        read = apply_channel_sampled(Histogram(n, prepared, shots_per_basis_state), model, rng)
        cols[:, x] = read.counts / shots_per_basis_state
    return ConfusionMatrix(n, cols)


def correct_raw(observed: Distribution, m: ConfusionMatrix) -> np.ndarray:
    """Solve M P_x = P_y without cleanup; entries may be negative."""
    if observed.n_qubits != m.n_qubits:
        raise ValueError(f"width mismatch: {observed.n_qubits} vs {m.n_qubits} qubits")
    cond = float(np.linalg.cond(m.entries))
    if not np.isfinite(cond) or cond > DEFAULT_MAX_CONDITION:
        raise ValueError(
            f"confusion matrix too ill-conditioned to invert (cond ~ {cond:.3e})"
        )
    return np.linalg.solve(m.entries, observed.probs)


def correct(observed: Distribution, m: ConfusionMatrix) -> Distribution:
    """Invert the channel, clamp negative probabilities to 0, renormalize."""
    raw = correct_raw(observed, m)
    clamped = np.maximum(raw, 0.0)
    total = clamped.sum()
    if total <= 0:
        raise ValueError("corrected distribution has no positive mass")
    return Distribution(observed.n_qubits, clamped / total)
