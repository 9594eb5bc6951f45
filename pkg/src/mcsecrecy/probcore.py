"""Finite probability mass functions and the information measures built on them.

All quantities are in bits. Sums go through ``numpy.sum``, which uses pairwise
accumulation on contiguous float arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

TOTAL_TOL = 1e-9


class PmfError(ValueError):
    """Raised for invalid probability vectors or matrices."""


class InfiniteDivergenceError(PmfError):
    """Raised when a divergence is infinite (support mismatch)."""


def _normalized(arr: np.ndarray) -> np.ndarray:
    if arr.size == 0:
        raise PmfError("empty probability array")
    if not np.all(np.isfinite(arr)):
        raise PmfError("non-finite probability entry")
    if np.any(arr < 0):
        raise PmfError(f"negative probability entry {arr.min()!r}")
    total = float(np.sum(arr))
    if abs(total - 1.0) > TOTAL_TOL:
        raise PmfError(f"probabilities sum to {total!r}, not 1")
    if total != 1.0:
        arr = arr / total
    return arr


@dataclass(frozen=True, eq=False)
class Pmf:
    """Probability mass function over outcome indices ``0..size-1``."""

    probs: np.ndarray

    def __post_init__(self):
        arr = np.array(self.probs, dtype=np.float64).ravel()
        arr = _normalized(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "probs", arr)

    @classmethod
    def uniform(cls, size: int) -> Pmf:
        if size < 1:
            raise PmfError("uniform pmf needs at least one outcome")
        return cls(np.full(size, 1.0 / size))

    @classmethod
    def point_mass(cls, size: int, index: int) -> Pmf:
        arr = np.zeros(size)
        arr[index] = 1.0
        return cls(arr)

    @property
    def size(self) -> int:
        return int(self.probs.size)

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.probs > 0)

    def __len__(self):
        return self.size

    def __eq__(self, other):
        if not isinstance(other, Pmf):
            return NotImplemented
        return self.probs.shape == other.probs.shape and bool(np.array_equal(self.probs, other.probs))

    def __hash__(self):
        return hash(self.probs.tobytes())


@dataclass(frozen=True, eq=False)
class JointPmf:
    """Joint pmf of two variables; rows index the first, columns the second."""

    probs: np.ndarray
    row_marginal: Pmf = field(init=False)
    col_marginal: Pmf = field(init=False)

    def __post_init__(self):
        arr = np.array(self.probs, dtype=np.float64)
        if arr.ndim != 2:
            raise PmfError(f"joint pmf must be 2-D, got shape {arr.shape}")
        arr = _normalized(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "probs", arr)
        # Marginals are renormalized by Pmf only if they drift past the total
        # tolerance, which cannot happen for a normalized matrix.
        object.__setattr__(self, "row_marginal", Pmf(arr.sum(axis=1)))
        object.__setattr__(self, "col_marginal", Pmf(arr.sum(axis=0)))

    @classmethod
    def product(cls, p: Pmf, q: Pmf) -> JointPmf:
        return cls(np.outer(p.probs, q.probs))

    @classmethod
    def identity_coupling(cls, p: Pmf) -> JointPmf:
        return cls(np.diag(p.probs))

    @property
    def shape(self) -> tuple[int, int]:
        return self.probs.shape

    def transpose(self) -> JointPmf:
        return JointPmf(self.probs.T)

    def __eq__(self, other):
        if not isinstance(other, JointPmf):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.probs, other.probs))

    def __hash__(self):
        return hash(self.probs.tobytes())


def _as_pmf(p) -> Pmf:
    return p if isinstance(p, Pmf) else Pmf(p)


def renyi_entropy2(p: Pmf) -> float:
    """Collision (order-2 Renyi) entropy ``-log2 sum p^2``."""
    p = _as_pmf(p)
    return -math.log2(float(np.sum(p.probs**2)))


def shannon_entropy(p: Pmf) -> float:
    p = _as_pmf(p)
    nz = p.probs[p.probs > 0]
    return float(-np.sum(nz * np.log2(nz)))


def chi_square(p: Pmf, q: Pmf) -> float:
    """Chi-squared divergence ``sum p^2/q - 1``.

    Raises
    ------
    InfiniteDivergenceError
        If ``p`` puts mass where ``q`` has none.
    """
    p, q = _as_pmf(p), _as_pmf(q)
    if p.size != q.size:
        raise PmfError(f"pmf sizes differ: {p.size} vs {q.size}")
    bad = (q.probs == 0) & (p.probs > 0)
    if np.any(bad):
        raise InfiniteDivergenceError(
            f"p has mass at outcome {int(np.flatnonzero(bad)[0])} where q is zero"
        )
    mask = p.probs > 0
    val = float(np.sum(p.probs[mask] ** 2 / q.probs[mask])) - 1.0
    return max(val, 0.0)


def mutual_information(j: JointPmf) -> float:
    """Mutual information between the row and column variables, in bits."""
    P = j.probs
    prod = np.outer(j.row_marginal.probs, j.col_marginal.probs)
    mask = P > 0
    val = float(np.sum(P[mask] * np.log2(P[mask] / prod[mask])))
    return max(val, 0.0)


def conditional_pmf(j: JointPmf, column: int) -> Pmf:
    """Distribution of the row variable given the column variable equals ``column``."""
    weight = j.col_marginal.probs[column]
    if weight <= 0:
        raise PmfError(f"column {column} has zero probability")
    return Pmf(j.probs[:, column] / weight)


def read_pmf(path: str | Path) -> Pmf:
    """Read the one-probability-per-line text format (``#`` starts a comment)."""
    values = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            values.append(float(line))
        except ValueError:
            raise PmfError(f"{path}:{lineno}: not a number: {line!r}") from None
    return Pmf(values)


def write_pmf(p: Pmf, path: str | Path) -> None:
    Path(path).write_text("".join(f"{float(x)!r}\n" for x in p.probs), encoding="utf-8")
