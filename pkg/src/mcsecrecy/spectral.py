"""Maximal correlation through the spectral norm of the standardized joint matrix.

For a joint pmf ``p(x, y)`` the matrix

    B[x, y] = p(x, y) / sqrt(p(x) p(y)) - sqrt(p(x) p(y))

has largest singular value equal to the HGR maximal correlation, and its
squared Frobenius norm equals the chi-squared divergence between the joint
and the product of the marginals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ciphermodel import Cipher, MessageDistributionScenario, induced_joint
from .probcore import JointPmf, Pmf, mutual_information

DENSE_LIMIT = 2048
POWER_TOL = 1e-12
POWER_MAX_ITER = 10_000
INVARIANT_TOL = 1e-9


class InvariantViolation(AssertionError):
    """A computed report breaks one of its mathematical guarantees."""


def _support(j: JointPmf):
    rows = np.flatnonzero(j.row_marginal.probs > 0)
    cols = np.flatnonzero(j.col_marginal.probs > 0)
    return rows, cols


def b_matrix(j: JointPmf) -> np.ndarray:
    """Standardized joint matrix with zero-marginal rows and columns dropped."""
    rows, cols = _support(j)
    P = j.probs[np.ix_(rows, cols)]
    sx = np.sqrt(j.row_marginal.probs[rows])
    sy = np.sqrt(j.col_marginal.probs[cols])
    return P / np.outer(sx, sy) - np.outer(sx, sy)


def power_iteration_norm(matvec, rmatvec, n_cols: int, orth=None,
                         tol=POWER_TOL, max_iter=POWER_MAX_ITER) -> float:
    """Largest singular value of an implicit operator by power iteration on ``B^T B``.

    ``orth`` is a unit vector in the right null space of ``B``; it is projected
    out of the iterate to keep round-off from feeding a spurious direction.
    """
    # A fixed pseudo-random start: the all-ones vector lies in the null space of
    # B whenever the column marginal is uniform.
    v = np.random.default_rng(0x5EED).standard_normal(n_cols)
    if orth is not None:
        v -= orth * (orth @ v)
    norm = np.linalg.norm(v)
    if norm == 0:
        return 0.0
    v /= norm
    sigma = 0.0
    for _ in range(max_iter):
        w = rmatvec(matvec(v))
        if orth is not None:
            w -= orth * (orth @ w)
        lam = float(np.linalg.norm(w))
        if lam == 0.0:
            return 0.0
        v = w / lam
        new_sigma = math.sqrt(lam)
        if abs(new_sigma - sigma) <= tol * max(new_sigma, 1e-300):
            return new_sigma
        sigma = new_sigma
    return sigma


def _dense_norm(B: np.ndarray) -> float:
    if B.size == 0:
        return 0.0
    if max(B.shape) <= DENSE_LIMIT:
        return float(np.linalg.svd(B, compute_uv=False)[0])
    return power_iteration_norm(lambda v: B @ v, lambda u: B.T @ u, B.shape[1])


def maximal_correlation(j: JointPmf) -> float:
    """HGR maximal correlation of the row and column variables, clamped to [0, 1]."""
    B = b_matrix(j)
    if min(B.shape, default=0) <= 1:
        return 0.0
    return min(max(_dense_norm(B), 0.0), 1.0)


def singular_values(j: JointPmf) -> np.ndarray:
    """Full singular spectrum of ``B``, descending (dense only)."""
    return np.linalg.svd(b_matrix(j), compute_uv=False)


def cipher_maximal_correlation(cipher: Cipher, message_pmf: Pmf | None = None) -> float:
    """Maximal correlation between message and ciphertext for ``cipher``.

    Small ciphers go through the dense joint. Larger ones never materialize the
    joint: ``B`` is applied through the encryption table.
    """
    if message_pmf is None:
        message_pmf = Pmf.uniform(cipher.n_messages)
    if max(cipher.n_messages, cipher.n_ciphertexts) <= DENSE_LIMIT:
        return maximal_correlation(induced_joint(MessageDistributionScenario(cipher, message_pmf)))

    px = message_pmf.probs
    weights = np.broadcast_to(px / cipher.n_keys, cipher.table.shape).ravel()
    cols = cipher.table.ravel()
    rows = np.broadcast_to(np.arange(cipher.n_messages), cipher.table.shape).ravel()
    py = np.bincount(cols, weights=weights, minlength=cipher.n_ciphertexts)
    rmask, cmask = px > 0, py > 0
    if rmask.sum() <= 1 or cmask.sum() <= 1:
        return 0.0
    sx = np.sqrt(px)
    sy = np.sqrt(py)
    inv_sx = np.where(rmask, 1.0 / np.where(rmask, sx, 1.0), 0.0)
    inv_sy = np.where(cmask, 1.0 / np.where(cmask, sy, 1.0), 0.0)
    entry = weights * inv_sx[rows] * inv_sy[cols]

    def matvec(v):
        out = np.bincount(rows, weights=entry * v[cols], minlength=cipher.n_messages)
        return out - sx * (sy @ v)

    def rmatvec(u):
        out = np.bincount(cols, weights=entry * u[rows], minlength=cipher.n_ciphertexts)
        return out - sy * (sx @ u)

    rho = power_iteration_norm(matvec, rmatvec, cipher.n_ciphertexts, orth=sy)
    return min(max(rho, 0.0), 1.0)


@dataclass(frozen=True)
class CorrelationReport:
    """Maximal correlation with the chi-squared and mutual-information bounds it implies."""

    rho_m: float
    chi_sq: float
    mi_bits: float
    mi_upper_bound_bits: float
    b_matrix_rank_bound: int

    def __post_init__(self):
        tol = INVARIANT_TOL
        if not (0.0 <= self.rho_m <= 1.0 + tol):
            raise InvariantViolation(f"rho_m={self.rho_m} outside [0, 1]")
        if not self.sandwich_holds:
            raise InvariantViolation(
                f"chi-square sandwich broken: chi_sq={self.chi_sq}, rank bound "
                f"{self.b_matrix_rank_bound}, rho^2={self.rho_m**2}"
            )
        if not self.mi_bound_holds:
            raise InvariantViolation(
                f"mutual information {self.mi_bits} exceeds bound {self.mi_upper_bound_bits}"
            )

    @property
    def sandwich_holds(self) -> bool:
        rho2 = self.rho_m**2
        # The upper side is compared relative to chi_sq because both sides carry
        # round-off proportional to their magnitude.
        upper = rho2 <= self.chi_sq * (1 + INVARIANT_TOL) + INVARIANT_TOL
        if self.b_matrix_rank_bound <= 0:
            return upper and self.chi_sq <= INVARIANT_TOL
        lower = self.chi_sq / self.b_matrix_rank_bound <= rho2 * (1 + INVARIANT_TOL) + INVARIANT_TOL
        return upper and lower

    @property
    def mi_bound_holds(self) -> bool:
        return self.mi_bits <= self.mi_upper_bound_bits + INVARIANT_TOL

    def to_dict(self) -> dict:
        return {
            "rho_m": self.rho_m,
            "chi_sq": self.chi_sq,
            "mi_bits": self.mi_bits,
            "mi_upper_bound_bits": self.mi_upper_bound_bits,
            "b_matrix_rank_bound": self.b_matrix_rank_bound,
            "sandwich_holds": self.sandwich_holds,
            "mi_bound_holds": self.mi_bound_holds,
        }


def correlation_report(j: JointPmf) -> CorrelationReport:
    B = b_matrix(j)
    rank_bound = max(min(B.shape) - 1, 0)
    rho = maximal_correlation(j)
    chi_sq = float(np.sum(B * B))
    mi = mutual_information(j)
    bound = math.log2(rank_bound * rho**2 + 1.0)
    return CorrelationReport(
        rho_m=rho,
        chi_sq=chi_sq,
        mi_bits=mi,
        mi_upper_bound_bits=bound,
        b_matrix_rank_bound=rank_bound,
    )
