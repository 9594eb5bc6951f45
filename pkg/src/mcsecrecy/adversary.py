"""Exhaustive eavesdroppers for small ciphers.

For a fixed target function ``f`` of the message, the best guess from the
ciphertext is the MAP rule, so only ``f`` has to be searched. General
functions are enumerated as set partitions (restricted growth strings), and
one-bit functions as subsets in Gray-code order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Hashable, Sequence

import numpy as np

from .ciphermodel import MessageDistributionScenario, induced_joint
from .probcore import Pmf, chi_square, renyi_entropy2
from .spectral import cipher_maximal_correlation

GENERAL = "general"
ONE_BIT = "one_bit"
MODES = (GENERAL, ONE_BIT)
MAX_GENERAL_MESSAGES = 10
MAX_ONE_BIT_MESSAGES = 20
BOUND_TOL = 1e-9
TIE_TOL = 1e-12
_CHUNK_BUDGET = 2**22


class ResourceError(RuntimeError):
    """Alphabet too large for exhaustive search."""


class PreconditionError(ValueError):
    pass


# -- enumeration ------------------------------------------------------------


def restricted_growth_strings(n: int):
    """Yield every set partition of ``range(n)`` as a restricted growth string.

    ``a[0] = 0`` and ``a[i] <= 1 + max(a[:i])``; output is in lexicographic order.
    """
    if n == 0:
        yield ()
        return
    a = [0] * n
    b = [1] * n  # b[i] = 1 + max(a[:i])
    while True:
        yield tuple(a)
        # Find the rightmost position that can still grow.
        j = n - 1
        while j > 0 and a[j] == b[j]:
            j -= 1
        if j == 0:
            return
        a[j] += 1
        for i in range(j + 1, n):
            a[i] = 0
            b[i] = max(b[i - 1], a[i - 1] + 1)


@lru_cache(maxsize=None)
def partition_array(n: int) -> np.ndarray:
    arr = np.array(list(restricted_growth_strings(n)), dtype=np.int8).reshape(-1, n)
    arr.setflags(write=False)
    return arr


def bell_number(n: int) -> int:
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[0]


def gray_subsets(n: int, start: int, stop: int) -> np.ndarray:
    """Indicator rows for Gray-code steps ``start..stop-1`` over ``n`` elements."""
    idx = np.arange(start, stop, dtype=np.int64)
    code = idx ^ (idx >> 1)
    return ((code[:, None] >> np.arange(n)) & 1).astype(np.int8)


def _label_chunks(n_messages: int, mode: str, n_cols: int):
    """Yield ``(offset, labels)`` blocks covering the whole search space."""
    if mode == GENERAL:
        if n_messages > MAX_GENERAL_MESSAGES:
            raise ResourceError(
                f"general-function search is limited to {MAX_GENERAL_MESSAGES} messages"
            )
        parts = partition_array(n_messages)
        step = max(1, _CHUNK_BUDGET // max(1, n_messages * n_messages * n_cols))
        for lo in range(0, parts.shape[0], step):
            yield lo, parts[lo:lo + step]
    elif mode == ONE_BIT:
        if n_messages > MAX_ONE_BIT_MESSAGES:
            raise ResourceError(
                f"one-bit search is limited to {MAX_ONE_BIT_MESSAGES} messages"
            )
        total = 2**n_messages
        step = max(1, _CHUNK_BUDGET // max(1, n_messages * n_cols))
        for lo in range(0, total, step):
            yield lo, gray_subsets(n_messages, lo, min(total, lo + step))
    else:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")


def _label_joint(labels: np.ndarray, J: np.ndarray, mode: str) -> np.ndarray:
    """``S[p, i, c] = sum over m with labels[p, m] == i of J[m, c]``."""
    if mode == ONE_BIT:
        ones = labels.astype(np.float64) @ J
        zeros = J.sum(axis=0)[None, :] - ones
        return np.stack((zeros, ones), axis=1)
    n = max(labels.shape[1], int(labels.max(initial=0)) + 1)
    onehot = (labels[:, :, None] == np.arange(n)[None, None, :]).astype(np.float64)
    return np.einsum("pmi,mc->pic", onehot, J)


def _map_success(labels: np.ndarray, J: np.ndarray, mode: str) -> np.ndarray:
    """Probability that the MAP guess of ``f`` from the column variable is right."""
    return _label_joint(labels, J, mode).max(axis=1).sum(axis=1)


def map_guess(labels: Sequence[int], J: np.ndarray) -> np.ndarray:
    """MAP guess of ``f(M)`` for every column of the joint ``J`` (lowest label on ties)."""
    labels = np.asarray(labels)
    S = _label_joint(labels[None, :], np.asarray(J), GENERAL)[0]
    return S.argmax(axis=0)


class _ArgMax:
    """Running maximum honouring first-in-enumeration-order ties."""

    def __init__(self):
        self.value = -math.inf
        self.index = -1

    def update(self, offset: int, values: np.ndarray) -> bool:
        top = float(values.max())
        if top > self.value + TIE_TOL:
            self.value = top
            self.index = offset + int(np.flatnonzero(values >= top - TIE_TOL)[0])
            return True
        return False


# -- results ----------------------------------------------------------------


@dataclass(frozen=True)
class AdvantageResult:
    """Best target function found and the eavesdropper's edge on it.

    ``best_f`` lists the label of each message (a restricted growth string in
    general mode, a 0/1 indicator in one-bit mode).
    """

    best_f: tuple[int, ...]
    best_guess_probability: float
    baseline_probability: float
    advantage: float
    mode: str

    @property
    def blocks(self) -> list[list[int]]:
        groups: dict[int, list[int]] = {}
        for m, lab in enumerate(self.best_f):
            groups.setdefault(lab, []).append(m)
        return [groups[k] for k in sorted(groups)]

    def to_dict(self) -> dict:
        return {
            "best_f": list(self.best_f),
            "best_guess_probability": self.best_guess_probability,
            "baseline_probability": self.baseline_probability,
            "advantage": self.advantage,
            "mode": self.mode,
        }


@dataclass(frozen=True)
class BoundCheck:
    """Measured quantity against its theoretical cap."""

    name: str
    value: float
    bound: float
    details: dict = field(default_factory=dict)

    @property
    def slack(self) -> float:
        return self.bound - self.value

    @property
    def passed(self) -> bool:
        return self.value <= self.bound + BOUND_TOL

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "value": self.value,
            "bound": self.bound,
            "slack": self.slack,
            "passed": self.passed,
            "details": self.details,
        }


def _search(n_messages: int, guess_J: np.ndarray, base_J: np.ndarray, mode: str) -> AdvantageResult:
    best = _ArgMax()
    keep = None
    for offset, labels in _label_chunks(n_messages, mode, guess_J.shape[1] + base_J.shape[1]):
        guess = _map_success(labels, guess_J, mode)
        base = _map_success(labels, base_J, mode)
        adv = guess - base
        if best.update(offset, adv):
            i = best.index - offset
            keep = (tuple(int(x) for x in labels[i]), float(guess[i]), float(base[i]))
    f, guess, base = keep
    return AdvantageResult(
        best_f=f,
        best_guess_probability=guess,
        baseline_probability=base,
        advantage=guess - base,
        mode=mode,
    )


def optimal_advantage(sc: MessageDistributionScenario, mode: str = GENERAL) -> AdvantageResult:
    """Largest advantage over all target functions in ``mode``, with a MAP eavesdropper."""
    J = induced_joint(sc).probs
    prior = sc.message_pmf.probs[:, None]
    return _search(sc.cipher.n_messages, J, prior, mode)


def _renyi_factor(sc: MessageDistributionScenario, entropy_bits: float, mode: str) -> float:
    n = sc.cipher.message_bits
    exponent = (n - entropy_bits) / 2 - (1 if mode == ONE_BIT else 0)
    return 2.0**exponent


def check_theorem1(sc: MessageDistributionScenario, mode: str = GENERAL) -> BoundCheck:
    """Exhaustive advantage versus ``2**((n - H2)/2) * rho`` (halved for one-bit targets)."""
    result = optimal_advantage(sc, mode)
    t = renyi_entropy2(sc.message_pmf)
    rho = cipher_maximal_correlation(sc.cipher)
    bound = _renyi_factor(sc, t, mode) * rho
    return BoundCheck(
        name=f"renyi_advantage[{mode}]",
        value=result.advantage,
        bound=bound,
        details={"t_bits": t, "rho": rho, "n_bits": sc.cipher.message_bits,
                 "best_f": list(result.best_f),
                 "best_guess_probability": result.best_guess_probability,
                 "baseline_probability": result.baseline_probability},
    )


# -- side information -------------------------------------------------------


def side_info_tau(pmf: Pmf, h: Sequence[int]) -> float:
    """Largest ``tau`` with ``sum_a P(h=a) 2**(-H2(M | h=a)/2) <= 2**(-tau/2)``."""
    p = pmf.probs
    h = np.asarray(h)
    total = 0.0
    for a in np.unique(h):
        mass = p[h == a]
        weight = float(mass.sum())
        if weight <= 0:
            continue
        cond = mass / weight
        total += weight * 2.0 ** (-renyi_entropy2(Pmf(cond)) / 2)
    return -2 * math.log2(total)


@dataclass(frozen=True)
class SideInfoScenario:
    """Messages drawn from ``scenario`` with ``h(M)`` also handed to the eavesdropper.

    ``h`` holds one label per message. ``tau`` defaults to the largest value
    the pmf and ``h`` admit.
    """

    scenario: MessageDistributionScenario
    h: tuple[Hashable, ...]
    tau: float | None = None

    def __post_init__(self):
        h = tuple(self.h)
        if len(h) != self.scenario.cipher.n_messages:
            raise PreconditionError(
                f"side information has {len(h)} labels for {self.scenario.cipher.n_messages} messages"
            )
        object.__setattr__(self, "h", h)
        tau_max = side_info_tau(self.scenario.message_pmf, self.codes)
        if self.tau is None:
            object.__setattr__(self, "tau", tau_max)
        elif self.tau > tau_max + BOUND_TOL:
            raise PreconditionError(
                f"tau={self.tau} violates the side-information condition (max {tau_max})"
            )

    @property
    def codes(self) -> np.ndarray:
        index: dict[Hashable, int] = {}
        return np.array([index.setdefault(x, len(index)) for x in self.h], dtype=np.int64)


def side_info_advantage(s: SideInfoScenario, mode: str = GENERAL) -> BoundCheck:
    """Best advantage when the guess may use both ``C`` and ``h(M)``, versus ``2**((n-tau)/2) rho``."""
    sc = s.scenario
    codes = s.codes
    n_labels = int(codes.max()) + 1
    J = induced_joint(sc).probs
    tag = np.eye(n_labels)[codes]  # (M, A)
    guess_J = (J[:, :, None] * tag[:, None, :]).reshape(J.shape[0], -1)
    base_J = sc.message_pmf.probs[:, None] * tag
    result = _search(sc.cipher.n_messages, guess_J, base_J, mode)
    rho = cipher_maximal_correlation(sc.cipher)
    bound = 2.0 ** ((sc.cipher.message_bits - s.tau) / 2) * rho
    return BoundCheck(
        name=f"side_info_advantage[{mode}]",
        value=result.advantage,
        bound=bound,
        details={"tau_bits": s.tau, "rho": rho, "n_bits": sc.cipher.message_bits,
                 "best_f": list(result.best_f),
                 "best_guess_probability": result.best_guess_probability,
                 "baseline_probability": result.baseline_probability},
    )


def read_side_info(path: str | Path, n_messages: int) -> tuple[str, ...]:
    """Parse ``message_index label`` lines; every message must get exactly one label."""
    labels: dict[int, str] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise PreconditionError(f"{path}:{lineno}: expected 'message_index label'")
        try:
            m = int(parts[0])
        except ValueError:
            raise PreconditionError(f"{path}:{lineno}: bad message index {parts[0]!r}") from None
        if not 0 <= m < n_messages or m in labels:
            raise PreconditionError(f"{path}:{lineno}: message index {m} out of range or repeated")
        labels[m] = parts[1]
    if len(labels) != n_messages:
        missing = sorted(set(range(n_messages)) - set(labels))
        raise PreconditionError(f"{path}: no label for messages {missing[:5]}")
    return tuple(labels[m] for m in range(n_messages))


# -- simulator-style checks -------------------------------------------------


def two_measure_deviation(sc_actual: MessageDistributionScenario, reference: Pmf,
                          mode: str = GENERAL) -> BoundCheck:
    """Worst gap between the real guess and an independent simulator.

    The guess rule is any function of the ciphertext. The simulator draws a
    label independently of ``M`` with the guess rule's output law under the
    ``reference`` message pmf. The cap is ``rho_ref * sqrt(chi2(actual || reference) + 1)``.
    For a fixed ``f`` the worst rule is found per column, which is exact. In
    general mode the rule may answer a value ``f`` never takes (a zero term);
    in one-bit mode it must answer a bit.
    """
    cipher = sc_actual.cipher
    J_hat = induced_joint(sc_actual).probs
    ref_sc = MessageDistributionScenario(cipher, reference)
    col_ref = induced_joint(ref_sc).col_marginal.probs
    best = _ArgMax()
    worst_f = None
    for offset, labels in _label_chunks(cipher.n_messages, mode, J_hat.shape[1]):
        S = _label_joint(labels, J_hat, mode)
        pf = S.sum(axis=2)
        W = S - pf[:, :, None] * col_ref[None, None, :]
        hi, lo = W.max(axis=1), W.min(axis=1)
        if mode == GENERAL:
            hi, lo = np.maximum(hi, 0), np.minimum(lo, 0)
        pos, neg = hi.sum(axis=1), lo.sum(axis=1)
        dev = np.maximum(pos, -neg)
        if best.update(offset, dev):
            worst_f = tuple(int(x) for x in labels[best.index - offset])
    rho = cipher_maximal_correlation(cipher, reference)
    chi2 = chi_square(sc_actual.message_pmf, reference)
    return BoundCheck(
        name=f"two_measure_deviation[{mode}]",
        value=best.value,
        bound=rho * math.sqrt(chi2 + 1),
        details={"rho_reference": rho, "chi_sq": chi2, "worst_f": list(worst_f)},
    )


def entropic_security_check(sc: MessageDistributionScenario, mode: str = GENERAL) -> BoundCheck:
    """Simulator gap under the scenario pmf versus ``2**((n - H2)/2) * rho``."""
    uniform = Pmf.uniform(sc.cipher.n_messages)
    check = two_measure_deviation(sc, uniform, mode)
    t = renyi_entropy2(sc.message_pmf)
    rho = check.details["rho_reference"]
    bound = 2.0 ** ((sc.cipher.message_bits - t) / 2) * rho
    return BoundCheck(
        name="entropic_security",
        value=check.value,
        bound=bound,
        details={"t_bits": t, "rho": rho, "worst_f": check.details["worst_f"]},
    )


def one_bit_refined_check(sc: MessageDistributionScenario) -> BoundCheck:
    """Sharper one-bit cap using the balance of ``f`` under the scenario pmf.

    Reports the largest value of ``P{f = MAP} - 1/2 - cap(f)``; the check
    passes when that is not positive.
    """
    J = induced_joint(sc).probs
    rho = cipher_maximal_correlation(sc.cipher)
    chi2 = chi_square(sc.message_pmf, Pmf.uniform(sc.cipher.n_messages))
    best = _ArgMax()
    worst = None
    for offset, labels in _label_chunks(sc.cipher.n_messages, ONE_BIT, J.shape[1]):
        S = _label_joint(labels, J, ONE_BIT)
        guess = S.max(axis=1).sum(axis=1)
        p0 = S[:, 0, :].sum(axis=1)
        cap = np.sqrt(rho**2 * (chi2 + 1) / 4 + (1 - rho**2) * (p0 - 0.5) ** 2)
        excess = guess - 0.5 - cap
        if best.update(offset, excess):
            worst = tuple(int(x) for x in labels[best.index - offset])
    return BoundCheck(
        name="one_bit_refined",
        value=best.value,
        bound=0.0,
        details={"rho": rho, "chi_sq": chi2, "worst_f": list(worst)},
    )
