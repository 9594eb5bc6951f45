"""Key-length and advantage formulas evaluated in the log2 domain.

Every probability-scale quantity is carried as its base-2 logarithm so that
values such as 1e-72 or 2**-1e6 stay representable. Key lengths are in bits,
which is already the log2 of the key-space size.
"""

from __future__ import annotations

import csv
import io
import math
import re
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

LOG10_2 = math.log10(2)
KEY_BITS = "key_bits"
PROBABILITY = "probability"
EXPONENT = "exponent"
EXISTENCE_NOTE = "existence-only: the constant alpha is not specified, value is parametric"
CRITERIA = ("strong", "weak", "leakage")


def log2_sum_exp(a: float, b: float) -> float:
    """``log2(2**a + 2**b)`` without overflow or underflow."""
    hi, lo = (a, b) if a >= b else (b, a)
    if hi == -math.inf:
        return -math.inf
    if hi == math.inf:
        return math.inf
    return hi + math.log2(1.0 + 2.0 ** (lo - hi))


def log2_diff_exp(a: float, b: float) -> float:
    """``log2(2**a - 2**b)`` for ``a >= b``; ``-inf`` when they are equal."""
    if b > a:
        raise ValueError("log2_diff_exp needs a >= b")
    if b == -math.inf:
        return a
    gap = b - a
    if gap == 0:
        return -math.inf
    return a + math.log2(-math.expm1(gap * math.log(2)))


def format_log2(value_log2: float, digits: int = 10) -> str:
    """Render ``2**value_log2`` in scientific notation with ``digits`` significant digits."""
    if value_log2 == -math.inf:
        return "0"
    if value_log2 == math.inf:
        return "inf"
    if math.isnan(value_log2):
        return "nan"
    x = value_log2 * LOG10_2
    exp10 = math.floor(x)
    mant = 10.0 ** (x - exp10)
    text = f"{mant:.{digits - 1}f}"
    if text.startswith("10"):
        exp10 += 1
        text = f"{mant / 10:.{digits - 1}f}"
    return f"{text}e{exp10:+d}"


def decimal_to_log2(text: str) -> float:
    """Inverse of :func:`format_log2`; also accepts ``2^x`` and plain decimals."""
    text = text.strip()
    m = re.fullmatch(r"2\s*(?:\^|\*\*)\s*\(?\s*([-+]?[0-9.eE+-]+)\s*\)?", text)
    if m:
        return float(m.group(1))
    if text == "0":
        return -math.inf
    m = re.fullmatch(r"([-+]?[0-9]*\.?[0-9]+)(?:[eE]([-+]?[0-9]+))?", text)
    if not m:
        raise ValueError(f"cannot parse number {text!r}")
    mant = float(m.group(1))
    if mant <= 0:
        raise ValueError(f"expected a positive number, got {text!r}")
    exp10 = int(m.group(2) or 0)
    return math.log2(mant) + exp10 / LOG10_2


@dataclass(frozen=True)
class BoundResult:
    name: str
    value_log2: float
    kind: str = PROBABILITY
    satisfied: bool | None = None
    note: str = ""
    details: dict = field(default_factory=dict)

    @property
    def value_decimal(self) -> str:
        return format_log2(self.value_log2)

    @property
    def value(self) -> float:
        """Natural-scale value: bits for key lengths, the log2 exponent for exponents."""
        if self.kind in (KEY_BITS, EXPONENT):
            return self.value_log2
        return 2.0**self.value_log2

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "value_log2": _json_float(self.value_log2),
            "value_decimal": self.value_decimal,
            "satisfied": self.satisfied,
            "note": self.note,
            "details": {k: _json_float(v) for k, v in self.details.items()},
        }


def _json_float(v):
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


@dataclass(frozen=True)
class BoundQuery:
    """Inputs shared by the formulas. ``rho_log2`` and friends are base-2 logs."""

    n_bits: float
    s_bits: float | None = None
    rho_log2: float | None = None
    t_bits: float | None = None
    tau_bits: float | None = None
    epsilon_log2: float | None = None
    leaked_bits: float | None = None
    alpha: float | None = None
    criterion: str | None = None
    leakage_rate: float | None = None

    def __post_init__(self):
        if not self.n_bits > 0:
            raise ValueError("n_bits must be positive")
        if self.s_bits is not None and self.s_bits < 0:
            raise ValueError("s_bits must be non-negative")
        if self.rho_log2 is not None and self.rho_log2 > 0:
            raise ValueError("rho must be at most 1")
        if self.epsilon_log2 is not None and self.epsilon_log2 > 0:
            raise ValueError("epsilon must be at most 1")


def _check_rho(rho_log2):
    if rho_log2 > 0:
        raise ValueError("rho must be at most 1 (rho_log2 <= 0)")


def converse_min_key(n_bits: float, rho_log2: float) -> BoundResult:
    """Fewest key bits any cipher with maximal correlation rho can have."""
    _check_rho(rho_log2)
    return BoundResult("converse_min_key", -log2_sum_exp(2 * rho_log2, -n_bits), KEY_BITS)


def converse_min_rho(n_bits: float, s_bits: float) -> BoundResult:
    """Smallest rho the converse allows for an ``s``-bit key."""
    if s_bits >= n_bits:
        value = -math.inf
    else:
        value = 0.5 * log2_diff_exp(-s_bits, -n_bits)
    return BoundResult("converse_min_rho", min(value, 0.0), PROBABILITY)


def expander_key_for_rho(rho_log2: float) -> BoundResult:
    """Key bits a Ramanujan-graph cipher needs: ``2 log(1/rho) + 2``."""
    _check_rho(rho_log2)
    return BoundResult("expander_key_for_rho", -2 * rho_log2 + 2, KEY_BITS)


def expander_rho_for_key(s_bits: float) -> BoundResult:
    return BoundResult("expander_rho_for_key", min(-(s_bits - 2) / 2, 0.0), PROBABILITY)


def _stream_eps_term(n_bits: float, epsilon_log2: float) -> float:
    return math.log2(1 + (-epsilon_log2) / n_bits)


def stream_key_for_rho(n_bits: float, rho_log2: float, epsilon_log2: float = 0.0) -> BoundResult:
    """Key bits for a random XOR stream cipher to reach rho with probability > 1 - eps."""
    _check_rho(rho_log2)
    value = -2 * rho_log2 + math.log2(n_bits) + _stream_eps_term(n_bits, epsilon_log2) + 2
    return BoundResult("stream_key_for_rho", value, KEY_BITS,
                       details={"epsilon_log2": epsilon_log2})


def stream_rho_for_key(n_bits: float, s_bits: float, epsilon_log2: float = 0.0) -> BoundResult:
    """Maximal correlation reachable by a random stream cipher with an ``s``-bit key."""
    value = -(s_bits - math.log2(n_bits) - _stream_eps_term(n_bits, epsilon_log2) - 2) / 2
    return BoundResult("stream_rho_for_key", min(value, 0.0), PROBABILITY,
                       details={"epsilon_log2": epsilon_log2})


def stream_failure_log2(n_bits: float, s_bits: float, rho_log2: float) -> float:
    """log2 of the failure probability eps guaranteed at ``(n, s, rho)``; 0 means no guarantee."""
    r = s_bits + 2 * rho_log2 - math.log2(n_bits) - 2
    if r <= 0:
        return 0.0
    if r > 1000:
        return -math.inf
    return -n_bits * math.expm1(r * math.log(2))


def rand_achieve_key(n_bits: float, rho_log2: float, alpha: float) -> BoundResult:
    """``(2 log 1/rho)(1 + alpha/log n) + alpha`` for a caller-chosen ``alpha``."""
    _check_rho(rho_log2)
    value = -2 * rho_log2 * (1 + alpha / math.log2(n_bits)) + alpha
    return BoundResult("rand_achieve_key", value, KEY_BITS, note=EXISTENCE_NOTE,
                       details={"alpha": alpha})


def rand_achieve_key_n_free(rho_log2: float, alpha: float) -> BoundResult:
    """``(2 log 1/rho)(1 + (3 alpha/2)/log(log(1/rho) + 1))``, independent of n."""
    _check_rho(rho_log2)
    L = -rho_log2
    value = 0.0 if L == 0 else 2 * L * (1 + 1.5 * alpha / math.log2(L + 1))
    return BoundResult("rand_achieve_key_n_free", value, KEY_BITS, note=EXISTENCE_NOTE,
                       details={"alpha": alpha})


def advantage_bound(n_bits: float, t_or_tau_bits: float | None, rho_log2: float,
                    one_bit: bool = False, leaked_bits: float | None = None) -> BoundResult:
    """Cap on the eavesdropper's advantage.

    With ``leaked_bits`` the cap is ``2**(l/2) rho`` (uniform messages with l
    bits revealed); otherwise ``2**((n - t)/2) rho``, halved for one-bit targets.
    """
    _check_rho(rho_log2)
    if leaked_bits is not None:
        value = leaked_bits / 2 + rho_log2
        name = "advantage_bound_leaked"
    else:
        t = n_bits if t_or_tau_bits is None else t_or_tau_bits
        value = (n_bits - t) / 2 + rho_log2 - (1 if one_bit else 0)
        name = "advantage_bound_one_bit" if one_bit else "advantage_bound"
    details = {}
    if one_bit and leaked_bits is None:
        details["balanced_guess_cap"] = 0.5 + 2.0 ** min(value, -1.0)
    return BoundResult(name, value, PROBABILITY, details=details)


def entropic_key_remark(n_bits: float, t_bits: float, epsilon_log2: float) -> BoundResult:
    """Key bits for Renyi-entropy-constrained security: ``n - t + 2 log(1/eps) + 2``.

    The details carry the known entropic-security lower bounds ``n - t`` and
    ``n - t + log(1/eps) - O(1)``, the latter with the O(1) set to 0.
    """
    gap = n_bits - t_bits
    return BoundResult(
        "entropic_key_remark",
        gap - 2 * epsilon_log2 + 2,
        KEY_BITS,
        note="public-coin lower bound shown with its O(1) constant set to 0",
        details={"lower_bound_any": gap, "lower_bound_public_coin": gap - epsilon_log2},
    )


def mi_secrecy_thresholds(n_bits: float, criterion: str,
                          leakage_rate: float | None = None) -> BoundResult:
    """Leading log2-exponent of rho that implies a mutual-information criterion."""
    if criterion == "strong":
        return BoundResult("mi_threshold_strong", -n_bits / 2, EXPONENT,
                           note="rho = o(2^(-n/2)); o(1) factor not included")
    if criterion == "weak":
        return BoundResult("mi_threshold_weak", -n_bits / 2, EXPONENT,
                           note="rho = 2^(-n/2 + o(n)); o(n) term not included")
    if criterion == "leakage":
        if leakage_rate is None or not 0 <= leakage_rate <= 1:
            raise ValueError("leakage criterion needs a leakage rate in [0, 1]")
        return BoundResult("mi_threshold_leakage", -(1 - leakage_rate) * n_bits / 2, EXPONENT,
                           note="rho = 2^(-(1-R_L)n/2 + o(n)); o(n) term not included",
                           details={"leakage_rate": leakage_rate})
    raise ValueError(f"unknown criterion {criterion!r}; expected one of {CRITERIA}")


# -- key-length comparison curves -------------------------------------------


@dataclass(frozen=True)
class CurveRow:
    rho_log2: float
    converse_bits: float
    expander_bits: float
    stream_bits: float


CURVE_COLUMNS = ("rho_log2", "converse_bits", "expander_bits", "stream_bits")
DEFAULT_GRID = "-40:0:81"


def parse_grid(spec: str) -> np.ndarray:
    """``lo:hi:steps`` over log2(rho), endpoints included."""
    try:
        lo, hi, steps = spec.split(":")
        lo, hi, steps = float(lo), float(hi), int(steps)
    except ValueError:
        raise ValueError(f"grid must look like lo:hi:steps, got {spec!r}") from None
    if steps < 1 or hi > 0 or lo > hi:
        raise ValueError("grid needs lo <= hi <= 0 and steps >= 1")
    return np.linspace(lo, hi, steps) if steps > 1 else np.array([lo])


def fig2_curves(n_bits: float, rho_grid: Iterable[float]) -> list[CurveRow]:
    """Converse, Ramanujan-expander, and random-stream key lengths over a grid of log2(rho)."""
    rows = []
    for r in rho_grid:
        r = float(r)
        rows.append(CurveRow(
            rho_log2=r,
            converse_bits=converse_min_key(n_bits, r).value_log2,
            expander_bits=expander_key_for_rho(r).value_log2,
            stream_bits=stream_key_for_rho(n_bits, r).value_log2,
        ))
    return rows


def curves_csv(rows: Iterable[CurveRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CURVE_COLUMNS)
    for row in rows:
        writer.writerow([f"{getattr(row, c):.10g}" for c in CURVE_COLUMNS])
    return buf.getvalue()


# -- evaluate everything a query allows -------------------------------------


def evaluate(q: BoundQuery) -> list[BoundResult]:
    """All formulas computable from the fields set on ``q``.

    Without ``rho_log2`` but with ``s_bits``, rho is taken from the random
    stream cipher guarantee at that key length.
    """
    out: list[BoundResult] = []
    eps = 0.0 if q.epsilon_log2 is None else q.epsilon_log2
    rho = q.rho_log2
    if rho is None and q.s_bits is not None:
        stream = stream_rho_for_key(q.n_bits, q.s_bits, eps)
        out.append(stream)
        out.append(expander_rho_for_key(q.s_bits))
        out.append(converse_min_rho(q.n_bits, q.s_bits))
        rho = stream.value_log2

    if q.rho_log2 is not None:
        def have(result):
            if q.s_bits is None:
                return result
            return BoundResult(result.name, result.value_log2, result.kind,
                               q.s_bits >= result.value_log2 - 1e-9, result.note, result.details)

        out.append(have(converse_min_key(q.n_bits, q.rho_log2)))
        out.append(have(expander_key_for_rho(q.rho_log2)))
        out.append(have(stream_key_for_rho(q.n_bits, q.rho_log2, eps)))
        if q.alpha is not None:
            out.append(have(rand_achieve_key(q.n_bits, q.rho_log2, q.alpha)))
            out.append(have(rand_achieve_key_n_free(q.rho_log2, q.alpha)))
        if q.s_bits is not None:
            out.append(BoundResult("stream_failure_probability",
                                   stream_failure_log2(q.n_bits, q.s_bits, q.rho_log2)))

    if rho is not None:
        out.append(advantage_bound(q.n_bits, None, rho))
        out.append(advantage_bound(q.n_bits, None, rho, one_bit=True))
        if q.t_bits is not None:
            r = advantage_bound(q.n_bits, q.t_bits, rho)
            out.append(BoundResult("advantage_bound_t", r.value_log2, r.kind, details={"t_bits": q.t_bits}))
            r = advantage_bound(q.n_bits, q.t_bits, rho, one_bit=True)
            out.append(BoundResult("advantage_bound_t_one_bit", r.value_log2, r.kind,
                                   details={"t_bits": q.t_bits}))
        if q.tau_bits is not None:
            r = advantage_bound(q.n_bits, q.tau_bits, rho)
            out.append(BoundResult("advantage_bound_tau", r.value_log2, r.kind,
                                   details={"tau_bits": q.tau_bits}))
        if q.leaked_bits is not None:
            out.append(advantage_bound(q.n_bits, None, rho, leaked_bits=q.leaked_bits))

    if q.t_bits is not None and q.epsilon_log2 is not None:
        out.append(entropic_key_remark(q.n_bits, q.t_bits, q.epsilon_log2))
    if q.criterion is not None:
        out.append(mi_secrecy_thresholds(q.n_bits, q.criterion, q.leakage_rate))
    return out
