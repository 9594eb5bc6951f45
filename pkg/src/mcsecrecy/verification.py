"""Seeded Monte Carlo sweeps and the invariant batteries behind ``mcsecrecy verify``."""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import bounds
from .adversary import (GENERAL, ONE_BIT, check_theorem1, one_bit_refined_check,
                        optimal_advantage)
from .ciphermodel import Cipher, MessageDistributionScenario, induced_joint
from .constructions import (MAX_WALSH_BITS, ResourceLimitError, build_expander_cipher,
                            build_stream_cipher, cascade, counterexample, expander_lambda2_rho,
                            random_cipher, random_expander_spec, random_stream_cipher,
                            reference_cipher, walsh_rho)
from .probcore import Pmf
from .spectral import InvariantViolation, correlation_report, maximal_correlation


def trial_seed(seed: int, index: int) -> int:
    """64-bit seed for one trial, a pure function of ``(seed, index)``."""
    return int(np.random.SeedSequence([seed, index]).generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class MonteCarloSummary:
    n: int
    s: int
    rho: float
    trials: int
    passes: int
    epsilon_log2: float
    rows: tuple = ()

    @property
    def pass_fraction(self) -> float:
        return self.passes / self.trials if self.trials else math.nan

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "s": self.s,
            "rho": self.rho,
            "trials": self.trials,
            "passes": self.passes,
            "pass_fraction": None if not self.trials else self.pass_fraction,
            "guaranteed_pass_probability_log2_failure": self.epsilon_log2,
            "guaranteed_pass_probability": 1 - 2.0**self.epsilon_log2,
        }

    def csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(("seed", "n", "s", "rho", "pass"))
        for row in self.rows:
            writer.writerow((row[0], row[1], row[2], f"{row[3]:.10g}", "pass" if row[4] else "fail"))
        return buf.getvalue()


def montecarlo_stream(n: int, s: int, rho: float, trials: int, seed: int) -> MonteCarloSummary:
    """Fraction of random ``n``-bit stream ciphers with ``2**s`` keys whose rho is at most ``rho``."""
    if n > MAX_WALSH_BITS:
        raise ResourceLimitError(f"Monte Carlo sweeps are limited to n <= {MAX_WALSH_BITS}")
    if not 0 < rho <= 1:
        raise ValueError("rho must be in (0, 1]")
    rows = []
    for i in range(trials):
        ts = trial_seed(seed, i)
        value = walsh_rho(random_stream_cipher(n, s, ts))
        rows.append((ts, n, s, value, value <= rho))
    eps = bounds.stream_failure_log2(n, s, math.log2(rho))
    return MonteCarloSummary(n=n, s=s, rho=rho, trials=trials,
                             passes=sum(r[4] for r in rows), epsilon_log2=eps, rows=tuple(rows))


# -- batteries ---------------------------------------------------------------


@dataclass
class CheckOutcome:
    name: str
    passed: bool
    detail: str = ""
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail} ({self.seconds:.2f}s)"

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail,
                "seconds": round(self.seconds, 3)}


def random_pmf(rng: np.random.Generator, size: int) -> Pmf:
    p = rng.dirichlet(np.full(size, rng.uniform(0.2, 2.0)))
    if size > 1 and rng.random() < 0.3:
        p[rng.integers(size)] = 0.0
        if p.sum() == 0:
            p[0] = 1.0
    return Pmf(p / p.sum())


def random_scenario(rng: np.random.Generator, max_messages: int = 8) -> MessageDistributionScenario:
    m = int(rng.integers(2, max_messages + 1))
    k = int(rng.integers(1, 9))
    c = m + int(rng.integers(0, 3))
    cipher = random_cipher(m, k, c, seed=int(rng.integers(2**32)))
    return MessageDistributionScenario(cipher, random_pmf(rng, m))


def _timed(name, fn):
    start = time.perf_counter()
    try:
        passed, detail = fn()
    except InvariantViolation as exc:
        passed, detail = False, f"invariant violated: {exc}"
    return CheckOutcome(name, passed, detail, time.perf_counter() - start)


class _ReportLog:
    """Builds correlation reports and counts them; a construction failure is a violation."""

    def __init__(self):
        self.count = 0

    def report(self, joint):
        self.count += 1
        return correlation_report(joint)


def run_battery(kind: str = "small", seed: int = 0) -> list[CheckOutcome]:
    if kind not in ("small", "full"):
        raise ValueError("battery must be 'small' or 'full'")
    full = kind == "full"
    log = _ReportLog()
    built: list[Cipher] = []
    outcomes = []

    def golden():
        c1, c2 = reference_cipher("c1"), reference_cipher("c2")
        r1, r2 = log.report(induced_joint(c1)), log.report(induced_joint(c2))
        built.extend([c1, c2])
        ok = (abs(r2.rho_m - math.sqrt(0.5)) <= 1e-9 and abs(r1.rho_m - 1) <= 1e-9
              and abs(r2.mi_bits - 1) <= 1e-9)
        return ok, f"rho(C2)={r2.rho_m:.10g} rho(C1)={r1.rho_m:.10g} I(C2)={r2.mi_bits:.10g}"

    def strong_secrecy():
        worst = 0.0
        top = 10 if full else 6
        for n in range(2, top + 1):
            c = counterexample(n)
            built.append(c)
            j = induced_joint(c)
            r = log.report(j)
            expected = 2.0**-n * (n + 2 - 2.0 ** -(n - 1))
            worst = max(worst, abs(r.mi_bits - expected) / 1e-8, abs(r.rho_m - 1) / 1e-9)
        return worst <= 1, f"n=2..{top}, worst error / tolerance = {worst:.3g}"

    def headline():
        rho = bounds.stream_rho_for_key(8e9, 512)
        adv = bounds.advantage_bound(8e9, None, rho.value_log2, leaked_bits=100)
        e1 = abs(2.0 ** (rho.value_log2 - bounds.decimal_to_log2("1.54e-72")) - 1)
        e2 = abs(2.0 ** (adv.value_log2 - bounds.decimal_to_log2("1.74e-57")) - 1)
        return max(e1, e2) <= 0.02, f"rho={rho.value_decimal} adv={adv.value_decimal}"

    def oracle_equivalence():
        rng = np.random.default_rng([seed, 4])
        worst = 0.0
        max_n = 8 if full else 3
        for _ in range(50):
            n = int(rng.integers(1, max_n + 1))
            s = int(rng.integers(0, 7))
            spec = random_stream_cipher(n, s, int(rng.integers(2**63)))
            c = build_stream_cipher(spec)
            built.append(c)
            worst = max(worst, abs(walsh_rho(spec) - log.report(induced_joint(c)).rho_m))
        for _ in range(20):
            n = int(rng.integers(1, max_n + 1))
            d = int(rng.integers(1, 17))
            spec = random_expander_spec(n, d, int(rng.integers(2**63)))
            c = build_expander_cipher(spec)
            built.append(c)
            worst = max(worst, abs(expander_lambda2_rho(spec) - log.report(induced_joint(c)).rho_m))
        return worst <= 1e-9, f"max |closed form - SVD| = {worst:.3g}"

    def renyi():
        rng = np.random.default_rng([seed, 5])
        worst = -math.inf
        for _ in range(200):
            sc = random_scenario(rng)
            built.append(sc.cipher)
            log.report(induced_joint(sc))
            for mode in (GENERAL, ONE_BIT):
                chk = check_theorem1(sc, mode)
                worst = max(worst, chk.value - chk.bound)
            refined = one_bit_refined_check(sc)
            worst = max(worst, refined.value)
        c2 = optimal_advantage(MessageDistributionScenario(reference_cipher("c2")), ONE_BIT)
        ok = worst <= 1e-9 and abs(c2.best_guess_probability - 0.75) <= 1e-12
        return ok, f"max(advantage - bound) = {worst:.3g}, C2 one-bit guess = {c2.best_guess_probability}"

    def cascades():
        rng = np.random.default_rng([seed, 7])
        worst = -math.inf
        for _ in range(100):
            m = int(rng.integers(2, 2 ** (6 if full else 3) + 1))
            a = random_cipher(m, int(rng.integers(1, 5)), seed=int(rng.integers(2**32)))
            b = random_cipher(m, int(rng.integers(1, 5)), seed=int(rng.integers(2**32)))
            ab = cascade(a, b)
            built.append(ab)
            r = [log.report(induced_joint(x)).rho_m for x in (a, b, ab)]
            worst = max(worst, r[2] - r[0] * r[1])
        return worst <= 1e-9, f"max(rho_cascade - rho1*rho2) = {worst:.3g}"

    def montecarlo():
        n = 16 if full else 8
        eps_log2 = math.log2(0.1)
        s = math.ceil(bounds.stream_key_for_rho(n, -1.0, eps_log2).value_log2)
        trials = 500 if full else 100
        summary = montecarlo_stream(n, s, 0.5, trials, seed)
        return summary.pass_fraction >= 0.87, (
            f"n={n} s={s} pass fraction {summary.pass_fraction:.3f} over {trials} trials")

    def converse():
        worst = -math.inf
        for c in built:
            rho = maximal_correlation(induced_joint(c))
            need = bounds.converse_min_key(c.message_bits, math.log2(rho) if rho > 0 else -math.inf)
            worst = max(worst, need.value_log2 - c.key_bits)
        return worst <= 1e-6, f"{len(built)} ciphers, max(converse - key bits) = {worst:.3g}"

    def reports():
        return True, f"{log.count} correlation reports, all invariants held"

    def curves():
        rows = bounds.fig2_curves(1e4, bounds.parse_grid(bounds.DEFAULT_GRID))
        ordered = all(r.converse_bits <= r.expander_bits + 1e-12 for r in rows)
        at = next(r for r in rows if r.rho_log2 == -10)
        close = (abs(at.converse_bits - 20.0) <= 0.01 and abs(at.expander_bits - 22) <= 0.01
                 and abs(at.stream_bits - 35.2877) <= 0.01)
        return ordered and close, (f"rho=2^-10: converse={at.converse_bits:.4f} "
                                   f"expander={at.expander_bits:.4f} stream={at.stream_bits:.4f}")

    for name, fn in [
        ("golden values", golden),
        ("strong-secrecy counterexample", strong_secrecy),
        ("1-GB headline numbers", headline),
        ("closed-form rho vs SVD", oracle_equivalence),
        ("Renyi advantage battery", renyi),
        ("cascade submultiplicativity", cascades),
        ("random stream Monte Carlo", montecarlo),
        ("key-length converse", converse),
        ("report invariants", reports),
        ("key-length curves", curves),
    ]:
        outcomes.append(_timed(name, fn))
    return outcomes
