"""Cipher families: XOR stream ciphers, permutation (expander) ciphers, cascades,
and the small reference ciphers used as worked examples.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .ciphermodel import Cipher, CipherError, expander_table
from .spectral import DENSE_LIMIT, power_iteration_norm

MAX_WALSH_BITS = 28
MAX_RANDOM_STREAM_BITS = 62


class ResourceLimitError(RuntimeError):
    """Requested instance is too large for the exact computation."""


@dataclass(frozen=True)
class KeystreamSpec:
    """Keystream words ``G(k)`` for an ``n``-bit XOR stream cipher with ``2**s`` keys.

    Repeated words are allowed; the i.i.d. random model produces collisions.
    """

    n: int
    s: int
    streams: tuple[int, ...]
    seed: int | str = "explicit"

    def __post_init__(self):
        if self.n < 1 or self.s < 0:
            raise ValueError("need n >= 1 and s >= 0")
        streams = tuple(int(w) for w in self.streams)
        object.__setattr__(self, "streams", streams)
        if len(streams) != 2**self.s:
            raise ValueError(f"expected {2**self.s} keystream words, got {len(streams)}")
        if any(w < 0 or w >> self.n for w in streams):
            raise ValueError(f"keystream word does not fit in {self.n} bits")


@dataclass(frozen=True)
class ExpanderSpec:
    """``d`` permutations of ``[0, 2**n)``; the cipher uses each one and its inverse."""

    n: int
    d: int
    permutations: tuple[tuple[int, ...], ...]
    seed: int | str = "explicit"

    def __post_init__(self):
        perms = tuple(tuple(int(x) for x in p) for p in self.permutations)
        object.__setattr__(self, "permutations", perms)
        size = 2**self.n
        if len(perms) != self.d or self.d < 1:
            raise ValueError(f"expected {self.d} permutations, got {len(perms)}")
        for i, p in enumerate(perms):
            if sorted(p) != list(range(size)):
                raise CipherError(f"permutation {i} is not a bijection on [0, {size})")

    @property
    def degree(self) -> int:
        return 2 * self.d

    @property
    def n_vertices(self) -> int:
        return 2**self.n


# -- stream ciphers ---------------------------------------------------------


def build_stream_cipher(spec: KeystreamSpec, label: str | None = None) -> Cipher:
    size = 2**spec.n
    ks = np.array(spec.streams, dtype=np.int64)
    table = np.arange(size, dtype=np.int64)[None, :] ^ ks[:, None]
    return Cipher(
        n_messages=size,
        n_keys=len(spec.streams),
        n_ciphertexts=size,
        table=table,
        label=label or f"stream(n={spec.n},s={spec.s},seed={spec.seed})",
        keystream=spec.streams,
    )


def fwht(values: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform in natural (Sylvester) order.

    ``out[v] = sum_w values[w] * (-1)**popcount(v & w)``. Integer input stays exact.
    """
    a = np.array(values)
    size = a.shape[0]
    if size & (size - 1):
        raise ValueError("length must be a power of two")
    h = 1
    while h < size:
        a = a.reshape(-1, 2, h)
        a = np.stack((a[:, 0] + a[:, 1], a[:, 0] - a[:, 1]), axis=1)
        h *= 2
    return a.reshape(size)


def walsh_biases(spec: KeystreamSpec) -> np.ndarray:
    """Signed bias ``mean_k (-1)**(v . G(k))`` for every mask ``v`` (index 0 included)."""
    if spec.n > MAX_WALSH_BITS:
        raise ResourceLimitError(f"Walsh spectrum limited to n <= {MAX_WALSH_BITS}")
    counts = np.bincount(np.array(spec.streams, dtype=np.int64), minlength=2**spec.n)
    return fwht(counts.astype(np.int64)) / len(spec.streams)


def walsh_rho(spec: KeystreamSpec) -> float:
    """Maximal correlation of the stream cipher as its largest nonzero-mask bias."""
    biases = walsh_biases(spec)
    return float(np.max(np.abs(biases[1:]))) if biases.size > 1 else 0.0


def random_stream_cipher(n: int, s: int, seed: int) -> KeystreamSpec:
    """``2**s`` keystream words drawn i.i.d. uniform on ``n`` bits."""
    if n < 1 or s < 0:
        raise ValueError("need n >= 1 and s >= 0")
    if n > MAX_RANDOM_STREAM_BITS:
        raise ResourceLimitError(f"random keystreams limited to n <= {MAX_RANDOM_STREAM_BITS}")
    rng = np.random.default_rng(seed)
    words = rng.integers(0, 2**n, size=2**s, dtype=np.uint64)
    return KeystreamSpec(n=n, s=s, streams=tuple(int(w) for w in words), seed=seed)


# -- expander ciphers -------------------------------------------------------


def random_expander_spec(n: int, d: int, seed: int) -> ExpanderSpec:
    rng = np.random.default_rng(seed)
    perms = tuple(tuple(rng.permutation(2**n).tolist()) for _ in range(d))
    return ExpanderSpec(n=n, d=d, permutations=perms, seed=seed)


def build_expander_cipher(spec: ExpanderSpec, label: str | None = None) -> Cipher:
    size = spec.n_vertices
    return Cipher(
        n_messages=size,
        n_keys=spec.degree,
        n_ciphertexts=size,
        table=expander_table(spec.permutations, size),
        label=label or f"expander(n={spec.n},d={spec.d},seed={spec.seed})",
        permutations=spec.permutations,
    )


def expander_adjacency(spec: ExpanderSpec) -> np.ndarray:
    size = spec.n_vertices
    A = np.zeros((size, size), dtype=np.int64)
    idx = np.arange(size)
    for p in spec.permutations:
        p = np.asarray(p)
        np.add.at(A, (idx, p), 1)
        np.add.at(A, (p, idx), 1)
    return A


def expander_lambda2(spec: ExpanderSpec) -> float:
    """``|lambda_2(A)| = ||A - (deg/N) J||`` for the symmetrized multigraph."""
    size, deg = spec.n_vertices, spec.degree
    if size <= DENSE_LIMIT:
        M = expander_adjacency(spec) - deg / size
        return float(np.max(np.abs(np.linalg.eigvalsh(M))))
    perms = np.array(spec.permutations, dtype=np.int64)
    inverses = np.argsort(perms, axis=1)
    ones = np.full(size, 1.0 / math.sqrt(size))

    def matvec(v):
        # (A v)[m] = sum_i v[sigma_i(m)] + v[sigma_i^{-1}(m)]
        return v[perms].sum(axis=0) + v[inverses].sum(axis=0) - deg * ones * (ones @ v)

    return power_iteration_norm(matvec, matvec, size, orth=ones)


def expander_lambda2_rho(spec: ExpanderSpec) -> float:
    return min(expander_lambda2(spec) / spec.degree, 1.0)


@dataclass(frozen=True)
class RamanujanReport:
    lambda2: float
    degree: int
    rho: float
    threshold: float
    is_ramanujan: bool
    rho_cap: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def ramanujan_report(spec: ExpanderSpec) -> RamanujanReport:
    """Compare the measured second eigenvalue with the Ramanujan value ``2 sqrt(deg-1)``."""
    lam = expander_lambda2(spec)
    deg = spec.degree
    threshold = 2 * math.sqrt(deg - 1)
    return RamanujanReport(
        lambda2=lam,
        degree=deg,
        rho=min(lam / deg, 1.0),
        threshold=threshold,
        is_ramanujan=lam <= threshold + 1e-9,
        rho_cap=2 / math.sqrt(deg),
    )


# -- generic builders -------------------------------------------------------


def cascade(c1: Cipher, c2: Cipher) -> Cipher:
    """Encrypt with ``c1`` and then ``c2`` under independent keys.

    Key index ``k1 * |K2| + k2`` stands for the pair ``(k1, k2)``.
    """
    if c1.n_ciphertexts != c2.n_messages:
        raise CipherError(
            f"cannot cascade: first cipher emits {c1.n_ciphertexts} symbols, "
            f"second accepts {c2.n_messages}"
        )
    table = c2.table[:, c1.table]  # (k2, k1, m)
    table = table.transpose(1, 0, 2).reshape(c1.n_keys * c2.n_keys, c1.n_messages)
    keystream = None
    if c1.keystream is not None and c2.keystream is not None:
        keystream = tuple(a ^ b for a in c1.keystream for b in c2.keystream)
    return Cipher(
        n_messages=c1.n_messages,
        n_keys=c1.n_keys * c2.n_keys,
        n_ciphertexts=c2.n_ciphertexts,
        table=table,
        label=f"cascade({c1.label},{c2.label})",
        keystream=keystream,
    )


def random_cipher(n_messages: int, n_keys: int, n_ciphertexts: int | None = None,
                  seed: int = 0) -> Cipher:
    """Each key row is an independent uniformly random injection into the ciphertexts."""
    n_ciphertexts = n_messages if n_ciphertexts is None else n_ciphertexts
    rng = np.random.default_rng(seed)
    table = np.stack([rng.permutation(n_ciphertexts)[:n_messages] for _ in range(n_keys)])
    return Cipher(
        n_messages=n_messages,
        n_keys=n_keys,
        n_ciphertexts=n_ciphertexts,
        table=table,
        label=f"random(M={n_messages},K={n_keys},C={n_ciphertexts},seed={seed})",
    )


def permutation_cipher(perm, label: str = "bijection") -> Cipher:
    """Single-key cipher applying a fixed bijection."""
    perm = np.asarray(perm, dtype=np.int64)
    return Cipher(n_messages=perm.size, n_keys=1, n_ciphertexts=perm.size,
                  table=perm[None, :], label=label)


def shift_cipher(modulus: int, shifts, label: str) -> Cipher:
    """``E(k, m) = m + shifts[k] mod modulus``."""
    shifts = np.asarray(shifts, dtype=np.int64)
    table = (np.arange(modulus)[None, :] + shifts[:, None]) % modulus
    return Cipher(n_messages=modulus, n_keys=shifts.size, n_ciphertexts=modulus,
                  table=table, label=label)


# -- reference ciphers ------------------------------------------------------


def otp(n: int) -> Cipher:
    return build_stream_cipher(KeystreamSpec(n=n, s=n, streams=range(2**n)), label=f"otp({n})")


def msb(n: int, s: int) -> Cipher:
    """Perfectly encrypt the top ``s`` bits and send the low ``n - s`` bits in clear."""
    if not 0 <= s <= n:
        raise ValueError("need 0 <= s <= n")
    streams = [k << (n - s) for k in range(2**s)]
    return build_stream_cipher(KeystreamSpec(n=n, s=s, streams=streams), label=f"msb({n},{s})")


def counterexample(n: int) -> Cipher:
    """Shift cipher mod ``2**n - 1`` that leaves the top message ``2**n - 1`` fixed.

    Strongly secret as ``n`` grows, yet the fixed point is always visible.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    size = 2**n
    m = np.arange(size)[None, :]
    k = np.arange(size)[:, None]
    table = np.where(m < size - 1, (m + k) % (size - 1), size - 1)
    return Cipher(n_messages=size, n_keys=size, n_ciphertexts=size, table=table,
                  label=f"counterexample({n})")


REFERENCE_NAMES = ("c1", "c2", "otp(n)", "msb(n,s)", "counterexample(n)")
_REF_RE = re.compile(r"^\s*([a-z0-9_]+)\s*(?:\(\s*([0-9,\s]*)\))?\s*$")


def reference_cipher(name: str) -> Cipher:
    """Build a named cipher: ``c1``, ``c2``, ``otp(n)``, ``msb(n,s)``, ``counterexample(n)``."""
    match = _REF_RE.match(name.lower())
    if not match:
        raise KeyError(f"unknown reference cipher {name!r}; choose from {', '.join(REFERENCE_NAMES)}")
    base, arglist = match.groups()
    args = [int(a) for a in arglist.split(",") if a.strip()] if arglist else []
    builders = {
        ("c1", 0): lambda: shift_cipher(4, [0, 2], "c1"),
        ("c2", 0): lambda: shift_cipher(4, [0, 1], "c2"),
        ("otp", 1): lambda: otp(*args),
        ("msb", 2): lambda: msb(*args),
        ("counterexample", 1): lambda: counterexample(*args),
    }
    try:
        build = builders[(base, len(args))]
    except KeyError:
        raise KeyError(
            f"unknown reference cipher {name!r}; choose from {', '.join(REFERENCE_NAMES)}"
        ) from None
    return build()
