"""Deterministic symmetric-key ciphers and the (message, ciphertext) joint they induce.

A cipher is a dense ``n_keys x n_messages`` table of ciphertext indices. The
key is always uniform. Each key row must be injective so that decryption
exists.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .probcore import JointPmf, Pmf

FORMAT_VERSION = 1
MAX_ALPHABET = 2**16
MAX_KEYS = 2**16
MAX_TABLE_ENTRIES = 2**26


class CipherError(ValueError):
    """Base class for cipher construction and parsing failures."""


class CipherValidationError(CipherError):
    """A key row maps two messages to the same ciphertext, or a size invariant fails."""

    def __init__(self, message, key=None, messages=None):
        super().__init__(message)
        self.key = key
        self.messages = messages


class CipherFormatError(CipherError):
    """Malformed cipher file."""

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)
        self.line = line
        self.column = column


@dataclass(frozen=True, eq=False)
class Cipher:
    """Encryption table ``table[k, m] = E(k, m)`` with a uniform key.

    ``keystream`` is set for XOR stream ciphers (``table[k, m] = m ^ keystream[k]``)
    and ``permutations`` for expander ciphers built from ``d`` permutations and
    their inverses. Both only affect serialization and fast paths.
    """

    n_messages: int
    n_keys: int
    n_ciphertexts: int
    table: np.ndarray
    label: str = ""
    keystream: tuple[int, ...] | None = field(default=None)
    permutations: tuple[tuple[int, ...], ...] | None = field(default=None)

    def __post_init__(self):
        table = np.array(self.table, dtype=np.int64)
        object.__setattr__(self, "table", table)
        table.setflags(write=False)
        _check_shape(self)
        validate(self)

    @property
    def message_bits(self) -> float:
        return math.log2(self.n_messages)

    @property
    def key_bits(self) -> float:
        return math.log2(self.n_keys)

    @property
    def is_stream(self) -> bool:
        return self.keystream is not None

    def encrypt(self, key: int, message: int) -> int:
        return int(self.table[key, message])

    def decrypt(self, key: int, ciphertext: int) -> int:
        hits = np.flatnonzero(self.table[key] == ciphertext)
        if hits.size == 0:
            raise CipherError(f"ciphertext {ciphertext} is not produced by key {key}")
        return int(hits[0])

    def __eq__(self, other):
        if not isinstance(other, Cipher):
            return NotImplemented
        return (
            self.n_messages == other.n_messages
            and self.n_keys == other.n_keys
            and self.n_ciphertexts == other.n_ciphertexts
            and self.label == other.label
            and self.keystream == other.keystream
            and self.permutations == other.permutations
            and np.array_equal(self.table, other.table)
        )

    def __hash__(self):
        return hash((self.n_messages, self.n_keys, self.n_ciphertexts, self.table.tobytes()))

    def __repr__(self):
        return (
            f"Cipher(label={self.label!r}, n_messages={self.n_messages}, "
            f"n_keys={self.n_keys}, n_ciphertexts={self.n_ciphertexts})"
        )


@dataclass(frozen=True)
class MessageDistributionScenario:
    """A cipher together with the pmf the messages are drawn from."""

    cipher: Cipher
    message_pmf: Pmf | None = None

    def __post_init__(self):
        if self.message_pmf is None:
            object.__setattr__(self, "message_pmf", Pmf.uniform(self.cipher.n_messages))
        elif self.message_pmf.size != self.cipher.n_messages:
            raise CipherValidationError(
                f"message pmf has {self.message_pmf.size} outcomes, "
                f"cipher has {self.cipher.n_messages} messages"
            )


def _check_shape(c: Cipher) -> None:
    for name in ("n_messages", "n_keys", "n_ciphertexts"):
        if getattr(c, name) < 1:
            raise CipherValidationError(f"{name} must be positive")
    if c.n_ciphertexts < c.n_messages:
        raise CipherValidationError(
            f"n_ciphertexts={c.n_ciphertexts} is smaller than n_messages={c.n_messages}"
        )
    if c.n_messages > MAX_ALPHABET or c.n_ciphertexts > MAX_ALPHABET:
        raise CipherValidationError(f"alphabets are limited to {MAX_ALPHABET} symbols")
    if c.n_keys > MAX_KEYS:
        raise CipherValidationError(f"key space is limited to {MAX_KEYS} keys")
    if c.n_keys * c.n_messages > MAX_TABLE_ENTRIES:
        raise CipherValidationError(f"table is limited to {MAX_TABLE_ENTRIES} entries")
    if c.table.shape != (c.n_keys, c.n_messages):
        raise CipherValidationError(
            f"table shape {c.table.shape} does not match (n_keys, n_messages)="
            f"({c.n_keys}, {c.n_messages})"
        )
    if c.table.size and (c.table.min() < 0 or c.table.max() >= c.n_ciphertexts):
        raise CipherValidationError("ciphertext index out of range")


def validate(c: Cipher) -> Cipher:
    """Return ``c`` if every key row is injective, else raise naming the first collision."""
    rows = np.sort(c.table, axis=1)
    dup = rows[:, 1:] == rows[:, :-1]
    if np.any(dup):
        key = int(np.flatnonzero(dup.any(axis=1))[0])
        row = c.table[key]
        seen = {}
        for m, ct in enumerate(row.tolist()):
            if ct in seen:
                raise CipherValidationError(
                    f"key {key} maps messages {seen[ct]} and {m} to ciphertext {ct}",
                    key=key,
                    messages=(seen[ct], m),
                )
            seen[ct] = m
    return c


def adjacency_counts(c: Cipher) -> np.ndarray:
    """``A[m, c] = |{k : E(k, m) = c}|`` as a dense integer matrix."""
    A = np.zeros((c.n_messages, c.n_ciphertexts), dtype=np.int64)
    rows = np.broadcast_to(np.arange(c.n_messages), c.table.shape)
    np.add.at(A, (rows.ravel(), c.table.ravel()), 1)
    return A


def induced_joint(sc: MessageDistributionScenario | Cipher) -> JointPmf:
    """Joint pmf ``p(m, c) = p(m) * |{k : E(k,m) = c}| / |K|``."""
    if isinstance(sc, Cipher):
        sc = MessageDistributionScenario(sc)
    c = sc.cipher
    A = adjacency_counts(c).astype(np.float64)
    return JointPmf(A * (sc.message_pmf.probs[:, None] / c.n_keys))


def keystream_hex_digits(n_messages: int) -> int:
    bits = int(math.log2(n_messages))
    return max(1, -(-bits // 4))


def _is_power_of_two(x: int) -> bool:
    return x > 0 and x & (x - 1) == 0


def to_dict(c: Cipher) -> dict:
    doc = {
        "format_version": FORMAT_VERSION,
        "label": c.label,
        "n_messages": c.n_messages,
        "n_keys": c.n_keys,
        "n_ciphertexts": c.n_ciphertexts,
    }
    if c.keystream is not None:
        width = keystream_hex_digits(c.n_messages)
        doc["keystream"] = [format(w, f"0{width}x") for w in c.keystream]
    elif c.permutations is not None:
        doc["permutations"] = [list(p) for p in c.permutations]
    else:
        doc["table"] = c.table.tolist()
    return doc


def serialize(c: Cipher) -> bytes:
    return (json.dumps(to_dict(c), indent=1) + "\n").encode("utf-8")


def _int_field(doc, name):
    val = doc.get(name)
    if not isinstance(val, int) or isinstance(val, bool):
        raise CipherFormatError(f"field {name!r} must be an integer")
    return val


def from_dict(doc: dict) -> Cipher:
    if not isinstance(doc, dict):
        raise CipherFormatError("top-level value must be an object")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise CipherFormatError(f"unsupported format_version {version!r}")
    label = doc.get("label", "")
    if not isinstance(label, str):
        raise CipherFormatError("field 'label' must be a string")
    n_messages = _int_field(doc, "n_messages")
    n_keys = _int_field(doc, "n_keys")
    n_ciphertexts = _int_field(doc, "n_ciphertexts")
    present = [k for k in ("table", "keystream", "permutations") if k in doc]
    if len(present) != 1:
        raise CipherFormatError("exactly one of 'table', 'keystream', 'permutations' is required")
    if n_ciphertexts < n_messages:
        raise CipherValidationError(
            f"n_ciphertexts={n_ciphertexts} is smaller than n_messages={n_messages}"
        )

    kind = present[0]
    keystream = permutations = None
    if kind == "table":
        rows = doc["table"]
        if not isinstance(rows, list) or len(rows) != n_keys:
            raise CipherFormatError(f"'table' must be a list of {n_keys} rows")
        for k, row in enumerate(rows):
            if not isinstance(row, list) or len(row) != n_messages:
                raise CipherFormatError(f"table row {k} must have {n_messages} entries")
            if not all(isinstance(x, int) and not isinstance(x, bool) for x in row):
                raise CipherFormatError(f"table row {k} has a non-integer entry")
        table = np.array(rows, dtype=np.int64).reshape(n_keys, n_messages)
    elif kind == "keystream":
        words = doc["keystream"]
        if not _is_power_of_two(n_messages) or n_ciphertexts != n_messages:
            raise CipherFormatError("keystream ciphers need n_ciphertexts = n_messages = 2^n")
        if not isinstance(words, list) or len(words) != n_keys:
            raise CipherFormatError(f"'keystream' must be a list of {n_keys} hex strings")
        width = keystream_hex_digits(n_messages)
        parsed = []
        for k, w in enumerate(words):
            if not isinstance(w, str) or len(w) != width:
                raise CipherFormatError(f"keystream word {k} must be {width} hex digits")
            try:
                val = int(w, 16)
            except ValueError:
                raise CipherFormatError(f"keystream word {k} is not hex: {w!r}") from None
            if val >= n_messages:
                raise CipherValidationError(f"keystream word {k} exceeds the message width")
            parsed.append(val)
        keystream = tuple(parsed)
        ks = np.array(parsed, dtype=np.int64)
        table = np.arange(n_messages, dtype=np.int64)[None, :] ^ ks[:, None]
    else:
        perms = doc["permutations"]
        if not isinstance(perms, list) or 2 * len(perms) != n_keys:
            raise CipherFormatError("'permutations' must hold n_keys/2 index maps")
        if n_ciphertexts != n_messages:
            raise CipherFormatError("expander ciphers need n_ciphertexts = n_messages")
        for i, p in enumerate(perms):
            if not isinstance(p, list) or len(p) != n_messages:
                raise CipherFormatError(f"permutation {i} must have {n_messages} entries")
            if not all(isinstance(x, int) and not isinstance(x, bool) for x in p):
                raise CipherFormatError(f"permutation {i} has a non-integer entry")
        permutations = tuple(tuple(p) for p in perms)
        table = expander_table(permutations, n_messages)

    return Cipher(
        n_messages=n_messages,
        n_keys=n_keys,
        n_ciphertexts=n_ciphertexts,
        table=table,
        label=label,
        keystream=keystream,
        permutations=permutations,
    )


def expander_table(permutations, n_vertices: int) -> np.ndarray:
    """Keys ``[0, d)`` apply each permutation, keys ``[d, 2d)`` apply its inverse."""
    forward = np.array(permutations, dtype=np.int64).reshape(len(permutations), n_vertices)
    if forward.size and (forward.min() < 0 or forward.max() >= n_vertices):
        raise CipherValidationError("permutation entry out of range")
    inverse = np.zeros_like(forward)
    for i, p in enumerate(forward):
        if np.unique(p).size != n_vertices:
            raise CipherValidationError(f"permutation {i} is not a bijection", key=i)
        inverse[i, p] = np.arange(n_vertices)
    return np.concatenate([forward, inverse], axis=0)


def deserialize(data: bytes | str) -> Cipher:
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise CipherFormatError(f"not UTF-8 (byte offset {exc.start})") from None
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise CipherFormatError(exc.msg, line=exc.lineno, column=exc.colno) from None
    return from_dict(doc)


def save(c: Cipher, path: str | Path) -> None:
    Path(path).write_bytes(serialize(c))


def load(path: str | Path) -> Cipher:
    return deserialize(Path(path).read_bytes())
