"""Control bit string generation, serialization, and sanity diagnostics.

Three kinds of source feed the switch: a classical random-bit generator
(fidelity pinned to 1/2) and qubit sources whose recorded bits are still
fair Bernoulli draws, because measuring an equal superposition is 50/50
regardless of readout fidelity. Fidelity rides along as metadata and only
enters the signal model.
"""

from dataclasses import dataclass
from enum import Enum
import math
import os

import numpy as np


class SourceKind(str, Enum):
    CLASSICAL = "classical"
    QUBIT = "qubit"


class BitFileError(ValueError):
    """Base class for bit-file parsing failures."""


class MalformedHeaderError(BitFileError):
    pass


class InvalidBitError(BitFileError):
    pass


class CountMismatchError(BitFileError):
    pass


@dataclass(frozen=True)
class SourceSpec:
    id: str
    kind: SourceKind
    fidelity: float
    count: int

    def __post_init__(self):
        if self.kind is SourceKind.CLASSICAL and self.fidelity != 0.5:
            raise ValueError(f"classical source {self.id!r} must have fidelity exactly 1/2")
        if not 0.5 <= self.fidelity <= 1.0:
            raise ValueError(f"fidelity {self.fidelity} outside [1/2, 1]")
        if self.count < 1:
            raise ValueError(f"count {self.count} < 1")


@dataclass(frozen=True)
class BitString:
    source: SourceSpec
    bits: np.ndarray  # uint8, values in {0, 1}

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=np.uint8)
        object.__setattr__(self, "bits", bits)
        if bits.ndim != 1 or len(bits) != self.source.count:
            raise ValueError(
                f"bit count {len(bits)} does not match source count {self.source.count}"
            )
        if bits.size and bits.max() > 1:
            raise ValueError("bits must be 0 or 1")

    def __eq__(self, other):
        if not isinstance(other, BitString):
            return NotImplemented
        return self.source == other.source and np.array_equal(self.bits, other.bits)


def generate_classical(source_id: str, n: int, rng: np.random.Generator) -> BitString:
    """n independent fair bits from a classical generator; fidelity 1/2 by definition."""
    if n < 1:
        raise ValueError(f"n {n} < 1")
    spec = SourceSpec(id=source_id, kind=SourceKind.CLASSICAL, fidelity=0.5, count=n)
    return BitString(source=spec, bits=rng.integers(0, 2, size=n, dtype=np.uint8))


def generate_qubit(source_id: str, n: int, fidelity: float, rng: np.random.Generator) -> BitString:
    """n recorded measurements of an equal-superposition qubit.

    The recorded bit distribution is fair regardless of fidelity; fidelity is
    metadata consumed downstream by the signal model.
    """
    if n < 1:
        raise ValueError(f"n {n} < 1")
    spec = SourceSpec(id=source_id, kind=SourceKind.QUBIT, fidelity=fidelity, count=n)
    return BitString(source=spec, bits=rng.integers(0, 2, size=n, dtype=np.uint8))


def write_bits(bitstring: BitString, path: str | os.PathLike) -> None:
    """Write the one-bit-per-line file format with its single header line."""
    src = bitstring.source
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# id={src.id} kind={src.kind.value} fidelity={src.fidelity!r} n={src.count}\n")
        fh.write("\n".join(str(int(b)) for b in bitstring.bits))
        fh.write("\n")


def ingest_bits(path: str | os.PathLike) -> BitString:
    """Parse a bit file back into a BitString; header and body validated strictly."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        body = fh.read()

    if not header.startswith("# "):
        raise MalformedHeaderError(f"{path}: missing '# ' header line")
    fields = {}
    for token in header[2:].split():
        if "=" not in token:
            raise MalformedHeaderError(f"{path}: bad header token {token!r}")
        key, value = token.split("=", 1)
        fields[key] = value
    try:
        source_id = fields["id"]
        kind = SourceKind(fields["kind"])
        fidelity = float(fields["fidelity"])
        count = int(fields["n"])
    except (KeyError, ValueError) as exc:
        raise MalformedHeaderError(f"{path}: invalid header fields: {exc}") from exc

    lines = body.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    bits = np.empty(len(lines), dtype=np.uint8)
    for i, line in enumerate(lines):
        if line == "0":
            bits[i] = 0
        elif line == "1":
            bits[i] = 1
        else:
            raise InvalidBitError(f"{path}: line {i + 2}: expected '0' or '1', got {line!r}")
    if len(bits) != count:
        raise CountMismatchError(f"{path}: header declares n={count} but body has {len(bits)} bits")

    spec = SourceSpec(id=source_id, kind=kind, fidelity=fidelity, count=count)
    return BitString(source=spec, bits=bits)


@dataclass(frozen=True)
class BiasDiagnostics:
    ones_fraction: float
    longest_run: int
    z_score: float


def bias_diagnostics(bitstring: BitString) -> BiasDiagnostics:
    """Sanity screen: ones fraction, longest run of equal bits, binomial z-score."""
    bits = bitstring.bits
    n = len(bits)
    if n == 0:
        raise ValueError("empty bit string")
    ones = int(bits.sum())
    # run lengths from positions where the value changes
    changes = np.flatnonzero(np.diff(bits.astype(np.int8)))
    boundaries = np.concatenate(([-1], changes, [n - 1]))
    longest = int(np.max(np.diff(boundaries)))
    z = (ones - n / 2) / math.sqrt(n / 4)
    return BiasDiagnostics(ones_fraction=ones / n, longest_run=longest, z_score=z)
