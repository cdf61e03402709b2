"""Blinding protocol: permute the combined bit strings, persist the key, invert later.

The permutation key maps each blinded cycle position back to its
(source_id, within-source index) origin. It lives in its own file, written
by the run step and read only by the explicit unblinding step; the blinded
summary must never touch it.
"""

from dataclasses import dataclass
import os
from typing import Sequence

import numpy as np

from .sources import BitString


class KeyFileError(ValueError):
    """Malformed key file content."""


class KeyBijectionError(ValueError):
    """Key entries do not form a bijection onto the sources."""


@dataclass(frozen=True)
class BlindingKey:
    entries: tuple  # of (source_id, within_source_index)
    seed_descriptor: str = ""

    def __post_init__(self):
        seen = set()
        per_source: dict[str, list[int]] = {}
        for entry in self.entries:
            if entry in seen:
                raise KeyBijectionError(f"duplicated key entry {entry}")
            seen.add(entry)
            sid, idx = entry
            per_source.setdefault(sid, []).append(idx)
        for sid, indices in per_source.items():
            if sorted(indices) != list(range(len(indices))):
                raise KeyBijectionError(
                    f"source {sid!r}: indices do not cover 0..{len(indices) - 1}"
                )

    def __len__(self) -> int:
        return len(self.entries)

    def source_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for sid, _ in self.entries:
            counts[sid] = counts.get(sid, 0) + 1
        return counts


def _fisher_yates(n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform permutation of range(n), drawn high-index-first from the stream."""
    perm = np.arange(n)
    u = rng.random(max(n - 1, 0))
    for step, i in enumerate(range(n - 1, 0, -1)):
        j = int(u[step] * (i + 1))
        perm[i], perm[j] = perm[j], perm[i]
    return perm


def combine_and_permute(
    strings: Sequence[BitString],
    rng: np.random.Generator,
    seed_descriptor: str = "",
) -> tuple[np.ndarray, BlindingKey]:
    """Concatenate the sources and apply a uniformly random permutation.

    Returns the blinded bit sequence and the key mapping every blinded
    position to its origin.
    """
    if not strings or all(len(s.bits) == 0 for s in strings):
        raise ValueError("need at least one non-empty bit string")
    ids = [s.source.id for s in strings]
    if len(set(ids)) != len(ids):
        raise ValueError(f"duplicate source ids: {ids}")

    concat_bits = np.concatenate([s.bits for s in strings])
    origins = [
        (s.source.id, i) for s in strings for i in range(s.source.count)
    ]
    perm = _fisher_yates(len(concat_bits), rng)
    blinded = concat_bits[perm]
    entries = tuple(origins[p] for p in perm)
    return blinded, BlindingKey(entries=entries, seed_descriptor=seed_descriptor)


def unblind(readings: Sequence, key: BlindingKey) -> dict[str, np.ndarray]:
    """Regroup blinded readings by source, in original within-source order.

    `readings` may be CycleReading objects (their .reading is used) or bare
    values, ordered by blinded position.
    """
    if len(readings) != len(key):
        raise ValueError(f"{len(readings)} readings but key has {len(key)} entries")
    values = np.array(
        [getattr(r, "reading", r) for r in readings], dtype=float
    )
    out: dict[str, np.ndarray] = {
        sid: np.empty(count) for sid, count in key.source_counts().items()
    }
    for pos, (sid, idx) in enumerate(key.entries):
        out[sid][idx] = values[pos]
    return out


def write_key(key: BlindingKey, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# seed={key.seed_descriptor}\n")
        fh.write("blinded_index,source_id,source_index\n")
        for pos, (sid, idx) in enumerate(key.entries):
            fh.write(f"{pos},{sid},{idx}\n")


def read_key(path: str | os.PathLike) -> BlindingKey:
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline().rstrip("\n")
        if not first.startswith("# seed="):
            raise KeyFileError(f"{path}: missing '# seed=' comment line")
        descriptor = first[len("# seed="):]
        header = fh.readline().rstrip("\n")
        if header != "blinded_index,source_id,source_index":
            raise KeyFileError(f"{path}: unexpected key header {header!r}")
        entries = []
        for line_no, line in enumerate(fh, start=3):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise KeyFileError(f"{path}: line {line_no}: expected 3 fields")
            try:
                pos = int(parts[0])
                idx = int(parts[2])
            except ValueError as exc:
                raise KeyFileError(f"{path}: line {line_no}: {exc}") from exc
            if pos != len(entries):
                raise KeyFileError(
                    f"{path}: line {line_no}: blinded_index {pos} out of order"
                )
            entries.append((parts[1], idx))
    return BlindingKey(entries=tuple(entries), seed_descriptor=descriptor)
