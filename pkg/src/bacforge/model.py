"""Array-code data model: a code is a list of buckets, each bucket a list of
generator columns over a prime field.

Encoding x (a length-n row vector) places <x, g> into a bucket for each of the
bucket's columns g, so a bucket is exactly the column set of its generator
matrix.  Under the linear-response model a node may answer with any linear
combination of its stored symbols, hence everything observable about a bucket
is its column span; `cap_and_reduce` exploits that to shrink buckets without
changing recoverability.

Symbol and bucket indices are 1-based at the public API (0-based internally).
CodeSpec and Codeword are immutable and safe to share between workers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .field import Echelon, PrimeField, dot

CODE_FORMAT = "bacforge-code-v1"

Column = tuple  # length-n tuple of residues
Bucket = tuple  # tuple of Columns


@dataclass(frozen=True)
class CodeSpec:
    """An (n, N, k, m) array code: m buckets of generator columns over F_p.

    k is not part of the data; it is a property a code is verified against.
    """

    field: PrimeField
    n: int
    buckets: tuple

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be positive, got {self.n}")
        if len(self.buckets) < 1:
            raise ValueError("a code needs at least one bucket")
        norm = []
        for b, bucket in enumerate(self.buckets):
            cols = []
            for col in bucket:
                if len(col) != self.n:
                    raise ValueError(
                        f"bucket {b + 1} has a column of length {len(col)}, expected {self.n}"
                    )
                cols.append(self.field.normalize_vector(col))
            norm.append(tuple(cols))
        object.__setattr__(self, "buckets", tuple(norm))

    @property
    def m(self) -> int:
        return len(self.buckets)

    @property
    def bucket_sizes(self) -> tuple:
        return tuple(len(b) for b in self.buckets)

    def bucket(self, ell: int) -> Bucket:
        """Bucket by 1-based index."""
        if not 1 <= ell <= self.m:
            raise ValueError(f"bucket index {ell} out of range [1, {self.m}]")
        return self.buckets[ell - 1]


@dataclass(frozen=True)
class Codeword:
    """Per-bucket encoded values; shape mirrors the originating CodeSpec."""

    values: tuple


def total_length(code: CodeSpec) -> int:
    """N = sum of bucket sizes."""
    return sum(len(b) for b in code.buckets)


def encode(code: CodeSpec, x: Sequence[int]) -> Codeword:
    """Encode a data vector: bucket entry s is <x, column s>."""
    if len(x) != code.n:
        raise ValueError(f"data length {len(x)} != n = {code.n}")
    xv = code.field.normalize_vector(x)
    values = tuple(
        tuple(dot(xv, col, code.field) for col in bucket) for bucket in code.buckets
    )
    return Codeword(values)


def bucket_set_recovers(code: CodeSpec, bucket_indices: Iterable[int], i: int) -> bool:
    """True iff the unit vector e_i lies in the joint column span of the
    given buckets (linear-response recoverability).  Indices are 1-based."""
    if not 1 <= i <= code.n:
        raise ValueError(f"symbol index {i} out of range [1, {code.n}]")
    ech = Echelon(code.field, code.n)
    for ell in sorted(set(bucket_indices)):
        if not 1 <= ell <= code.m:
            raise ValueError(f"bucket index {ell} out of range [1, {code.m}]")
        for col in code.buckets[ell - 1]:
            ech.add(col)
    return ech.contains_unit(i - 1)


def cap_and_reduce(code: CodeSpec) -> CodeSpec:
    """Replace each bucket by a deterministic basis of its column space
    (lowest-index-first column selection).

    Bucket spans, and therefore every recoverability outcome, are unchanged;
    the result has bucket sizes rank(G_ell) <= n and the map is idempotent.
    """
    new_buckets = []
    for bucket in code.buckets:
        ech = Echelon(code.field, code.n)
        kept = tuple(col for col in bucket if ech.add(col))
        new_buckets.append(kept)
    return CodeSpec(code.field, code.n, tuple(new_buckets))


def codes_equal(a: CodeSpec, b: CodeSpec, up_to_bucket_order: bool = False) -> bool:
    """Structural equality of two codes.

    With `up_to_bucket_order`, buckets are compared as a multiset (bucket
    relabelings preserve every batch/PIR property).
    """
    if a.field.p != b.field.p or a.n != b.n or a.m != b.m:
        return False
    if not up_to_bucket_order:
        return a.buckets == b.buckets
    return sorted(a.buckets) == sorted(b.buckets)


def code_to_dict(code: CodeSpec, provenance: Optional[dict] = None) -> dict:
    """Canonical JSON structure; key order is part of the format."""
    out = {
        "format": CODE_FORMAT,
        "p": code.field.p,
        "n": code.n,
        "buckets": [[list(col) for col in bucket] for bucket in code.buckets],
    }
    if provenance is not None:
        out["provenance"] = provenance
    return out


def code_to_json(code: CodeSpec, provenance: Optional[dict] = None) -> str:
    return json.dumps(code_to_dict(code, provenance), separators=(",", ":"))


def code_from_dict(data: dict) -> tuple[CodeSpec, Optional[dict]]:
    """Parse the canonical structure; returns (code, provenance-or-None)."""
    if not isinstance(data, dict):
        raise ValueError("code JSON must be an object")
    if data.get("format") != CODE_FORMAT:
        raise ValueError(f"unsupported code format {data.get('format')!r}")
    allowed = {"format", "p", "n", "buckets", "provenance"}
    extra = set(data) - allowed
    if extra:
        raise ValueError(f"unexpected keys in code JSON: {sorted(extra)}")
    fieldobj = PrimeField(int(data["p"]))
    n = int(data["n"])
    buckets = tuple(
        tuple(tuple(int(v) for v in col) for col in bucket) for bucket in data["buckets"]
    )
    code = CodeSpec(fieldobj, n, buckets)
    return code, data.get("provenance")


def code_from_json(text: str) -> tuple[CodeSpec, Optional[dict]]:
    return code_from_dict(json.loads(text))


def load_code(path: str) -> tuple[CodeSpec, Optional[dict]]:
    with open(path, "r", encoding="utf-8") as fh:
        return code_from_json(fh.read())


def save_code(path: str, code: CodeSpec, provenance: Optional[dict] = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(code_to_json(code, provenance))
        fh.write("\n")
