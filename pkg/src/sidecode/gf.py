"""Exact arithmetic in the prime field GF(p).

All source symbols, codewords and matrix entries in this package are
residues modulo a prime p with 2 <= p <= 251 (one byte per symbol).
``FieldSpec`` carries the modulus; ``FieldElement`` wraps a single residue
for the scalar API, while vector/matrix code works directly on integer
numpy arrays tagged with a ``FieldSpec``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_PRIME = 251


def is_prime(p: int) -> bool:
    """Trial-division primality test, adequate for p <= 251."""
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class FieldSpec:
    """The prime field GF(p).

    Raises ValueError unless 2 <= p <= 251 and p is prime.
    """

    p: int

    def __post_init__(self):
        if not isinstance(self.p, int):
            raise ValueError(f"field order must be an int, got {type(self.p).__name__}")
        if self.p > MAX_PRIME:
            raise ValueError(f"field order {self.p} exceeds the supported maximum {MAX_PRIME}")
        if not is_prime(self.p):
            raise ValueError(f"field order must be prime, got {self.p}")

    def element(self, value: int) -> "FieldElement":
        return FieldElement(value % self.p, self)

    def elements(self) -> list["FieldElement"]:
        """All p elements, in residue order."""
        return [FieldElement(v, self) for v in range(self.p)]

    def validate_array(self, a: np.ndarray) -> np.ndarray:
        """Check every entry is a residue in [0, p); returns int64 view/copy."""
        arr = np.asarray(a)
        if arr.size and (arr.min() < 0 or arr.max() >= self.p):
            raise ValueError(f"array entries must lie in [0, {self.p})")
        return arr.astype(np.int64)

    def inv_table(self) -> np.ndarray:
        """Multiplicative inverses as an array; index 0 is unused (set to 0)."""
        table = np.zeros(self.p, dtype=np.int64)
        for v in range(1, self.p):
            table[v] = pow(v, self.p - 2, self.p)
        return table

    def __repr__(self) -> str:
        return f"GF({self.p})"


@dataclass(frozen=True)
class FieldElement:
    """A residue in [0, p) together with its field."""

    value: int
    spec: FieldSpec

    def __post_init__(self):
        if not 0 <= self.value < self.spec.p:
            raise ValueError(f"value {self.value} outside [0, {self.spec.p})")

    def _check_spec(self, other: "FieldElement") -> None:
        if self.spec != other.spec:
            raise ValueError(f"field mismatch: {self.spec} vs {other.spec}")

    def __add__(self, other: "FieldElement") -> "FieldElement":
        self._check_spec(other)
        return FieldElement((self.value + other.value) % self.spec.p, self.spec)

    def __sub__(self, other: "FieldElement") -> "FieldElement":
        self._check_spec(other)
        return FieldElement((self.value - other.value) % self.spec.p, self.spec)

    def __mul__(self, other: "FieldElement") -> "FieldElement":
        self._check_spec(other)
        return FieldElement((self.value * other.value) % self.spec.p, self.spec)

    def __neg__(self) -> "FieldElement":
        return FieldElement(-self.value % self.spec.p, self.spec)

    def inverse(self) -> "FieldElement":
        """Multiplicative inverse; raises ZeroDivisionError for 0."""
        if self.value == 0:
            raise ZeroDivisionError("zero has no multiplicative inverse")
        return FieldElement(pow(self.value, self.spec.p - 2, self.spec.p), self.spec)

    def __int__(self) -> int:
        return self.value


def add(a: FieldElement, b: FieldElement) -> FieldElement:
    return a + b


def sub(a: FieldElement, b: FieldElement) -> FieldElement:
    return a - b


def mul(a: FieldElement, b: FieldElement) -> FieldElement:
    return a * b


def inv(a: FieldElement) -> FieldElement:
    return a.inverse()
