"""Truth tables, partial truth tables, keys and permutation isomorphism.

Row ``r`` of an N-variable table assigns variable ``i`` (1-based) the bit
``(r >> (N - i)) & 1``, so the first variable is the most significant bit.
Internally a table is a Python int whose bit ``r`` holds row ``r``; the
textual form lists rows 0..2^N-1 left to right.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

MAX_VARS = 24


class TruthTableError(ValueError):
    pass


@lru_cache(maxsize=None)
def var_bits(num_vars: int, i: int) -> int:
    """Bit pattern of variable ``i`` (1-based) over all rows."""
    if not 1 <= i <= num_vars:
        raise TruthTableError(f"variable index {i} out of range 1..{num_vars}")
    shift = num_vars - i
    out = 0
    for r in range(1 << num_vars):
        if (r >> shift) & 1:
            out |= 1 << r
    return out


def full_mask(num_vars: int) -> int:
    return (1 << (1 << num_vars)) - 1


@dataclass(frozen=True, order=True)
class TruthTable:
    num_vars: int
    bits: int

    def __post_init__(self) -> None:
        if not 0 <= self.num_vars <= MAX_VARS:
            raise TruthTableError(f"unsupported variable count {self.num_vars}")
        if self.bits < 0 or self.bits >> (1 << self.num_vars):
            raise TruthTableError("bits exceed table length")

    # construction -------------------------------------------------------
    @classmethod
    def from_str(cls, s: str) -> TruthTable:
        s = s.strip()
        length = len(s)
        n = length.bit_length() - 1
        if length == 0 or 1 << n != length:
            raise TruthTableError(f"table length {length} is not a power of two")
        bits = 0
        for r, ch in enumerate(s):
            if ch == "1":
                bits |= 1 << r
            elif ch != "0":
                raise TruthTableError(f"bad table character {ch!r}")
        return cls(n, bits)

    @classmethod
    def from_function(cls, num_vars: int, fn) -> TruthTable:
        bits = 0
        for r in range(1 << num_vars):
            row = tuple((r >> (num_vars - 1 - v)) & 1 for v in range(num_vars))
            if fn(*row):
                bits |= 1 << r
        return cls(num_vars, bits)

    @classmethod
    def var(cls, num_vars: int, i: int) -> TruthTable:
        return cls(num_vars, var_bits(num_vars, i))

    @classmethod
    def const(cls, num_vars: int, value: int) -> TruthTable:
        return cls(num_vars, full_mask(num_vars) if value else 0)

    # basic views ---------------------------------------------------------
    @property
    def length(self) -> int:
        return 1 << self.num_vars

    @property
    def mask(self) -> int:
        return full_mask(self.num_vars)

    def __str__(self) -> str:
        return "".join("1" if (self.bits >> r) & 1 else "0" for r in range(self.length))

    def __getitem__(self, row: int) -> int:
        return (self.bits >> row) & 1

    def __invert__(self) -> TruthTable:
        return TruthTable(self.num_vars, self.bits ^ self.mask)

    def _same(self, other: TruthTable) -> None:
        if other.num_vars != self.num_vars:
            raise TruthTableError("arity mismatch")

    def __and__(self, other: TruthTable) -> TruthTable:
        self._same(other)
        return TruthTable(self.num_vars, self.bits & other.bits)

    def __or__(self, other: TruthTable) -> TruthTable:
        self._same(other)
        return TruthTable(self.num_vars, self.bits | other.bits)

    def __xor__(self, other: TruthTable) -> TruthTable:
        self._same(other)
        return TruthTable(self.num_vars, self.bits ^ other.bits)

    def weight(self) -> int:
        return self.bits.bit_count()

    def is_constant(self) -> bool:
        return self.bits == 0 or self.bits == self.mask


# named functions -------------------------------------------------------------

def xor_tt(n: int) -> TruthTable:
    bits = 0
    for r in range(1 << n):
        if r.bit_count() & 1:
            bits |= 1 << r
    return TruthTable(n, bits)


def and_tt(n: int) -> TruthTable:
    return TruthTable(n, 1 << ((1 << n) - 1))


def or_tt(n: int) -> TruthTable:
    return TruthTable(n, full_mask(n) ^ 1)


# dependency ----------------------------------------------------------------------

def _check_index(tt: TruthTable, i: int) -> None:
    if not 1 <= i <= tt.num_vars:
        raise TruthTableError(f"variable index {i} out of range 1..{tt.num_vars}")


def cofactors(tt: TruthTable, i: int) -> tuple[int, int]:
    """Rows with x_i = 0 and x_i = 1, each shifted onto the x_i = 0 positions."""
    _check_index(tt, i)
    v = var_bits(tt.num_vars, i)
    shift = 1 << (tt.num_vars - i)
    lo = tt.bits & ~v & tt.mask
    hi = (tt.bits & v) >> shift
    return lo, hi


def depends_on(tt: TruthTable, i: int) -> bool:
    lo, hi = cofactors(tt, i)
    return lo != hi


def is_nondegenerate(tt: TruthTable) -> bool:
    return all(depends_on(tt, i) for i in range(1, tt.num_vars + 1))


def restrict_tt(tt: TruthTable, fixed: Mapping[int, int]) -> TruthTable:
    """Fix some variables; the result ranges over the rest in original order."""
    for i in fixed:
        _check_index(tt, i)
    if len(set(fixed)) != len(fixed):
        raise TruthTableError("index collision")
    n = tt.num_vars
    free = [i for i in range(1, n + 1) if i not in fixed]
    k = len(free)
    base = 0
    for i, b in fixed.items():
        if b:
            base |= 1 << (n - i)
    bits = 0
    for r in range(1 << k):
        row = base
        for pos, i in enumerate(free):
            if (r >> (k - 1 - pos)) & 1:
                row |= 1 << (n - i)
        if (tt.bits >> row) & 1:
            bits |= 1 << r
    return TruthTable(k, bits)


# keys -------------------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class Key:
    bits: tuple[int, ...]

    def __str__(self) -> str:
        return "".join(map(str, self.bits))

    def as_assignment(self, n: int) -> dict[int, int]:
        return {n + j + 1: b for j, b in enumerate(self.bits)}


def find_keys(g: TruthTable, f: TruthTable) -> list[Key]:
    """All extension assignments k (trailing variables of g) with g(x, k) = f(x)."""
    m = g.num_vars - f.num_vars
    if m < 0:
        raise TruthTableError("g has fewer variables than f")
    n = f.num_vars
    keys = []
    for k in itertools.product((0, 1), repeat=m):
        key = Key(tuple(k))
        if restrict_tt(g, key.as_assignment(n)) == f:
            keys.append(key)
    return keys


# permutations -------------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class Permutation:
    """Bijection on 1..N stored as images (pi(1), ..., pi(N))."""

    images: tuple[int, ...]

    def __post_init__(self) -> None:
        if sorted(self.images) != list(range(1, len(self.images) + 1)):
            raise TruthTableError(f"not a permutation: {self.images}")

    @classmethod
    def identity(cls, n: int) -> Permutation:
        return cls(tuple(range(1, n + 1)))

    @property
    def size(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i - 1]

    def inverse(self) -> Permutation:
        inv = [0] * self.size
        for i, j in enumerate(self.images, start=1):
            inv[j - 1] = i
        return Permutation(tuple(inv))

    def then(self, other: Permutation) -> Permutation:
        """Composite with apply_perm(apply_perm(t, self), other) == apply_perm(t, self.then(other))."""
        return Permutation(tuple(other(self(i)) for i in range(1, self.size + 1)))

    def __str__(self) -> str:
        return " ".join(map(str, self.images))


@lru_cache(maxsize=4096)
def _row_map(images: tuple[int, ...]) -> tuple[int, ...]:
    n = len(images)
    out = []
    for r in range(1 << n):
        src = 0
        for i in range(1, n + 1):
            # (pi(x))_i = x_{pi(i)}
            if (r >> (n - images[i - 1])) & 1:
                src |= 1 << (n - i)
        out.append(src)
    return tuple(out)


def apply_perm(tt: TruthTable, pi: Permutation) -> TruthTable:
    """Return the table of x -> tt(pi(x)) where (pi(x))_i = x_{pi(i)}."""
    if pi.size != tt.num_vars:
        raise TruthTableError("permutation arity mismatch")
    rm = _row_map(pi.images)
    bits = 0
    src = tt.bits
    for r, s in enumerate(rm):
        if (src >> s) & 1:
            bits |= 1 << r
    return TruthTable(tt.num_vars, bits)


def _var_signature(tt: TruthTable, i: int) -> tuple:
    """Permutation-invariant profile of one variable."""
    lo, hi = cofactors(tt, i)
    influence = (lo ^ hi).bit_count()
    # weight of the cofactor split by the number of other variables set
    n = tt.num_vars
    prof_lo = [0] * n
    prof_hi = [0] * n
    v = var_bits(n, i)
    for r in range(1 << n):
        if v >> r & 1:
            continue
        k = r.bit_count()
        prof_lo[k] += (tt.bits >> r) & 1
        prof_hi[k] += (tt.bits >> (r | (1 << (n - i)))) & 1
    return (influence, lo.bit_count(), hi.bit_count(), tuple(prof_lo), tuple(prof_hi))


def tt_isomorphic(a: TruthTable, b: TruthTable) -> Permutation | None:
    """Lexicographically least pi with apply_perm(a, pi) = b, or None."""
    if a.num_vars != b.num_vars:
        raise TruthTableError("arity mismatch")
    if a.weight() != b.weight():
        return None
    n = a.num_vars
    sig_a = [_var_signature(a, i) for i in range(1, n + 1)]
    sig_b = [_var_signature(b, i) for i in range(1, n + 1)]
    if sorted(sig_a) != sorted(sig_b):
        return None
    # a's variable i reads b's variable pi(i), so their profiles must agree
    choices = [[j for j in range(1, n + 1) if sig_b[j - 1] == sig_a[i - 1]] for i in range(1, n + 1)]
    images = [0] * n
    taken = [False] * (n + 1)

    def search(i: int) -> Permutation | None:
        if i == n:
            pi = Permutation(tuple(images))
            return pi if apply_perm(a, pi) == b else None
        for j in choices[i]:
            if not taken[j]:
                taken[j] = True
                images[i] = j
                hit = search(i + 1)
                taken[j] = False
                if hit is not None:
                    return hit
        return None

    return search(0)


def tt_isomorphic_naive(a: TruthTable, b: TruthTable) -> Permutation | None:
    """Reference implementation: try every permutation in lexicographic order."""
    for images in itertools.permutations(range(1, a.num_vars + 1)):
        pi = Permutation(images)
        if apply_perm(a, pi) == b:
            return pi
    return None


@lru_cache(maxsize=None)
def _all_row_maps(n: int) -> tuple[tuple[int, ...], ...]:
    return tuple(_row_map(p) for p in itertools.permutations(range(1, n + 1)))


def perm_canonical(tt: TruthTable) -> int:
    """Least bit pattern over all variable permutations; equal iff isomorphic."""
    best = None
    src = tt.bits
    for rm in _all_row_maps(tt.num_vars):
        bits = 0
        for r, s in enumerate(rm):
            if (src >> s) & 1:
                bits |= 1 << r
        if best is None or bits < best:
            best = bits
    return best


# partial tables ------------------------------------------------------------------------

STAR = "⋆"


@dataclass(frozen=True)
class PartialTruthTable:
    """A table whose rows outside ``care`` are undefined."""

    num_vars: int
    care: int
    bits: int

    def __post_init__(self) -> None:
        if self.bits & ~self.care:
            raise TruthTableError("value bits outside the care set")

    @classmethod
    def from_str(cls, s: str) -> PartialTruthTable:
        s = s.strip()
        n = len(s).bit_length() - 1
        if not s or 1 << n != len(s):
            raise TruthTableError(f"table length {len(s)} is not a power of two")
        care = bits = 0
        for r, ch in enumerate(s):
            if ch in "01":
                care |= 1 << r
                if ch == "1":
                    bits |= 1 << r
            elif ch not in (STAR, "*"):
                raise TruthTableError(f"bad table character {ch!r}")
        return cls(n, care, bits)

    def __str__(self) -> str:
        out = []
        for r in range(1 << self.num_vars):
            if (self.care >> r) & 1:
                out.append("1" if (self.bits >> r) & 1 else "0")
            else:
                out.append(STAR)
        return "".join(out)

    def defined_rows(self) -> Iterable[int]:
        c = self.care
        while c:
            low = c & -c
            yield low.bit_length() - 1
            c ^= low

    def consistent_with(self, tt: TruthTable) -> bool:
        if tt.num_vars != self.num_vars:
            raise TruthTableError("arity mismatch")
        return (tt.bits & self.care) == self.bits


def parse_table(s: str) -> TruthTable | PartialTruthTable:
    s = s.strip()
    if STAR in s or "*" in s:
        return PartialTruthTable.from_str(s)
    return TruthTable.from_str(s)


def rows(num_vars: int) -> Sequence[tuple[int, ...]]:
    return [tuple((r >> (num_vars - 1 - v)) & 1 for v in range(num_vars)) for r in range(1 << num_vars)]
