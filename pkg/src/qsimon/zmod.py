"""Exact arithmetic over Z_d and Z_d^n.

Everything here is integer arithmetic, no floating point.  The two
nontrivial pieces are the Smith-normal-form machinery, which powers exact
subgroup-size and annihilator computations for composite as well as prime
d, and the brute-force closure/enumeration paths that act as independent
cross-checks of the normal-form results.

"Independence" of a new measurement sample is defined as strict growth of
the subgroup it generates together with the previous samples.  For prime d
this reduces to ordinary linear independence; for composite d it is the
correct generalization (a sample like 2*[1,0] over Z_4 is informative even
though it is a multiple of an earlier direction only over the rationals).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

from .encoding import (
    digits_to_index,
    digits_to_text,
    index_to_digits,
    text_to_digits,
)
from .errors import (
    CapacityError,
    DegenerateShiftError,
    DimensionMismatchError,
    EncodingError,
    TrivialSubgroupError,
)

ENUMERATION_BUDGET = 10**6


def check_modulus(d: int) -> None:
    if not isinstance(d, (int,)) or d < 2:
        raise ValueError(f"modulus must be an integer >= 2, got {d!r}")


def is_prime(d: int) -> bool:
    """Trial-division primality test; d is machine-word sized by contract."""
    if d < 2:
        return False
    if d % 2 == 0:
        return d == 2
    f = 3
    while f * f <= d:
        if d % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class ZVec:
    """A length-n vector over Z_d, carrying its modulus.

    Entries are canonical representatives in [0, d).  Instances are
    immutable and hashable, so they serve directly as histogram keys.
    """

    d: int
    entries: tuple[int, ...]

    def __post_init__(self):
        check_modulus(self.d)
        if len(self.entries) < 1:
            raise ValueError("ZVec needs at least one entry")
        if any(not (0 <= e < self.d) for e in self.entries):
            raise ValueError(f"entries must lie in [0, {self.d}): {self.entries}")

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def is_zero(self) -> bool:
        return all(e == 0 for e in self.entries)

    def add(self, other: "ZVec") -> "ZVec":
        _check_compatible(self, other)
        return ZVec(self.d, tuple((a + b) % self.d for a, b in zip(self.entries, other.entries)))

    def sub(self, other: "ZVec") -> "ZVec":
        _check_compatible(self, other)
        return ZVec(self.d, tuple((a - b) % self.d for a, b in zip(self.entries, other.entries)))

    def scale(self, k: int) -> "ZVec":
        return ZVec(self.d, tuple((k * e) % self.d for e in self.entries))

    @classmethod
    def zero(cls, d: int, n: int) -> "ZVec":
        return cls(d, (0,) * n)

    @classmethod
    def from_index(cls, index: int, d: int, n: int) -> "ZVec":
        return cls(d, index_to_digits(index, d, n))

    def to_index(self) -> int:
        return digits_to_index(self.entries, self.d)

    # -- serialization -------------------------------------------------

    def to_json_dict(self) -> dict:
        return {"d": self.d, "entries": list(self.entries)}

    @classmethod
    def from_json_dict(cls, obj: dict) -> "ZVec":
        try:
            return cls(int(obj["d"]), tuple(int(e) for e in obj["entries"]))
        except (KeyError, TypeError) as exc:
            raise EncodingError(f"malformed ZVec JSON object: {obj!r}") from exc

    def to_text(self) -> str:
        """Compact form like "d4:2031" (base-d digit string)."""
        return f"d{self.d}:{digits_to_text(self.entries, self.d)}"

    @classmethod
    def parse_text(cls, text: str) -> "ZVec":
        if not text.startswith("d") or ":" not in text:
            raise EncodingError(f"expected 'd<modulus>:<digits>', got {text!r}")
        head, _, body = text.partition(":")
        try:
            d = int(head[1:])
        except ValueError as exc:
            raise EncodingError(f"bad modulus in {text!r}") from exc
        check_modulus(d)
        return cls(d, text_to_digits(body, d))

    @classmethod
    def parse(cls, obj) -> "ZVec":
        """Accept either the compact text form or the JSON dict form."""
        if isinstance(obj, str):
            return cls.parse_text(obj)
        if isinstance(obj, dict):
            return cls.from_json_dict(obj)
        raise EncodingError(f"cannot parse ZVec from {type(obj).__name__}")


def _check_compatible(x: ZVec, y: ZVec) -> None:
    if x.d != y.d:
        raise DimensionMismatchError(f"modulus mismatch: {x.d} vs {y.d}")
    if len(x) != len(y):
        raise DimensionMismatchError(f"length mismatch: {len(x)} vs {len(y)}")


def inner_product(x: ZVec, y: ZVec) -> int:
    """Standard inner product sum_i x_i y_i mod d."""
    _check_compatible(x, y)
    return sum(a * b for a, b in zip(x.entries, y.entries)) % x.d


def order_of(s: ZVec) -> int:
    """Least k >= 1 with k*s = 0 componentwise, i.e. d / gcd(d, gcd of entries)."""
    if s.is_zero:
        raise DegenerateShiftError("the zero vector has no shift order")
    g = s.d
    for e in s.entries:
        g = math.gcd(g, e)
    return s.d // g


# -- Smith normal form over the integers -------------------------------


def smith_normal_form(matrix: Sequence[Sequence[int]]) -> tuple[list[int], list[list[int]], list[list[int]]]:
    """Diagonalize an integer matrix by unimodular row/column operations.

    Returns (diag, U, V) with U @ matrix @ V diagonal, diag the diagonal
    entries (nonnegative, each dividing the next), and U, V unimodular.
    Plain Python ints throughout, so intermediate growth cannot overflow.
    """
    A = [[int(v) for v in row] for row in matrix]
    m = len(A)
    n = len(A[0]) if m else 0
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(dst, src, q):
        A[dst] = [a + q * b for a, b in zip(A[dst], A[src])]
        U[dst] = [a + q * b for a, b in zip(U[dst], U[src])]

    def add_col(dst, src, q):
        for row in A:
            row[dst] += q * row[src]
        for row in V:
            row[dst] += q * row[src]

    def negate_row(i):
        A[i] = [-a for a in A[i]]
        U[i] = [-a for a in U[i]]

    t = 0
    while t < min(m, n):
        # locate a nonzero entry of minimal magnitude in the trailing block
        pivot = None
        best = None
        for i in range(t, m):
            for j in range(t, n):
                a = abs(A[i][j])
                if a and (best is None or a < best):
                    best = a
                    pivot = (i, j)
        if pivot is None:
            break
        swap_rows(t, pivot[0])
        swap_cols(t, pivot[1])
        if A[t][t] < 0:
            negate_row(t)

        # clear the pivot row and column; restart if a remainder shrinks the pivot
        dirty = False
        for i in range(t + 1, m):
            if A[i][t]:
                q = A[i][t] // A[t][t]
                add_row(i, t, -q)
                if A[i][t]:
                    dirty = True
        for j in range(t + 1, n):
            if A[t][j]:
                q = A[t][j] // A[t][t]
                add_col(j, t, -q)
                if A[t][j]:
                    dirty = True
        if dirty:
            continue

        # divisibility: fold in any entry the pivot does not divide
        offender = None
        for i in range(t + 1, m):
            for j in range(t + 1, n):
                if A[i][j] % A[t][t]:
                    offender = i
                    break
            if offender is not None:
                break
        if offender is not None:
            add_row(t, offender, 1)
            continue
        t += 1

    diag = [A[i][i] for i in range(min(m, n))]
    return diag, U, V


def _rows(vectors: Iterable[ZVec]) -> list[list[int]]:
    return [[int(e) for e in v.entries] for v in vectors]


def _group_divisors(generators: Sequence[ZVec], d: int, n: int) -> list[int]:
    """Diagonal of the SNF of the generator matrix stacked with d*I.

    Each divisor a_i divides d; the generated subgroup of Z_d^n is
    isomorphic to the product of Z_{d/a_i}.
    """
    stacked = _rows(generators) + [[d * int(i == j) for j in range(n)] for i in range(n)]
    diag, _, _ = smith_normal_form(stacked)
    return [abs(a) for a in diag]


def submodule_size(generators: Sequence[ZVec]) -> int:
    """Exact cardinality of the subgroup of Z_d^n generated by the inputs.

    Computed from elementary divisors; see :func:`submodule_size_bruteforce`
    for the independent enumeration route.
    """
    gens = list(generators)
    if not gens:
        return 1
    d, n = gens[0].d, len(gens[0])
    for g in gens[1:]:
        _check_compatible(gens[0], g)
    size = 1
    for a in _group_divisors(gens, d, n):
        size *= d // a
    return size


def enumerate_subgroup(generators: Sequence[ZVec]) -> list[ZVec]:
    """All elements of the generated subgroup, by closure enumeration.

    Exact but exponential; guarded by the d^n <= 10^6 budget.  Serves as
    the brute-force oracle against the normal-form computations.
    """
    gens = [g for g in generators if not g.is_zero]
    if not gens:
        if not list(generators):
            raise ValueError("cannot infer d, n from an empty generator list")
        g0 = list(generators)[0]
        return [ZVec.zero(g0.d, len(g0))]
    d, n = gens[0].d, len(gens[0])
    space = d**n
    if space > ENUMERATION_BUDGET:
        raise CapacityError(
            f"closure enumeration needs d^n = {space} <= {ENUMERATION_BUDGET}",
            requested=space,
            budget=ENUMERATION_BUDGET,
        )
    zero = ZVec.zero(d, n)
    seen = {zero}
    frontier = [zero]
    while frontier:
        nxt = []
        for el in frontier:
            for g in gens:
                cand = el.add(g)
                if cand not in seen:
                    seen.add(cand)
                    nxt.append(cand)
        frontier = nxt
    return sorted(seen, key=lambda v: v.entries)


def submodule_size_bruteforce(generators: Sequence[ZVec]) -> int:
    if not list(generators):
        return 1
    return len(enumerate_subgroup(generators))


@dataclass(frozen=True)
class ConstraintSet:
    """Accumulated measurement samples with exact subgroup-size tracking."""

    d: int
    n: int
    samples: tuple[ZVec, ...]
    submodule_size: int

    @classmethod
    def empty(cls, d: int, n: int) -> "ConstraintSet":
        check_modulus(d)
        return cls(d, n, (), 1)


def extend_constraints(cs: ConstraintSet, y: ZVec) -> tuple[ConstraintSet, bool]:
    """Add a sample; report whether the generated subgroup strictly grew."""
    if y.d != cs.d or len(y) != cs.n:
        raise DimensionMismatchError(
            f"sample over Z_{y.d}^{len(y)} added to constraints over Z_{cs.d}^{cs.n}"
        )
    new_samples = cs.samples + (y,)
    new_size = submodule_size(new_samples)
    grew = new_size > cs.submodule_size
    return ConstraintSet(cs.d, cs.n, new_samples, new_size), grew


def annihilator(samples: Sequence[ZVec], d: int | None = None, n: int | None = None) -> list[ZVec]:
    """Generators of {s in Z_d^n : y . s = 0 mod d for every sample y}.

    Solved through the Smith normal form of the sample matrix: with
    U A V = S diagonal, A s = 0 mod d iff S z = 0 mod d for z = V^{-1} s,
    and each diagonal constraint s_i z_i = 0 is solved by multiples of
    d / gcd(s_i, d).  Mapping the solved z-generators back through V gives
    generators in the original coordinates.

    An empty sample list imposes no constraints and returns generators of
    all of Z_d^n; d and n must then be passed explicitly.
    """
    sams = list(samples)
    if sams:
        d, n = sams[0].d, len(sams[0])
        for y in sams[1:]:
            _check_compatible(sams[0], y)
    if d is None or n is None:
        raise ValueError("empty sample list needs explicit d, n")
    if not sams:
        return [ZVec(d, tuple(int(i == j) for j in range(n))) for i in range(n)]
    diag, _, V = smith_normal_form(_rows(sams))
    gens = []
    for i in range(n):
        s_i = abs(diag[i]) if i < len(diag) else 0
        mult = d // math.gcd(s_i, d)  # gcd(0, d) = d, so unconstrained coordinates give 1
        col = [mult * V[r][i] % d for r in range(n)]
        vec = ZVec(d, tuple(col))
        if not vec.is_zero:
            gens.append(vec)
    if not gens:
        gens.append(ZVec.zero(d, n))
    return gens


def annihilator_bruteforce(samples: Sequence[ZVec], d: int | None = None, n: int | None = None) -> list[ZVec]:
    """Every annihilator element, by exhaustive scan of Z_d^n."""
    sams = list(samples)
    if sams:
        d, n = sams[0].d, len(sams[0])
    if d is None or n is None:
        raise ValueError("empty sample list needs explicit d, n")
    space = d**n
    if space > ENUMERATION_BUDGET:
        raise CapacityError(
            f"exhaustive annihilator needs d^n = {space} <= {ENUMERATION_BUDGET}",
            requested=space,
            budget=ENUMERATION_BUDGET,
        )
    out = []
    for idx in range(space):
        cand = ZVec.from_index(idx, d, n)
        if all(inner_product(y, cand) == 0 for y in sams):
            out.append(cand)
    return out


@dataclass(frozen=True)
class NotCyclicReport:
    """Returned when a subgroup cannot be generated by a single element."""

    invariant_factors: tuple[int, ...]
    size: int


def canonical_generator(generators: Sequence[ZVec]) -> Union[ZVec, NotCyclicReport]:
    """Deterministic representative of a cyclic subgroup.

    Any unit multiple of a shift produces the same orthogonal subgroup, so
    recovery needs a fixed tie-break: the lexicographically smallest
    element of maximal order.  Non-cyclic subgroups are reported with
    their invariant factors instead.
    """
    gens = list(generators)
    if not gens:
        raise TrivialSubgroupError("no generators supplied")
    d, n = gens[0].d, len(gens[0])
    factors = sorted((d // a for a in _group_divisors(gens, d, n) if a < d), reverse=True)
    if not factors:
        raise TrivialSubgroupError("subgroup is trivial; no nonzero shift is recoverable")
    size = math.prod(factors)
    if len(factors) > 1:
        return NotCyclicReport(invariant_factors=tuple(factors), size=size)
    for el in enumerate_subgroup(gens):  # lexicographic order
        if not el.is_zero and order_of(el) == size:
            return el
    raise AssertionError("cyclic subgroup must contain an element of full order")
