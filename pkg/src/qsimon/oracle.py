"""Construction and verification of d-to-one promise functions.

Two families are supported:

* native cyclic oracles, whose fibers are the d^(n-1) orbits of the
  cyclic group generated by a full-order shift s over Z_d; and
* layered oracles for d = 2^l, built from a binary 2-to-1 oracle by
  unpacking each input into its l binary layers, applying the binary
  oracle to every layer, and packing the outputs back into one d-ary
  vector.  Each fiber of a layered oracle is the orbit of the 2^l layer
  toggles, which on digit values acts as bitwise XOR with the toggle
  label at the coordinates where s_j = 1.

Oracles are explicit lookup tables indexed by flattened base-d input;
desk-scale d^n stays small and tables make promise verification
exhaustive.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .encoding import digit_matrix, digits_to_text, flat_powers, text_to_digits
from .errors import CapacityError, EncodingError, UnsupportedShiftError
from .zmod import ZVec, order_of

MAX_TABLE_ENTRIES = 10**6


@dataclass(frozen=True)
class CyclicStructure:
    """Hidden cyclic shift s with ord(s) = d; fibers are {x + k*s}."""

    s: ZVec


@dataclass(frozen=True)
class LayeredStructure:
    """Binary hidden shift s replicated across l layers; d = 2^l.

    The fibers form a (Z_2)^l-shaped orbit under the layer toggles, not a
    single cyclic orbit, so recovery must pool per-layer mod-2
    constraints (see the pipeline module).
    """

    s: ZVec  # over Z_2
    layers: int


OracleStructure = Union[CyclicStructure, LayeredStructure]


@dataclass(frozen=True)
class PromiseOracle:
    d: int
    n: int
    table: np.ndarray  # int64, flat input -> flat output, length d**n
    structure: OracleStructure


@dataclass(frozen=True)
class BinaryOracle:
    """A standard 2-to-1 Simon oracle over Z_2^n with nonzero shift s."""

    n: int
    table: np.ndarray
    s: ZVec


@dataclass(frozen=True)
class PromiseReport:
    ok: bool
    fiber_size: int
    num_fibers: int
    counterexample: tuple[ZVec, ZVec] | None = None
    reason: str | None = None


def _check_table_budget(d: int, n: int) -> int:
    size = d**n
    if size > MAX_TABLE_ENTRIES:
        raise CapacityError(
            f"oracle table needs d^n = {size} entries, budget is {MAX_TABLE_ENTRIES}",
            requested=size,
            budget=MAX_TABLE_ENTRIES,
        )
    return size


def build_native_oracle(
    d: int,
    n: int,
    s: ZVec,
    rng: np.random.Generator | None = None,
    canonical: bool = False,
) -> PromiseOracle:
    """Tabulate a d-to-one function constant exactly on the orbits of <s>.

    Z_d^n splits into d^(n-1) cosets of <s>; each is assigned a distinct
    output value.  By default values are a seeded random injection into
    Z_d^n (the promise fixes collisions, not codomain values); with
    ``canonical=True`` each orbit outputs its lexicographically smallest
    member, for reproducible goldens.
    """
    if s.d != d or len(s) != n:
        raise ValueError(f"shift {s} does not live in Z_{d}^{n}")
    if s.is_zero or order_of(s) != d:
        raise UnsupportedShiftError(
            f"shift {s.entries} has order {order_of(s) if not s.is_zero else 0}, "
            f"but the d-to-one promise needs full order {d}"
        )
    size = _check_table_budget(d, n)
    if not canonical and rng is None:
        raise ValueError("random output assignment needs an rng; pass one or set canonical=True")

    digits = digit_matrix(d, n)
    powers = flat_powers(d, n)
    step = ((digits + np.asarray(s.entries)) % d) @ powers  # x -> x + s

    pool = None if canonical else rng.permutation(size)
    table = np.empty(size, dtype=np.int64)
    visited = np.zeros(size, dtype=bool)
    orbit_count = 0
    for x in range(size):
        if visited[x]:
            continue
        members = [x]
        cur = int(step[x])
        while cur != x:
            members.append(cur)
            cur = int(step[cur])
        value = x if canonical else int(pool[orbit_count])
        idx = np.asarray(members)
        table[idx] = value
        visited[idx] = True
        orbit_count += 1
    assert orbit_count == size // d
    return PromiseOracle(d, n, table, CyclicStructure(s))


def build_binary_oracle(
    n: int,
    s: ZVec,
    rng: np.random.Generator | None = None,
    canonical: bool = False,
) -> BinaryOracle:
    """Standard binary Simon oracle: the d = 2 native construction."""
    native = build_native_oracle(2, n, s, rng=rng, canonical=canonical)
    return BinaryOracle(n, native.table, s)


def binary_oracle_as_promise(f_bin: BinaryOracle) -> PromiseOracle:
    """View a binary oracle as the d = 2 cyclic promise oracle it is."""
    return PromiseOracle(2, f_bin.n, f_bin.table, CyclicStructure(f_bin.s))


# -- pack / unpack --------------------------------------------------------


def pack(layers: Sequence[ZVec]) -> ZVec:
    """Assemble l binary vectors into one vector over Z_{2^l}.

    Componentwise eta_j = sum_t 2^t * layer_t[j]; layer 0 is the least
    significant bit.
    """
    if not layers:
        raise EncodingError("pack needs at least one layer")
    n = len(layers[0])
    for t, layer in enumerate(layers):
        if layer.d != 2:
            raise EncodingError(f"layer {t} is over Z_{layer.d}, expected Z_2")
        if len(layer) != n:
            raise EncodingError(f"layer {t} has length {len(layer)}, expected {n}")
    d = 2 ** len(layers)
    entries = tuple(
        sum((1 << t) * layers[t].entries[j] for t in range(len(layers)))
        for j in range(n)
    )
    return ZVec(d, entries)


def unpack(eta: ZVec, layers: int) -> list[ZVec]:
    """Split a vector over Z_{2^l} into its l binary layers; inverse of pack."""
    if layers < 1:
        raise EncodingError("need at least one layer")
    if eta.d != 2**layers:
        raise EncodingError(
            f"cannot unpack modulus {eta.d} into {layers} binary layers "
            f"(expected d = {2**layers})"
        )
    return [
        ZVec(2, tuple((e >> t) & 1 for e in eta.entries))
        for t in range(layers)
    ]


def lift_binary_oracle(f_bin: BinaryOracle, layers: int) -> PromiseOracle:
    """Build the 2^l-ary oracle that applies the binary oracle to every layer.

    The resulting table is d-to-one with d = 2^l: its fibers are exactly
    the orbits of the layer toggles, since inputs collide iff every layer
    pair collides under the binary promise.
    """
    if layers < 1:
        raise ValueError("need at least one layer")
    n = f_bin.n
    d = 2**layers
    size = _check_table_budget(d, n)

    digits = digit_matrix(d, n)  # (d^n, n)
    powers = flat_powers(d, n)
    pw2 = flat_powers(2, n)
    bin_digits = digit_matrix(2, n)  # (2^n, n)
    table_bin = np.asarray(f_bin.table)

    out_digits = np.zeros((size, n), dtype=np.int64)
    for t in range(layers):
        layer_flat = ((digits >> t) & 1) @ pw2
        out_digits += (1 << t) * bin_digits[table_bin[layer_flat]]
    table = out_digits @ powers
    return PromiseOracle(d, n, table, LayeredStructure(s=f_bin.s, layers=layers))


def binary_projection(f: PromiseOracle) -> BinaryOracle:
    """Recover the underlying binary oracle from a layered table.

    On inputs whose only nonzero layer is layer 0, the lifted oracle's
    layer-0 output is the binary oracle's value, so the table can be read
    back even after a file round trip.
    """
    if not isinstance(f.structure, LayeredStructure):
        raise ValueError("binary projection applies to layered oracles only")
    n = f.n
    powers = flat_powers(f.d, n)
    pw2 = flat_powers(2, n)
    bin_digits = digit_matrix(2, n)  # rows: binary inputs x
    eta_flat = bin_digits @ powers  # embed x with digits in {0, 1}
    out_digits = digit_matrix(f.d, n)[np.asarray(f.table)[eta_flat]]
    table = (out_digits & 1) @ pw2
    return BinaryOracle(n, table.astype(np.int64), f.structure.s)


# -- fibers and verification -----------------------------------------------


def structure_fiber_flats(f: PromiseOracle, x_flat: int) -> np.ndarray:
    """Flattened indices of the fiber through x, predicted from the metadata."""
    x_digits = np.asarray(digit_matrix(f.d, f.n)[x_flat])
    powers = flat_powers(f.d, f.n)
    s_arr = np.asarray(f.structure.s.entries)
    if isinstance(f.structure, CyclicStructure):
        members = [((x_digits + k * s_arr) % f.d) @ powers for k in range(f.d)]
    else:
        # layer toggle by label m = sum_t 2^t delta_t: digit XOR m where s_j = 1
        members = [
            np.where(s_arr == 1, x_digits ^ m, x_digits) @ powers
            for m in range(f.d)
        ]
    return np.unique(np.asarray(members))


def orbit_of(f: PromiseOracle, x: ZVec) -> list[ZVec]:
    """The full fiber {y : f(y) = f(x)}, read off the table itself."""
    if x.d != f.d or len(x) != f.n:
        raise ValueError(f"input {x} does not live in Z_{f.d}^{f.n}")
    flats = np.nonzero(np.asarray(f.table) == f.table[x.to_index()])[0]
    return [ZVec.from_index(int(i), f.d, f.n) for i in flats]


def verify_promise(f: PromiseOracle) -> PromiseReport:
    """Exhaustively check both directions of the d-to-one promise.

    Every fiber of the table must coincide with the orbit predicted by the
    hidden structure: same-output inputs must be orbit-related, and
    orbit-related inputs must share an output.  Violations are reported
    with the first offending pair, not raised.
    """
    d, n = f.d, f.n
    size = d**n
    table = np.asarray(f.table)
    order = np.argsort(table, kind="stable")
    sorted_vals = table[order]
    boundaries = np.flatnonzero(np.diff(sorted_vals)) + 1
    groups = np.split(order, boundaries)

    for group in groups:
        rep = int(group[0])
        predicted = structure_fiber_flats(f, rep)
        got = set(int(g) for g in group)
        want = set(int(p) for p in predicted)
        if got == want and len(group) == d:
            continue
        extra = sorted(got - want)
        missing = sorted(want - got)
        if extra:
            pair = (ZVec.from_index(rep, d, n), ZVec.from_index(extra[0], d, n))
            reason = "equal outputs on inputs not related by the promise"
        else:
            pair = (ZVec.from_index(rep, d, n), ZVec.from_index(missing[0], d, n))
            reason = "promise-related inputs with different outputs"
        return PromiseReport(False, d, len(groups), counterexample=pair, reason=reason)
    return PromiseReport(True, d, len(groups))


# -- file format -------------------------------------------------------------


def oracle_to_json_dict(f: PromiseOracle) -> dict:
    if isinstance(f.structure, CyclicStructure):
        structure = {"kind": "cyclic", "s": f.structure.s.to_text()}
    else:
        structure = {
            "kind": "layered",
            "s": f.structure.s.to_text(),
            "layers": f.structure.layers,
        }
    digits = digit_matrix(f.d, f.n)
    return {
        "d": f.d,
        "n": f.n,
        "structure": structure,
        "table": [digits_to_text(digits[int(v)], f.d) for v in f.table],
    }


def oracle_from_json_dict(obj: dict) -> PromiseOracle:
    try:
        d = int(obj["d"])
        n = int(obj["n"])
        sobj = obj["structure"]
        kind = sobj["kind"]
        s = ZVec.parse_text(sobj["s"])
        raw = obj["table"]
    except (KeyError, TypeError) as exc:
        raise EncodingError(f"malformed oracle JSON: missing field {exc}") from exc
    if len(raw) != d**n:
        raise EncodingError(f"oracle table has {len(raw)} entries, expected d^n = {d**n}")
    powers = flat_powers(d, n)
    table = np.empty(d**n, dtype=np.int64)
    for i, entry in enumerate(raw):
        digits = text_to_digits(entry, d)
        if len(digits) != n:
            raise EncodingError(f"table entry {i} has {len(digits)} digits, expected {n}")
        table[i] = int(np.asarray(digits) @ powers)
    if kind == "cyclic":
        structure: OracleStructure = CyclicStructure(s)
    elif kind == "layered":
        structure = LayeredStructure(s=s, layers=int(sobj["layers"]))
    else:
        raise EncodingError(f"unknown oracle structure kind {kind!r}")
    return PromiseOracle(d, n, table, structure)


def save_oracle(f: PromiseOracle, path) -> None:
    with open(path, "w") as fh:
        json.dump(oracle_to_json_dict(f), fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_oracle(path) -> PromiseOracle:
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise EncodingError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    return oracle_from_json_dict(obj)
