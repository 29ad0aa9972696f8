from itertools import product

import numpy as np
import pytest

from qsimon.errors import CapacityError, EncodingError, UnsupportedShiftError
from qsimon.oracle import (
    BinaryOracle,
    CyclicStructure,
    LayeredStructure,
    PromiseOracle,
    binary_oracle_as_promise,
    binary_projection,
    build_binary_oracle,
    build_native_oracle,
    lift_binary_oracle,
    load_oracle,
    oracle_from_json_dict,
    oracle_to_json_dict,
    orbit_of,
    pack,
    save_oracle,
    unpack,
    verify_promise,
)
from qsimon.zmod import ZVec


def zv(d, *entries):
    return ZVec(d, tuple(entries))


def toggled(eta: ZVec, s: ZVec, delta: tuple[int, ...]) -> ZVec:
    """Layerwise toggle: XOR delta_t * s into layer t, then repack."""
    layers = unpack(eta, len(delta))
    new = [
        ZVec(2, tuple(b ^ (delta[t] & sj) for b, sj in zip(layers[t].entries, s.entries)))
        for t in range(len(delta))
    ]
    return pack(new)


# -- native construction -----------------------------------------------------


def test_native_oracle_two_orbits_d2():
    f = build_native_oracle(2, 2, zv(2, 1, 1), canonical=True)
    assert sorted(set(int(v) for v in f.table)) == [0, 1]  # reps 00 and 01
    assert f.table[zv(2, 0, 0).to_index()] == f.table[zv(2, 1, 1).to_index()]
    assert f.table[zv(2, 0, 1).to_index()] == f.table[zv(2, 1, 0).to_index()]


def test_native_oracle_d4_n4_has_64_fibers():
    f = build_native_oracle(4, 4, zv(4, 2, 0, 3, 1), np.random.default_rng(7))
    values, counts = np.unique(f.table, return_counts=True)
    assert len(values) == 64
    assert (counts == 4).all()


def test_native_oracle_constant_when_single_coset():
    f = build_native_oracle(3, 1, zv(3, 1), canonical=True)
    assert (f.table == f.table[0]).all()


def test_native_oracle_rejects_partial_order_shift():
    with pytest.raises(UnsupportedShiftError):
        build_native_oracle(4, 2, zv(4, 2, 0), np.random.default_rng(0))


def test_native_oracle_needs_rng_or_canonical():
    with pytest.raises(ValueError):
        build_native_oracle(2, 2, zv(2, 1, 1))


def test_native_oracle_table_budget():
    with pytest.raises(CapacityError):
        build_native_oracle(11, 6, zv(11, 1, 0, 0, 0, 0, 0), canonical=True)


def test_image_cardinality_is_fiber_count():
    rng = np.random.default_rng(8)
    for d, n, s in [(2, 3, (1, 0, 1)), (3, 2, (2, 1)), (4, 3, (1, 0, 2))]:
        f = build_native_oracle(d, n, zv(d, *s), rng)
        assert len(set(int(v) for v in f.table)) == d ** (n - 1)


# -- verification -------------------------------------------------------------


def test_verify_passes_on_constructions():
    rng = np.random.default_rng(9)
    for d, n, s in [(2, 2, (1, 1)), (3, 2, (1, 2)), (4, 2, (0, 1)), (4, 4, (2, 0, 3, 1))]:
        f = build_native_oracle(d, n, zv(d, *s), rng)
        report = verify_promise(f)
        assert report.ok and report.fiber_size == d
        assert report.num_fibers == d ** (n - 1)


def test_verify_catches_corrupted_entry():
    f = build_native_oracle(4, 2, zv(4, 0, 1), canonical=True)
    table = f.table.copy()
    table[5] = (table[5] + 1) % 16
    bad = PromiseOracle(4, 2, table, f.structure)
    report = verify_promise(bad)
    assert not report.ok
    assert report.counterexample is not None
    assert report.reason


def test_verify_lifted_oracle_passes_with_fiber_size_four():
    f_bin = build_binary_oracle(4, zv(2, 0, 1, 0, 1), canonical=True)
    lifted = lift_binary_oracle(f_bin, 2)
    report = verify_promise(lifted)
    assert report.ok and report.fiber_size == 4
    assert report.num_fibers == 64


# -- pack / unpack -------------------------------------------------------------


def test_pack_examples():
    assert pack([zv(2, 1, 0), zv(2, 0, 1)]) == zv(4, 1, 2)
    assert pack([zv(2, 0, 0), zv(2, 0, 0)]) == zv(4, 0, 0)
    assert pack([zv(2, 1, 1), zv(2, 1, 1)]) == zv(4, 3, 3)


def test_unpack_examples():
    assert unpack(zv(4, 3, 1), 2) == [zv(2, 1, 1), zv(2, 1, 0)]
    assert unpack(zv(4, 0, 0), 2) == [zv(2, 0, 0), zv(2, 0, 0)]


def test_unpack_requires_power_of_two_modulus():
    with pytest.raises(EncodingError):
        unpack(zv(3, 1, 2), 2)
    with pytest.raises(EncodingError):
        unpack(zv(4, 1, 2), 3)


def test_pack_validates_layers():
    with pytest.raises(EncodingError):
        pack([])
    with pytest.raises(EncodingError):
        pack([zv(2, 1), zv(2, 1, 0)])
    with pytest.raises(EncodingError):
        pack([zv(4, 1, 0), zv(2, 0, 1)])


@pytest.mark.parametrize("n,layers", [(1, 1), (2, 2), (3, 2), (4, 2), (4, 1)])
def test_pack_unpack_bijection_exhaustive(n, layers):
    d = 2**layers
    seen = set()
    for bits in product(range(2), repeat=n * layers):
        lay = [zv(2, *bits[t * n:(t + 1) * n]) for t in range(layers)]
        eta = pack(lay)
        assert unpack(eta, layers) == lay
        seen.add(eta)
    assert len(seen) == d**n


# -- lifting --------------------------------------------------------------------


def test_lift_single_layer_is_identity():
    f_bin = build_binary_oracle(3, zv(2, 1, 0, 1), np.random.default_rng(10))
    lifted = lift_binary_oracle(f_bin, 1)
    assert lifted.d == 2
    np.testing.assert_array_equal(lifted.table, f_bin.table)


def test_lift_fibers_are_layer_toggle_orbits():
    # exhaustive Lemma check for n <= 4, l <= 2
    rng = np.random.default_rng(11)
    cases = [(2, 1, (1, 0)), (2, 2, (1, 1)), (3, 2, (0, 1, 1)), (4, 2, (0, 1, 0, 1))]
    for n, layers, s_bits in cases:
        s = zv(2, *s_bits)
        f_bin = build_binary_oracle(n, s, rng)
        lifted = lift_binary_oracle(f_bin, layers)
        d = 2**layers
        for idx in range(d**n):
            eta = ZVec.from_index(idx, d, n)
            for delta in product(range(2), repeat=layers):
                other = toggled(eta, s, delta)
                assert lifted.table[eta.to_index()] == lifted.table[other.to_index()]
            fiber = set(orbit_of(lifted, eta))
            toggles = {toggled(eta, s, delta) for delta in product(range(2), repeat=layers)}
            assert fiber == toggles
            assert len(fiber) == d


def test_lift_composes_binary_oracle_per_layer():
    f_bin = build_binary_oracle(4, zv(2, 0, 1, 0, 1), np.random.default_rng(12))
    lifted = lift_binary_oracle(f_bin, 2)
    for idx in range(4**4):
        eta = ZVec.from_index(idx, 4, 4)
        lo, hi = unpack(eta, 2)
        want = pack([
            ZVec.from_index(int(f_bin.table[lo.to_index()]), 2, 4),
            ZVec.from_index(int(f_bin.table[hi.to_index()]), 2, 4),
        ])
        assert int(lifted.table[idx]) == want.to_index()


def test_binary_projection_round_trip():
    f_bin = build_binary_oracle(3, zv(2, 1, 1, 0), np.random.default_rng(13))
    lifted = lift_binary_oracle(f_bin, 2)
    back = binary_projection(lifted)
    np.testing.assert_array_equal(back.table, f_bin.table)
    assert back.s == f_bin.s


# -- fibers ------------------------------------------------------------------------


def test_orbit_of_examples():
    f = build_native_oracle(4, 2, zv(4, 0, 1), canonical=True)
    assert orbit_of(f, zv(4, 3, 0)) == [zv(4, 3, 0), zv(4, 3, 1), zv(4, 3, 2), zv(4, 3, 3)]

    f2 = build_binary_oracle(3, zv(2, 1, 0, 1), canonical=True)
    fiber = orbit_of(binary_oracle_as_promise(f2), zv(2, 0, 1, 0))
    assert fiber == [zv(2, 0, 1, 0), zv(2, 1, 1, 1)]

    f_bin = build_binary_oracle(4, zv(2, 0, 1, 0, 1), canonical=True)
    lifted = lift_binary_oracle(f_bin, 2)
    fiber = orbit_of(lifted, zv(4, 0, 0, 0, 0))
    assert fiber == [zv(4, 0, k, 0, k) for k in range(4)]


# -- serialization -------------------------------------------------------------------


def test_oracle_json_round_trip(tmp_path):
    rng = np.random.default_rng(14)
    native = build_native_oracle(4, 2, zv(4, 2, 1), rng)
    lifted = lift_binary_oracle(build_binary_oracle(3, zv(2, 1, 0, 1), rng), 2)
    for f in (native, lifted):
        path = tmp_path / "oracle.json"
        save_oracle(f, path)
        g = load_oracle(path)
        assert g.d == f.d and g.n == f.n
        np.testing.assert_array_equal(g.table, f.table)
        assert g.structure == f.structure


def test_oracle_json_round_trip_is_byte_stable(tmp_path):
    f = build_native_oracle(3, 2, zv(3, 1, 1), canonical=True)
    p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
    save_oracle(f, p1)
    save_oracle(load_oracle(p1), p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_oracle_json_rejects_malformed():
    with pytest.raises(EncodingError):
        oracle_from_json_dict({"d": 4, "n": 2})
    good = oracle_to_json_dict(build_native_oracle(2, 2, zv(2, 1, 1), canonical=True))
    bad = dict(good, table=good["table"][:-1])
    with pytest.raises(EncodingError):
        oracle_from_json_dict(bad)
    bad = dict(good, structure={"kind": "mystery", "s": "d2:11"})
    with pytest.raises(EncodingError):
        oracle_from_json_dict(bad)


def test_seeded_builds_reproducible():
    a = build_native_oracle(4, 3, zv(4, 1, 0, 2), np.random.default_rng(99))
    b = build_native_oracle(4, 3, zv(4, 1, 0, 2), np.random.default_rng(99))
    np.testing.assert_array_equal(a.table, b.table)
