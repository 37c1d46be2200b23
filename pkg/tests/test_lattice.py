import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from torica import lattice


def rand_cfg(rng, L, density=0.3):
    return (rng.random((2, L, L)) < density).astype(np.uint8)


def test_all_zero_config_has_empty_syndrome():
    cfg = lattice.new_config(9)
    assert not lattice.syndromes_of(cfg).any()


def test_single_link_syndromes():
    # one set horizontal link at (0, 0) violates the stars at (0,0) and (1,0)
    cfg = lattice.new_config(9)
    cfg[lattice.HORIZONTAL, 0, 0] = 1
    syn = lattice.syndromes_of(cfg)
    assert sorted(map(tuple, np.argwhere(syn))) == [(0, 0), (1, 0)]


def test_noncontractible_row_has_no_syndrome():
    cfg = lattice.noncontractible_loop(9, 0)
    assert not lattice.syndromes_of(cfg).any()


def test_syndrome_parity_even_and_linear():
    rng = np.random.default_rng(0)
    for _ in range(50):
        a, b = rand_cfg(rng, 9), rand_cfg(rng, 9)
        sa, sb = lattice.syndromes_of(a), lattice.syndromes_of(b)
        assert int(sa.sum()) % 2 == 0
        assert np.array_equal(lattice.syndromes_of(a ^ b), sa ^ sb)


def test_homology_class_basics():
    assert lattice.homology_class(lattice.new_config(9)) == (0, 0)
    assert lattice.homology_class(lattice.noncontractible_loop(9, 0)) == (1, 0)
    assert lattice.homology_class(lattice.noncontractible_loop(9, 1)) == (0, 1)
    assert lattice.homology_class(lattice.plaquette_boundary(9, 2, 5)) == (0, 0)


def test_homology_rejects_open_chains():
    cfg = lattice.new_config(9)
    cfg[0, 4, 4] = 1
    with pytest.raises(ValueError):
        lattice.homology_class(cfg)


def test_homology_linear_and_stabilizer_invariant():
    rng = np.random.default_rng(1)
    base = lattice.noncontractible_loop(9, 0)
    for _ in range(30):
        x, y = rng.integers(0, 9, size=2)
        base = base ^ lattice.plaquette_boundary(9, int(x), int(y))
    assert lattice.homology_class(base) == (1, 0)


def test_is_coarse_grained():
    syn = np.zeros((9, 9), dtype=np.uint8)
    assert lattice.is_coarse_grained(syn, 1)
    syn[0, 0] = syn[3, 0] = 1
    assert lattice.is_coarse_grained(syn, 1)
    assert not lattice.is_coarse_grained(syn, 2)
    syn[1, 1] = 1
    assert not lattice.is_coarse_grained(syn, 1)


def test_pushforward_syndrome_division():
    syn = np.zeros((9, 9), dtype=np.uint8)
    syn[0, 0] = syn[3, 0] = 1
    small = lattice.pushforward_syndrome(syn, 1)
    assert sorted(map(tuple, np.argwhere(small))) == [(0, 0), (1, 0)]
    with pytest.raises(ValueError):
        lattice.pushforward_syndrome(np.eye(9, dtype=np.uint8), 1)


def test_pushforward_pullback_roundtrip_on_syndromes():
    rng = np.random.default_rng(2)
    small = rand_cfg(rng, 3)
    big = lattice.pullback_chain(small)
    syn_small = lattice.syndromes_of(small)
    syn_big = lattice.syndromes_of(big)
    assert np.array_equal(lattice.pushforward_syndrome(syn_big, 1), syn_small)


def test_pushforward_chain_preserves_homology():
    rng = np.random.default_rng(3)
    for trial in range(20):
        small0 = rand_cfg(rng, 3)
        big = lattice.pullback_chain(small0)
        # deform by stabilizers: homology class must survive the round trip
        for _ in range(10):
            x, y = rng.integers(0, 9, size=2)
            big ^= lattice.plaquette_boundary(9, int(x), int(y))
        small = lattice.pushforward_chain(big, 1)
        diff = lattice.pullback_chain(small) ^ big
        assert lattice.homology_class(diff) == (0, 0)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 20 - 1))
def test_chain_with_syndrome_matches(request_bits):
    rng = np.random.default_rng(request_bits)
    syn = (rng.random((9, 9)) < 0.2).astype(np.uint8)
    if int(syn.sum()) % 2:
        syn[tuple(np.argwhere(syn)[0])] = 0
    cfg = lattice.chain_with_syndrome(syn)
    assert np.array_equal(lattice.syndromes_of(cfg), syn)


def test_lattice_guards():
    with pytest.raises(ValueError):
        lattice.TorusLattice(2)
    assert lattice.TorusLattice(9).n_links == 162
    assert lattice.TorusLattice(9).n_vertices == 81
