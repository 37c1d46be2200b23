import numpy as np
import pytest

from torica import compiler, gadgets, lattice
from torica.compiler import SimParams


def test_depths_of_primitives():
    assert compiler.inner_ec(1, doubled=True).depth == 48
    assert compiler.inner_ec(1, doubled=False).depth == 24
    assert compiler.inner_gate("I", 1).depth == 5
    assert compiler.inner_gate("Th", 1).depth == 6
    assert compiler.inner_gate("Mh", 1).depth == 11
    assert compiler.depth(compiler.Schedule(3, (), (), 0)) == 0


def test_inner_ec2_structure():
    # one EC layer before each gate layer plus a leading layer: for the
    # undoubled 24-round template, depth = 24 + sum over template rounds of
    # (gate depth + 24)
    ec2 = compiler.ec_layer(2, False)
    per_round = {"T": 6, "M": 11}
    expect = 24
    for rnd in gadgets.ec_template(False):
        kinds = {k for k, _, _ in rnd}
        depth = 11 if {"Mh", "Mv"} & kinds else 6
        expect += depth + 24
    assert len(ec2) == expect


def test_inner_gate2_contains_single_m1_band():
    # the level-2 match gate's template splits into eleven sub-rounds of
    # level-1 gadgets, exactly one of which is the band of level-1 matches
    from torica.compiler import _pattern_subrounds
    pat = gadgets.make_round(9, [("Mh", 0, 0)])
    subs = _pattern_subrounds(pat, 3)
    m_bands = [s for s in subs
               if any(k == "Mh" for k, _, _ in s.placements)]
    assert len(subs) == 11
    assert len(m_bands) == 1


def test_every_round_tiles():
    for params in (SimParams(1, 1, 1), SimParams(1, 2, 1)):
        sched = compiler.outer_ft(params)
        for rnd in set(sched.prefix) | set(sched.unit):
            assert rnd.covers_lattice(sched.L)


def test_outer_ft_shapes():
    sched = compiler.outer_ft(SimParams(1, 1, 1))
    assert sched.L == 3
    assert sched.depth == 24 + 5 + 24
    sched2 = compiler.outer_ft(SimParams(1, 2, 3))
    assert sched2.L == 9
    assert len(sched2.unit) * 3 + len(sched2.prefix) == sched2.depth
    with pytest.raises(ValueError):
        SimParams(0, 1, 1)


def test_outer_vs_inner_duplication():
    # the inner recursion duplicates EC layers at gadget seams; the outer one
    # does not, so FT~2(I) is strictly shallower than EC2 o I2 o EC2
    inner_len = 2 * len(compiler.ec_layer(2, False)) + len(
        compiler.expand_gate_pattern(gadgets.make_round(9, [("I", 0, 0)]), 2,
                                     False))
    outer = compiler.outer_ft(SimParams(1, 2, 1)).depth
    assert outer < inner_len


def test_periodicity_and_streaming():
    sched = compiler.outer_ft(SimParams(1, 1, 4))
    period = len(sched.unit)
    for t in range(len(sched.prefix), sched.depth - period):
        assert sched.layer(t) == sched.layer(t + period)
    # periodic extension past the end
    assert sched.layer(sched.depth, periodic=True) == sched.layer(
        sched.depth - period, periodic=True)
    with pytest.raises(IndexError):
        sched.layer(sched.depth)


def test_noiseless_codeword_preserved():
    from torica.simulator import run_schedule
    sched = compiler.outer_ft(SimParams(1, 2, 2))
    state = lattice.noncontractible_loop(9, 0)
    out, _ = run_schedule(sched, state=state.copy())
    assert not lattice.syndromes_of(out).any()
    assert lattice.homology_class(out) == (1, 0)


def test_self_simulation_pulling_decoder_through():
    # noiseless execution commutes with ideal decoding: decode after the
    # simulated circuit equals the base circuit after decoding, on
    # frame-coarse-grained inputs
    from torica.gadgets import apply_round
    from torica.simulator import run_schedule
    rng = np.random.default_rng(8)
    outer = compiler.outer_ft(SimParams(1, 2, 2))
    base = compiler.outer_ft(SimParams(1, 1, 2))
    for _ in range(5):
        small = (rng.random((2, 3, 3)) < 0.4).astype(np.uint8)
        big = lattice.pullback_chain(small)
        out_big, _ = run_schedule(outer, state=big.copy())
        # decode: one noiseless recovery layer, then reduce
        for rnd in compiler.ec_layer(1, False):
            apply_round(out_big, rnd)
        dec = lattice.pushforward_chain(out_big, 1)
        out_small, _ = run_schedule(base, state=small.copy())
        assert np.array_equal(lattice.syndromes_of(dec),
                              lattice.syndromes_of(out_small))
        diff = dec ^ out_small
        assert not lattice.syndromes_of(diff).any()
        assert lattice.homology_class(diff) == (0, 0)


def test_dump_schedule_stable():
    sched = compiler.outer_ft(SimParams(1, 1, 1))
    text = compiler.dump_schedule(sched, 0, 2)
    assert text.splitlines()[0].startswith("t=0 ")
    assert compiler.dump_schedule(sched, 0, 2) == text


def test_ft_ec_rounds_unit():
    assert len(compiler.ft_ec_rounds(1, False)) == 24
    assert len(compiler.ft_ec_rounds(1, True)) == 48
    r2 = compiler.ft_ec_rounds(2, False)
    assert len(r2) == 24 + sum(
        (11 if {"Mh", "Mv"} & {k for k, _, _ in rnd} else 6) + 24
        for rnd in gadgets.ec_template(False))
