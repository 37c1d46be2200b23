import itertools

import numpy as np
import pytest

from torica import tsirelson as ts


def apply_circuit(circ, bits):
    bits = np.array(bits, dtype=np.uint8)
    for rnd in circ.rounds:
        ts.apply_round_1d(bits, rnd)
    return bits


def enc(vals, reps=3):
    return np.repeat(np.asarray(vals, dtype=np.uint8), reps)


def test_original_depths_and_sizes():
    for n in range(4):
        assert ts.build_tsirelson("X", n, "original").depth == 6 ** n
        assert ts.build_tsirelson("X", n, "original").nbits == 3 ** n
    assert ts.build_tsirelson("Y", 1, "original").nbits == 6
    assert ts.build_tsirelson("Z", 1, "original").nbits == 9


def test_modified_depths():
    assert ts.build_tsirelson("X", 1, "modified").depth == 6
    assert ts.build_tsirelson("Y", 1, "modified").depth == 6
    assert ts.build_tsirelson("Z", 1, "modified").depth == 11


def test_original_z1_redistribution_example():
    # majority votes then redistribution fragments the middle-block domain
    circ = ts.build_tsirelson("Z", 1, "original")
    out = apply_circuit(circ, [0, 0, 0, 1, 0, 1, 0, 0, 0])
    assert "".join(map(str, out)) == "010010010"


def test_level0_gates():
    x0 = ts.build_tsirelson("X", 0, "original")
    assert x0.depth == 1 and x0.nbits == 1
    y0 = ts.build_tsirelson("Y", 0, "original")
    assert np.array_equal(apply_circuit(y0, [1, 0]), [0, 1])
    z0 = ts.build_tsirelson("Z", 0, "original")
    assert np.array_equal(apply_circuit(z0, [1, 1, 0]), [1, 1, 1])


def test_recursive_majority():
    assert ts.recursive_majority(np.ones(9, dtype=np.uint8)) == 1
    assert ts.recursive_majority(np.array([1, 0, 1], dtype=np.uint8)) == 1
    # D2(110 100 000) = maj(1, 0, 0) = 0
    bits = np.array([1, 1, 0, 1, 0, 0, 0, 0, 0], dtype=np.uint8)
    assert ts.recursive_majority(bits) == 0
    with pytest.raises(ValueError):
        ts.recursive_majority(np.zeros(6, dtype=np.uint8))


def test_maj_decomposition():
    assert ts.maj_decomposition_check()
    # explicit syndrome-annihilation case from the decomposition
    bits = np.array([0, 1, 0], dtype=np.uint8)
    for rnd in ts.maj_rounds_stabilizer(0):
        ts.apply_round_1d(bits, rnd)
    assert np.array_equal(bits, [0, 0, 0])


def test_stabilizer_gates_match_bit_gates():
    # product-state equivalence of the measurement-feedback gates, arity <= 3
    t0 = ts.build_tsirelson("Y", 0, "stabilizer")
    y0 = ts.build_tsirelson("Y", 0, "original")
    for bits in itertools.product((0, 1), repeat=2):
        assert np.array_equal(apply_circuit(t0, bits), apply_circuit(y0, bits))
    mstab = ts.build_tsirelson("Z", 0, "stabilizer")
    z0 = ts.build_tsirelson("Z", 0, "original")
    for bits in itertools.product((0, 1), repeat=3):
        assert np.array_equal(apply_circuit(mstab, bits), apply_circuit(z0, bits))


def test_modified_gadgets_noiseless_logical_action():
    z1 = ts.build_tsirelson("Z", 1, "modified")
    for logicals in itertools.product((0, 1), repeat=3):
        out = apply_circuit(z1, enc(logicals))
        m = 1 if sum(logicals) >= 2 else 0
        assert np.array_equal(out, enc([m, m, m]))
    y1 = ts.build_tsirelson("Y", 1, "modified")
    for logicals in itertools.product((0, 1), repeat=2):
        out = apply_circuit(y1, enc(logicals))
        assert np.array_equal(out, enc(logicals[::-1]))


def test_self_simulation_level1_exhaustive():
    # blockwise decode after the level-1 gadget equals the level-0 gate
    # after blockwise decode, on encoded inputs
    for kind, nblocks in (("X", 1), ("Y", 2), ("Z", 3)):
        g1 = ts.build_tsirelson(kind, 1, "modified")
        g0 = ts.build_tsirelson(kind, 0, "original")
        for logicals in itertools.product((0, 1), repeat=nblocks):
            out = apply_circuit(g1, enc(logicals))
            dec = [ts.recursive_majority(b) for b in out.reshape(nblocks, 3)]
            ref = apply_circuit(g0, list(logicals))
            assert np.array_equal(dec, ref), (kind, logicals)


@pytest.mark.slow
def test_self_simulation_level2_sampled():
    rng = np.random.default_rng(3)
    g2 = ts.build_tsirelson("Z", 2, "modified")
    g1 = ts.build_tsirelson("Z", 1, "modified")
    for _ in range(20):
        logicals = rng.integers(0, 2, size=3)
        inner = enc(logicals)          # 9 bits, one per level-1 block
        out2 = apply_circuit(g2, enc(inner))
        dec = np.array([ts.recursive_majority(b)
                        for b in out2.reshape(9, 3)], dtype=np.uint8)
        ref = apply_circuit(g1, inner)
        assert np.array_equal(dec, ref)


def test_spin_flip_symmetry():
    rng = np.random.default_rng(4)
    for kind in ("X", "Y", "Z"):
        circ = ts.build_tsirelson(kind, 1, "original")
        for _ in range(10):
            bits = rng.integers(0, 2, size=circ.nbits).astype(np.uint8)
            a = apply_circuit(circ, bits)
            b = apply_circuit(circ, bits ^ 1)
            assert np.array_equal(a ^ 1, b)


def test_run1d_determinism_and_noise():
    circ = ts.build_tsirelson("X", 2, "original")
    noise = ts.WireNoise(0.05)
    a = ts.run1d(circ, noise, seed=11, repetitions=3)
    b = ts.run1d(circ, noise, seed=11, repetitions=3)
    assert np.array_equal(a, b)
    c = ts.run1d(circ, noise, seed=12, repetitions=3)
    assert not np.array_equal(a, c)  # overwhelmingly likely
    clean = ts.run1d(circ, ts.WireNoise(0.0), seed=0, repetitions=5)
    assert clean.all()


def test_run1d_gadget_noise_and_biased_wire():
    circ = ts.build_tsirelson("X", 1, "original")
    out = ts.run1d(circ, ts.GadgetNoise1D(1.0), seed=5, repetitions=1)
    assert out.shape == (3,)
    # eta = 1 replaces hit bits by 1
    noisy = ts.run1d(circ, ts.WireNoise(1.0, eta=1.0), seed=6,
                     s0=np.zeros(3, dtype=np.uint8))
    assert noisy.all()


def test_estimate_fidelity_trivial():
    res = ts.estimate_fidelity(2, 5, ts.WireNoise(0.0), trials=16, seed=0)
    assert res["F"] == 1.0


def test_estimate_trel_censoring():
    res = ts.estimate_trel_1d(1, ts.WireNoise(0.0), trials=8, t_max=4, seed=0)
    assert res["censored_fraction"] == 1.0
    res = ts.estimate_trel_1d(1, ts.WireNoise(0.3), trials=32, t_max=50, seed=0)
    assert res["censored_fraction"] < 0.2
    assert res["mean"] >= 1.0


def test_gate_ec_conditions_modified_pass():
    rep = ts.check_gate_ec_conditions_level1("modified")
    assert rep["ok"], rep["counterexamples"]
    assert rep["cases"] > 1000


def test_gate_ec_conditions_original_fail():
    # the unmodified majority gadget must violate the decode condition;
    # this is the negative control showing the checker has teeth
    rep = ts.check_gate_ec_conditions_level1("original")
    assert not rep["ok"]
    assert any(k.startswith("GateB[Z1]") for k in rep["counterexamples"])


def test_z1_with_fault_stays_near_codeword_after_ec():
    # the example input with one defect plus one internal fault: after a
    # trailing majority layer the state is within one flip of an encoded word
    z1 = ts.build_tsirelson("Z", 1, "modified")
    s0 = np.array([1, 1, 1, 1, 0, 0, 0, 0, 0], dtype=np.uint8)
    for ell in range(z1.depth + 1):
        for i in range(9):
            bits = s0.copy()
            for t, rnd in enumerate(z1.rounds):
                if t == ell:
                    bits[i] ^= 1
                ts.apply_round_1d(bits, rnd)
            if ell == z1.depth:
                bits[i] ^= 1
            for rnd in ts._ec1_layer(9, "stabilizer"):
                ts.apply_round_1d(bits, rnd)
            blocks = bits.reshape(3, 3)
            defects = sum(int(min(b.sum(), 3 - b.sum())) for b in blocks)
            assert defects <= 1, (ell, i, bits)
