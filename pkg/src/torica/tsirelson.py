"""One-dimensional repetition-code automata.

Three gadget bases:

* ``original``  -- idle / swap / majority-broadcast gates composed by the
  substitution rules (depth 6**n at level n).  The Monte-Carlo numerics run
  this variant.
* ``modified``  -- the transversal redesign: the level-1 swap and idle keep
  depth 6 with the leading majority layer replaced by idles, and the level-1
  majority becomes redistribute / vote / redistribute with depth 11.  Higher
  levels arise from repeated fault-tolerant simulation (an error-correction
  layer inserted between consecutive gate layers).
* ``stabilizer`` -- measurement-and-feedback gates: T (split) and M (match),
  with the majority realized as M T M T M.  On product states these act
  exactly like the bit gates; they are the rows from which the toric-code
  composites are built.

Bit lines are uint8 arrays of shape ``(..., nbits)``; leading axes run
Monte-Carlo trials in lockstep.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

# A round is a tuple of (op, positions) pairs; positions is a tuple of the
# leftmost bit of each placed gate.  Ops: X0 idle(1), Y0 swap(2), Z0 maj(3),
# I0 idle(1), T0 split(2), M0 match(3, flips its middle bit).
OP_WIDTH = {"X0": 1, "Y0": 2, "Z0": 3, "I0": 1, "T0": 2, "M0": 3}

DIAMOND = ((2,), (1, 3), (0, 2, 4), (1, 3), (2,))          # block swap, depth 5
TRANSPOSE = ((2,), (1, 3, 5), (4, 6), (3, 5), (2,))        # block transpose, depth 5


@dataclass
class Circuit1D:
    variant: str
    kind: str
    level: int
    nbits: int
    rounds: list = field(repr=False)
    periodic: bool = False

    @property
    def depth(self) -> int:
        return len(self.rounds)


def _shift(rounds, off):
    return [tuple((op, tuple(p + off for p in pos)) for op, pos in rnd)
            for rnd in rounds]


def _merge(parts):
    depth = {len(p) for p in parts}
    assert len(depth) == 1, "lockstep merge requires equal depths"
    out = []
    for j in range(depth.pop()):
        ops: dict[str, list] = {}
        for part in parts:
            for op, pos in part[j]:
                ops.setdefault(op, []).extend(pos)
        out.append(tuple((op, tuple(sorted(p))) for op, p in sorted(ops.items())))
    return out


def _idles(nbits, depth, op="X0"):
    rnd = ((op, tuple(range(nbits))),)
    return [rnd] * depth


def _swap_steps(pairs_seq, blk, nblocks, sub_y, sub_x):
    """Block permutation network: per step, swap gadgets on the listed
    adjacent block pairs and idles elsewhere, each lasting one sub-depth."""
    steps = []
    for pairs in pairs_seq:
        parts = []
        busy = set()
        for a in pairs:
            parts.append(_shift(sub_y, a * blk))
            busy.update((a, a + 1))
        for b in range(nblocks):
            if b not in busy:
                parts.append(_shift(sub_x, b * blk))
        steps.extend(_merge(parts))
    return steps


@lru_cache(maxsize=None)
def _original(kind: str, n: int) -> tuple:
    if n == 0:
        base = {"X": ("X0", 1), "Y": ("Y0", 2), "Z": ("Z0", 3)}[kind]
        return (((base[0], (0,)),),), base[1]
    subx, nx = _original("X", n - 1)
    suby, _ = _original("Y", n - 1)
    subz, nz = _original("Z", n - 1)
    subx, suby, subz = list(subx), list(suby), list(subz)
    blk = nx
    if kind == "X":
        rounds = list(subz)
        for _ in range(5):
            rounds += _merge([_shift(subx, b * blk) for b in range(3)])
        return tuple(rounds), 3 * blk
    if kind == "Y":
        rounds = _merge([subz, _shift(subz, 3 * blk)])
        rounds += _swap_steps(DIAMOND, blk, 6, suby, subx)
        return tuple(rounds), 6 * blk
    if kind == "Z":
        rounds = _merge([_shift(subz, 3 * b * blk) for b in range(3)])
        rounds += _swap_steps(TRANSPOSE, blk, 9, suby, subx)
        return tuple(rounds), 9 * blk
    raise ValueError(f"unknown kind {kind!r}")


def _bit_transpose_rounds(nine: int = 9, op_swap="Y0", op_idle="X0"):
    rounds = []
    for verts in TRANSPOSE:
        busy = {v for v in verts} | {v + 1 for v in verts}
        rnd = [(op_swap, tuple(verts))]
        idle = tuple(b for b in range(nine) if b not in busy)
        if idle:
            rnd.append((op_idle, idle))
        rounds.append(tuple(rnd))
    return rounds


def _bit_diamond_rounds(op_swap="Y0", op_idle="X0"):
    rounds = []
    for verts in DIAMOND:
        busy = {v for v in verts} | {v + 1 for v in verts}
        rnd = [(op_swap, tuple(verts))]
        idle = tuple(b for b in range(6) if b not in busy)
        if idle:
            rnd.append((op_idle, idle))
        rounds.append(tuple(rnd))
    return rounds


def _modified_level1(kind: str):
    if kind == "X":
        return _idles(3, 6), 3
    if kind == "Y":
        return _idles(6, 1) + _bit_diamond_rounds(), 6
    if kind == "Z":
        mid = [(("Z0", (0, 3, 6)),)]
        return (_bit_transpose_rounds() + mid + _bit_transpose_rounds()), 9
    raise ValueError(f"unknown kind {kind!r}")


def _stabilizer_level1(kind: str):
    if kind == "X":
        return _idles(3, 6, "I0"), 3
    if kind == "Y":
        return (_idles(6, 1, "I0")
                + _bit_diamond_rounds(op_swap="T0", op_idle="I0")), 6
    if kind == "Z":
        mid = [(("M0", (1, 4, 7)),)]
        return (_bit_transpose_rounds(op_swap="T0", op_idle="I0") + mid
                + _bit_transpose_rounds(op_swap="T0", op_idle="I0")), 9
    raise ValueError(f"unknown kind {kind!r}")


def maj_rounds_stabilizer(offset: int = 0):
    """The five-step split/match realization of one 3-bit majority vote."""
    e = offset + 1
    return [(("M0", (e,)),), (("T0", (e - 1,)),), (("M0", (e,)),),
            (("T0", (e,)),), (("M0", (e,)),)]


def _ec1_layer(nbits: int, variant: str):
    """Error-correction layer tiling the line with 3-bit majority votes."""
    assert nbits % 3 == 0
    starts = tuple(range(0, nbits, 3))
    if variant == "modified":
        return [(("Z0", starts),)]
    return _merge([maj_rounds_stabilizer(s) for s in starts])


def _lift_round_1d(rnd, variant: str):
    """Replace each level-0 gate of a round by its level-1 gadget (anchor
    positions triple), padding depth mismatches with trailing idles."""
    gad = _modified_level1 if variant == "modified" else _stabilizer_level1
    idle_op = "X0" if variant == "modified" else "I0"
    parts = []
    for op, positions in rnd:
        kind = {"X0": "X", "I0": "X", "Y0": "Y", "T0": "Y",
                "Z0": "Z", "M0": "Z"}[op]
        sub, _ = gad(kind)
        for p in positions:
            base = 3 * (p - 1) if op == "M0" else 3 * p
            parts.append((_shift(sub, base), base, 3 * OP_WIDTH[op]))
    depth = max(len(part) for part, _, _ in parts)
    out_parts = []
    for part, base, width in parts:
        if len(part) < depth:
            pad = ((idle_op, tuple(range(base, base + width))),)
            part = part + [pad] * (depth - len(part))
        out_parts.append(part)
    return _merge(out_parts)


def ft_expand_1d(rounds, nbits: int, variant: str):
    """One fault-tolerant simulation step: triple the line, lift every gate
    one level, and insert an EC layer between consecutive rounds plus one
    leading and one trailing layer."""
    new_n = 3 * nbits
    ec = _ec1_layer(new_n, variant)
    out = list(ec)
    for rnd in rounds:
        out += _lift_round_1d(rnd, variant)
        out += ec
    return out, new_n


def build_tsirelson(kind: str, n: int, variant: str = "original") -> Circuit1D:
    """Fully expanded circuit of the level-n gadget for the given basis."""
    if kind not in ("X", "Y", "Z"):
        raise ValueError(f"unknown kind {kind!r}")
    if variant == "original":
        rounds, nbits = _original(kind, n)
        return Circuit1D(variant, kind, n, nbits, list(rounds))
    if variant not in ("modified", "stabilizer"):
        raise ValueError(f"unknown variant {variant!r}")
    if n == 0:
        op = {("modified", "X"): "X0", ("modified", "Y"): "Y0",
              ("modified", "Z"): "Z0", ("stabilizer", "X"): "I0",
              ("stabilizer", "Y"): "T0", ("stabilizer", "Z"): "M0"}[(variant, kind)]
        if variant == "stabilizer" and kind == "Z":
            return Circuit1D(variant, kind, 0, 3, maj_rounds_stabilizer(0))
        return Circuit1D(variant, kind, 0, OP_WIDTH[op], [((op, (0,)),)])
    gad = _modified_level1 if variant == "modified" else _stabilizer_level1
    rounds, nbits = gad(kind)
    for _ in range(n - 1):
        # bare higher-level gadget: lift rounds and insert EC layers between
        lifted = []
        new_n = 3 * nbits
        ec = _ec1_layer(new_n, variant)
        for j, rnd in enumerate(rounds):
            lifted += _lift_round_1d(rnd, variant)
            if j != len(rounds) - 1:
                lifted += ec
        rounds, nbits = lifted, new_n
    return Circuit1D(variant, kind, n, nbits, list(rounds))


# ---------------------------------------------------------------------------
# Execution


@dataclass(frozen=True)
class WireNoise:
    """Per-step replacement noise: with probability p each bit is replaced by
    a Bernoulli variable with mean (1 + eta) / 2."""
    p: float
    eta: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0 or not -1.0 <= self.eta <= 1.0:
            raise ValueError("need 0 <= p <= 1 and -1 <= eta <= 1")


@dataclass(frozen=True)
class GadgetNoise1D:
    """Each placed gate fails independently with probability p; the output
    bits of a failed gate are replaced by uniform random values."""
    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p out of range")


def apply_round_1d(bits: np.ndarray, rnd) -> np.ndarray:
    n = bits.shape[-1]
    for op, positions in rnd:
        if not positions:
            continue
        pos = np.asarray(positions)
        if op in ("X0", "I0"):
            continue
        if op in ("Y0", "T0"):
            a, b = pos % n, (pos + 1) % n
            tmp = bits[..., a].copy()
            bits[..., a] = bits[..., b]
            bits[..., b] = tmp
        elif op == "Z0":
            a, b, c = pos % n, (pos + 1) % n, (pos + 2) % n
            m = ((bits[..., a].astype(np.int16) + bits[..., b] + bits[..., c]) >= 2
                 ).astype(np.uint8)
            bits[..., a] = m
            bits[..., b] = m
            bits[..., c] = m
        elif op == "M0":
            a, b, c = (pos - 1) % n, pos % n, (pos + 1) % n
            fire = (bits[..., a] ^ bits[..., b]) & (bits[..., b] ^ bits[..., c])
            bits[..., b] ^= fire
        else:
            raise ValueError(f"unknown op {op!r}")
    return bits


def _apply_gadget_noise_1d(bits, rnd, p, rng):
    for op, positions in rnd:
        if not positions:
            continue
        pos = np.asarray(positions)
        fails = rng.random(bits.shape[:-1] + (len(positions),)) < p
        if not fails.any():
            continue
        w = OP_WIDTH[op]
        start = pos - 1 if op == "M0" else pos
        n = bits.shape[-1]
        for d in range(w):
            col = (start + d) % n
            rand = (rng.random(fails.shape) < 0.5).astype(np.uint8)
            cur = bits[..., col]
            bits[..., col] = np.where(fails, rand, cur)
    return bits


def run1d(circuit: Circuit1D, noise=None, seed: int | None = 0,
          s0: np.ndarray | None = None, repetitions: int = 1,
          trajectory: bool = False):
    """Run a circuit (optionally repeated) on bit line(s).

    Wire noise is applied to every bit after each round; gadget noise
    randomizes the outputs of failed gates within each round.  Deterministic
    given (seed, inputs).
    """
    if s0 is None:
        s0 = np.ones(circuit.nbits, dtype=np.uint8)
    bits = np.array(s0, dtype=np.uint8, copy=True)
    if bits.shape[-1] != circuit.nbits:
        raise ValueError(f"expected {circuit.nbits} bits, got {bits.shape[-1]}")
    rng = np.random.default_rng(seed)
    traj = []
    for _ in range(repetitions):
        for rnd in circuit.rounds:
            if isinstance(noise, GadgetNoise1D):
                apply_round_1d(bits, rnd)
                _apply_gadget_noise_1d(bits, rnd, noise.p, rng)
            else:
                apply_round_1d(bits, rnd)
            if isinstance(noise, WireNoise) and noise.p > 0:
                hit = rng.random(bits.shape) < noise.p
                val = (rng.random(bits.shape) < (1 + noise.eta) / 2).astype(np.uint8)
                bits = np.where(hit, val, bits)
        if trajectory:
            traj.append(bits.copy())
    return (bits, traj) if trajectory else bits


def recursive_majority(bits: np.ndarray) -> np.ndarray:
    """The hierarchical 3-way majority decoder D_k on length-3**k lines."""
    n = bits.shape[-1]
    k = round(np.log(n) / np.log(3)) if n > 1 else 0
    if 3 ** k != n:
        raise ValueError(f"length {n} is not a power of 3")
    out = bits.astype(np.uint8)
    while out.shape[-1] > 1:
        trip = out.reshape(out.shape[:-1] + (out.shape[-1] // 3, 3))
        out = (trip.sum(axis=-1) >= 2).astype(np.uint8)
    return out[..., 0]


def maj_decomposition_check() -> bool:
    """The split/match sequence equals the majority broadcast on all 8 inputs."""
    for x in range(8):
        bits = np.array([(x >> i) & 1 for i in range(3)], dtype=np.uint8)
        ref = np.full(3, 1 if bits.sum() >= 2 else 0, dtype=np.uint8)
        got = bits.copy()
        for rnd in maj_rounds_stabilizer(0):
            apply_round_1d(got, rnd)
        if not np.array_equal(got, ref):
            return False
    return True


# ---------------------------------------------------------------------------
# Monte-Carlo estimators (original automaton)


def estimate_fidelity(n: int, T: int, noise, trials: int, seed: int = 0,
                      batch: int = 4096) -> dict:
    """F(T): success probability of ideal decoding after T applications of
    the level-n error-correcting idle, minimized over the two codewords."""
    circ = build_tsirelson("X", n, "original")
    probs = {}
    for logical in (0, 1):
        ok = 0
        done = 0
        chunk = 0
        while done < trials:
            b = min(batch, trials - done)
            rng_seed = np.random.SeedSequence((seed, 0xF1D, n, logical, chunk))
            s0 = np.full((b, circ.nbits), logical, dtype=np.uint8)
            out = run1d(circ, noise, rng_seed, s0, repetitions=T)
            ok += int((recursive_majority(out) == logical).sum())
            done += b
            chunk += 1
        probs[logical] = ok / trials
    f = min(probs.values())
    se = float(np.sqrt(max(f * (1 - f), 1e-12) / trials))
    return {"F": f, "se": se, "per_codeword": probs, "n": n, "T": T}


def estimate_trel_1d(n: int, noise, trials: int, t_max: int, seed: int = 0,
                     batch: int = 4096) -> dict:
    """Censored mean first time at which ideal decoding leaves the initial
    codeword, in units of applications of the level-n idle."""
    circ = build_tsirelson("X", n, "original")
    t_fail = np.empty(trials, dtype=np.int64)
    done = 0
    chunk = 0
    while done < trials:
        b = min(batch, trials - done)
        rng = np.random.default_rng(np.random.SeedSequence((seed, 0x7E1D, n, chunk)))
        bits = np.ones((b, circ.nbits), dtype=np.uint8)
        fail = np.full(b, t_max, dtype=np.int64)
        alive = np.ones(b, dtype=bool)
        for t in range(1, t_max + 1):
            for rnd in circ.rounds:
                if isinstance(noise, GadgetNoise1D):
                    apply_round_1d(bits, rnd)
                    _apply_gadget_noise_1d(bits, rnd, noise.p, rng)
                else:
                    apply_round_1d(bits, rnd)
                    if noise.p > 0:
                        hit = rng.random(bits.shape) < noise.p
                        val = (rng.random(bits.shape) < (1 + noise.eta) / 2
                               ).astype(np.uint8)
                        bits = np.where(hit, val, bits)
            bad = (recursive_majority(bits) != 1) & alive
            fail[bad] = t
            alive &= ~bad
            if not alive.any():
                break
        t_fail[done:done + b] = fail
        done += b
        chunk += 1
    censored = float((t_fail >= t_max).mean())
    return {"n": n, "t_max": t_max, "mean": float(t_fail.mean()),
            "se": float(t_fail.std(ddof=1) / np.sqrt(trials)),
            "censored_fraction": censored, "t_fail": t_fail}


# ---------------------------------------------------------------------------
# Exhaustive level-1 gate and EC conditions (wire error model, t = 1)


def _codeword(bits_per_block, logicals):
    return np.repeat(np.asarray(logicals, dtype=np.uint8), bits_per_block)


def _block_decode(bits, nblocks):
    blocks = bits.reshape(nblocks, -1)
    return tuple(int(b.sum() >= 2) for b in blocks)


def _block_defects(bits, nblocks):
    """Distance of each block to its nearest codeword."""
    blocks = bits.reshape(nblocks, -1)
    return tuple(int(min(b.sum(), b.size - b.sum())) for b in blocks)


_LOGICAL_ACTION = {
    "X": lambda l: l,
    "Y": lambda l: (l[1], l[0]),
    "Z": lambda l: (int(sum(l) >= 2),) * 3,
}


def _run_with_wire_fault(circ: Circuit1D, s0, fault):
    """fault = (layer, bit) flips the bit before the given round (layer ==
    depth flips the output wire)."""
    bits = s0.copy()
    for ell, rnd in enumerate(circ.rounds):
        if fault is not None and fault[0] == ell:
            bits[fault[1]] ^= 1
        apply_round_1d(bits, rnd)
    if fault is not None and fault[0] == circ.depth:
        bits[fault[1]] ^= 1
    return bits


def check_gate_ec_conditions_level1(variant: str = "modified") -> dict:
    """Exhaustive single-wire-fault verification of Gate A/B for the level-1
    gate gadgets and EC A/B for the majority gate, with t = 1.

    Enumerates every input passing the r-filters and every single wire fault
    location (including input and output wires); sum of input defects and
    fault count is held <= 1.  Returns per-condition counterexample lists.
    """
    report = {"variant": variant, "counterexamples": {}, "cases": 0}

    def note(cond, info):
        report["counterexamples"].setdefault(cond, []).append(info)

    for kind, nblocks in (("X", 1), ("Y", 2), ("Z", 3)):
        circ = build_tsirelson(kind, 1, variant)
        faults = [None] + [(ell, i) for ell in range(circ.depth + 1)
                           for i in range(circ.nbits)]
        for logical_bits in range(2 ** nblocks):
            logicals = tuple((logical_bits >> i) & 1 for i in range(nblocks))
            base = _codeword(3, logicals)
            ideal = _LOGICAL_ACTION[kind](logicals)
            # s = 1, r = 0: codeword inputs, every single wire fault
            for fault in faults:
                out = _run_with_wire_fault(circ, base, fault)
                budget = 0 if fault is None else 1
                report["cases"] += 1
                if any(d > budget for d in _block_defects(out, nblocks)):
                    note(f"GateA[{kind}1]", (logicals, fault))
                if _block_decode(out, nblocks) != ideal:
                    note(f"GateB[{kind}1]", (logicals, fault))
            # s = 0, r = 1: one input defect anywhere, no faults
            for i in range(circ.nbits):
                s0 = base.copy()
                s0[i] ^= 1
                out = _run_with_wire_fault(circ, s0, None)
                report["cases"] += 1
                if any(d > 1 for d in _block_defects(out, nblocks)):
                    note(f"GateA[{kind}1]", (logicals, ("defect", i)))
                if _block_decode(out, nblocks) != ideal:
                    note(f"GateB[{kind}1]", (logicals, ("defect", i)))

    # EC = the level-0 majority gate
    ec = build_tsirelson("Z", 0, variant)
    faults = [None] + [(ell, i) for ell in range(ec.depth + 1) for i in range(3)]
    for x in range(8):
        s0 = np.array([(x >> i) & 1 for i in range(3)], dtype=np.uint8)
        for fault in faults:
            out = _run_with_wire_fault(ec, s0, fault)
            budget = 0 if fault is None else 1
            report["cases"] += 1
            # EC A: arbitrary input, s faults -> output within s of a codeword
            if _block_defects(out, 1)[0] > budget:
                note("ECA", (tuple(s0), fault))
            # EC B: r + s <= 1 with input r-close
            r = _block_defects(s0, 1)[0]
            if r + budget <= 1:
                if _block_decode(out, 1) != _block_decode(s0, 1):
                    note("ECB", (tuple(s0), fault))
    report["ok"] = not report["counterexamples"]
    return report
