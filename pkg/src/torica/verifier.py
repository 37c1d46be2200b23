"""Exhaustive verification: damage-set nilpotence iteration, recovery-gadget
fault cleanup, the 1D match-gadget reversibility table, and the confinement,
linearity, and coarse-graining checks used throughout the construction.

The damage-set iteration tracks, per gate kind, the set of coarse-grained
syndrome patterns that a single elementary failure can leave behind after the
level-1 gadget plus trailing noise-free recovery, pushed one level down.  The
iteration mixes the chains (a pattern left at a T slot gets replayed at the T
slots of every gadget kind in the next round), and the construction is
nilpotent once all sets iterate to empty.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .compiler import ec_layer, expand_gate_pattern
from .gadgets import (GADGET_KINDS, SUPPORT_CELLS, Round, apply_round,
                      make_round, support_links, support_vertices)
from .lattice import (HORIZONTAL, VERTICAL, chain_with_syndrome, new_config,
                      sigma_mask, syndromes_of)
from . import tsirelson


# ---------------------------------------------------------------------------
# Syndrome-level dynamics (feedback depends on the state only through the
# syndromes, so confinement and linearity are checked on syndrome fields)


def apply_round_syn(syn: np.ndarray, rnd: Round, *,
                    meas_flip: np.ndarray | None = None,
                    toggle: np.ndarray | None = None,
                    zero_mask: np.ndarray | None = None) -> np.ndarray:
    """One layer acting on a syndrome field (in place).

    ``toggle`` injects noise syndromes after feedback; ``zero_mask`` clears
    syndromes on the marked vertices at the end of the step, which is the
    restricted dynamics entering the confinement condition.
    """
    L = syn.shape[-1]
    masks = rnd.masks(L)
    snap = syn if meas_flip is None else syn ^ meas_flip
    on = snap == 1
    acc = np.zeros_like(syn)
    for kind, mask in masks.items():
        if kind == "I":
            continue
        if kind == "Th":
            fire = on & mask
            acc ^= (np.roll(fire, -1, axis=-2) ^ np.roll(fire, 1, axis=-2)
                    ).astype(np.uint8)
        elif kind == "Tv":
            fire = on & mask
            acc ^= (np.roll(fire, -1, axis=-1) ^ np.roll(fire, 1, axis=-1)
                    ).astype(np.uint8)
        elif kind == "Mh":
            fire = mask & on & np.roll(on, -1, axis=-2)
            acc ^= (fire ^ np.roll(fire, 1, axis=-2)).astype(np.uint8)
        elif kind == "Mv":
            fire = mask & on & np.roll(on, -1, axis=-1)
            acc ^= (fire ^ np.roll(fire, 1, axis=-1)).astype(np.uint8)
    syn ^= acc
    if toggle is not None:
        syn ^= toggle
    if zero_mask is not None:
        syn[..., zero_mask] = 0
    return syn


def run_rounds_syn(syn, rounds, toggles: dict | None = None, zero_mask=None):
    for i, rnd in enumerate(rounds):
        tog = None if toggles is None else toggles.get(i)
        apply_round_syn(syn, rnd, toggle=tog, zero_mask=zero_mask)
    return syn


# ---------------------------------------------------------------------------
# Gamma map and the damage-set iteration

L_PATCH = 9  # one 9x9-cell patch holds every level-1 gadget plus neighbors


def _support_cells_scaled(kind):
    return [(3 * cx + i, 3 * cy + j) for cx, cy in SUPPORT_CELLS[kind]
            for i in range(3) for j in range(3)]


def _gadget_vertex_mask(kind, anchor, L=L_PATCH):
    ax, ay = anchor
    mask = np.zeros((L, L), dtype=bool)
    for cx, cy in _support_cells_scaled(kind):
        for dx in (0, 1):
            for dy in (0, 1):
                mask[(ax + cx + dx) % L, (ay + cy + dy) % L] = True
    return mask


def _gadget_link_mask(kind, anchor, L=L_PATCH):
    ax, ay = anchor
    mask = np.zeros((2, L, L), dtype=bool)
    for cx, cy in _support_cells_scaled(kind):
        x, y = (ax + cx) % L, (ay + cy) % L
        mask[HORIZONTAL, x, y] = True
        mask[HORIZONTAL, x, (y + 1) % L] = True
        mask[VERTICAL, x, y] = True
        mask[VERTICAL, (x + 1) % L, y] = True
    return mask


def _slots_in(rounds, link_sup, L=L_PATCH):
    """(round, kind, anchor) of every placed gadget whose qubit support lies
    fully inside the marked region."""
    slots = []
    for t, rnd in enumerate(rounds):
        for kind, dx, dy in sorted(rnd.placements):
            for ax in range(dx, L, rnd.period):
                for ay in range(dy, L, rnd.period):
                    if all(link_sup[o, (ax + lx) % L, (ay + ly) % L]
                           for o, lx, ly in support_links(kind)):
                        slots.append((t, kind, (ax, ay)))
    return slots


def _signed(d: int, L: int) -> int:
    return (d + L // 2) % L - L // 2


@dataclass
class GammaContext:
    """Circuits, slot tables, and support masks for the damage iteration.

    The idle and swap chains run on a 9x9 patch; the match gadget spans
    three frame cells along its orientation, so its chains run on a 27-wide
    patch to keep the gadget clear of its own periodic images.  Slots are
    deduplicated modulo the translation symmetry of the full circuit.
    """

    doubled: bool = False
    lead: tuple = field(init=False)
    patch: dict = field(init=False)
    gate_rounds: dict = field(init=False)
    anchors: dict = field(init=False)
    slots: dict = field(init=False)
    slots_bare: dict = field(init=False)
    supp_mask: dict = field(init=False)
    nonlinear: dict = field(init=False)

    def __post_init__(self):
        self.lead = ec_layer(1, self.doubled)
        pats = {
            "I": make_round(3, [("I", 0, 0)]),
            "Th": make_round(9, [("Th", 3, 3 * j) for j in range(3)]
                             + [("I", 6, 3 * j) for j in range(3)]),
            "Tv": make_round(9, [("Tv", 3 * j, 3) for j in range(3)]
                             + [("I", 3 * j, 6) for j in range(3)]),
            "Mh": make_round(9, [("Mh", 3, 3 * j) for j in range(3)]),
            "Mv": make_round(9, [("Mv", 3 * j, 3) for j in range(3)]),
        }
        self.patch = {"I": 9, "Th": 9, "Tv": 9, "Mh": 27, "Mv": 27}
        self.anchors = {k: (3, 3) for k in GADGET_KINDS}
        self.gate_rounds = {}
        self.slots, self.slots_bare, self.supp_mask = {}, {}, {}
        for kind in GADGET_KINDS:
            L = self.patch[kind]
            self.gate_rounds[kind] = expand_gate_pattern(pats[kind], 1, self.doubled)
            anchor = self.anchors[kind]
            self.supp_mask[kind] = _gadget_vertex_mask(kind, anchor, L)
            link_sup = _gadget_link_mask(kind, anchor, L)
            full = list(self.lead) + list(self.gate_rounds[kind])
            self.slots[kind] = _slots_in(full, link_sup, L)
            self.slots_bare[kind] = [
                (t + len(self.lead), k, a) for t, k, a in
                _slots_in(list(self.gate_rounds[kind]), link_sup, L)]
        # Nonlinear coarse vertices: the frame vertices where the match
        # gadgets read and act (ends of the anchored frame link, both rows);
        # every other frame vertex is linear.
        self.nonlinear = {k: () for k in GADGET_KINDS}
        self.nonlinear["Mh"] = ((3, 3), (6, 3), (3, 6), (6, 6))
        self.nonlinear["Mv"] = ((3, 3), (3, 6), (6, 3), (6, 6))

    def circuit(self, gate_kind):
        return list(self.lead) + list(self.gate_rounds[gate_kind]) + list(self.lead)


def initial_damage(kind: str) -> frozenset:
    """Syndrome patterns (signed offsets from the anchor) reachable by an
    arbitrary failure on the gadget's qubit support."""
    links = support_links(kind)
    pats = set()
    for sub in range(1 << len(links)):
        cfg = new_config(L_PATCH)
        for i, (o, dx, dy) in enumerate(links):
            if sub >> i & 1:
                cfg[o, dx % L_PATCH, dy % L_PATCH] ^= 1
        syn = syndromes_of(cfg)
        pat = frozenset((_signed(x, L_PATCH), _signed(y, L_PATCH))
                        for x, y in np.argwhere(syn))
        pats.add(pat)
    pats.discard(frozenset())
    return frozenset(pats)


def _chain_flips(pattern, anchor, L):
    syn = np.zeros((L, L), dtype=np.uint8)
    for dx, dy in pattern:
        syn[(anchor[0] + dx) % L, (anchor[1] + dy) % L] ^= 1
    return chain_with_syndrome(syn)


class CoarseGrainError(RuntimeError):
    pass


def gamma_batch(ctx: GammaContext, gate_kind: str, slot, patterns,
                sigma_pattern=(), include_lead=True) -> list[frozenset]:
    """Damage map for a batch of failure patterns at one slot.

    Runs [leading EC layer] + gate layer + trailing EC layer on the patch
    with each failure injected after the slot's round; in arbitrary-input
    mode the coarse syndrome ``sigma_pattern`` is installed first and a
    fault-free reference run is XORed off.  Outputs must be coarse-grained
    and confined to the gadget support; they are returned pushed one level
    down as signed offsets from the reduced anchor.
    """
    t_fault = slot[0]
    fault_anchor = slot[2]
    L = ctx.patch[gate_kind]
    ax, ay = ctx.anchors[gate_kind]
    rounds = (list(ctx.lead) if include_lead else []) \
        + list(ctx.gate_rounds[gate_kind]) + list(ctx.lead)
    if include_lead:
        t_inject = t_fault
    else:
        t_inject = t_fault - len(ctx.lead)
    B = len(patterns)
    state = new_config(L, (B,))
    if sigma_pattern:
        state ^= _chain_flips(sigma_pattern, (0, 0), L)
    flips = np.stack([_chain_flips(p, fault_anchor, L) for p in patterns])
    for t, rnd in enumerate(rounds):
        apply_round(state, rnd)
        if t == t_inject:
            state ^= flips
    syn = syndromes_of(state)
    if sigma_pattern:
        ref = new_config(L)
        ref ^= _chain_flips(sigma_pattern, (0, 0), L)
        for rnd in rounds:
            apply_round(ref, rnd)
        syn = syn ^ syndromes_of(ref)
    if np.any(syn & ~sigma_mask(L, 1)):
        raise CoarseGrainError(f"output not coarse-grained: {gate_kind} {slot}")
    if np.any(syn & ~ctx.supp_mask[gate_kind]):
        raise CoarseGrainError(f"damage escaped gadget support: {gate_kind} {slot}")
    out = []
    for b in range(B):
        out.append(frozenset(
            (_signed(x - ax, L) // 3, _signed(y - ay, L) // 3)
            for x, y in np.argwhere(syn[b])))
    return out


def gamma_clean(ctx, gate_kind, slot, pattern):
    """Single-pattern clean-input damage map (leading EC layer included)."""
    return gamma_batch(ctx, gate_kind, slot, [pattern], include_lead=True)[0]


def gamma_arb(ctx, gate_kind, slot, pattern, sigma_pattern):
    """Single-pattern arbitrary-input damage map: paired-run difference
    under a coarse input on the gadget's nonlinear frame vertices."""
    return gamma_batch(ctx, gate_kind, slot, [pattern], sigma_pattern,
                       include_lead=False)[0]


def _mirror_status(patterns):
    pats = set(patterns)
    missing = []
    for pat in patterns:
        for ref in (frozenset((-dx, dy) for dx, dy in pat),
                    frozenset((dx, -dy) for dx, dy in pat)):
            if ref not in pats:
                missing.append((sorted(pat), sorted(ref)))
    return (not missing, missing)


def nilpotence_report(chain_variant: str = "clean", j_max: int = 4,
                      doubled: bool = False, progress=None) -> dict:
    """Iterate the damage sets until empty, mixing chains per gadget kind.

    ``clean`` is the leading-EC variant (clean input guaranteed by
    linearity); ``arbitrary_input`` omits the leading EC layer and
    additionally quantifies over coarse inputs on nonlinear points, which
    only the match gadgets have.  Returns per-chain first-empty iteration,
    per-iteration pattern sets, and the mirror-symmetry status of the
    first-level sets.
    """
    if chain_variant not in ("clean", "arbitrary_input"):
        raise ValueError(chain_variant)
    ctx = GammaContext(doubled=doubled)
    damage = {k: initial_damage(k) for k in GADGET_KINDS}
    history = {k: [len(damage[k])] for k in GADGET_KINDS}
    patterns_at = {k: {0: damage[k]} for k in GADGET_KINDS}
    first_empty = {k: None for k in GADGET_KINDS}
    include_lead = chain_variant == "clean"
    slot_table = ctx.slots if include_lead else ctx.slots_bare

    for j in range(1, j_max + 1):
        new_damage = {}
        for gate_kind in GADGET_KINDS:
            sigmas = [()]
            if chain_variant == "arbitrary_input" and ctx.nonlinear[gate_kind]:
                pts = ctx.nonlinear[gate_kind]
                sigmas = [tuple(p for b, p in enumerate(pts) if sel >> b & 1)
                          for sel in range(1 << len(pts))]
                sigmas = [s for s in sigmas if len(s) % 2 == 0]
            out = set()
            for slot in slot_table[gate_kind]:
                src = sorted(damage[slot[1]], key=sorted)
                if not src:
                    continue
                for sig in sigmas:
                    for pat in gamma_batch(ctx, gate_kind, slot, src,
                                           sigma_pattern=sig,
                                           include_lead=include_lead):
                        if pat:
                            out.add(pat)
            new_damage[gate_kind] = frozenset(out)
            if progress:
                progress(f"j={j} chain={gate_kind}: {len(out)} patterns")
        damage = new_damage
        for k in GADGET_KINDS:
            history[k].append(len(damage[k]))
            patterns_at[k][j] = damage[k]
            if first_empty[k] is None and not damage[k]:
                first_empty[k] = j
        if all(not damage[k] for k in GADGET_KINDS):
            break

    mirror = {k: _mirror_status(patterns_at[k].get(1, frozenset()))
              for k in GADGET_KINDS}
    return {
        "variant": chain_variant,
        "history": history,
        "first_empty": first_empty,
        "patterns": patterns_at,
        "mirror_symmetry_j1": {k: mirror[k][0] for k in GADGET_KINDS},
        "mirror_exceptions_j1": {k: mirror[k][1] for k in GADGET_KINDS},
    }


# ---------------------------------------------------------------------------
# Recovery-gadget single-fault cleanup


def r0_single_fault_check(doubled: bool = True, L: int = 9,
                          batch: int = 4096) -> dict:
    """Every single link fault at every spacetime point of the recovery
    layer, on a syndrome-free input, followed by one noise-free recovery
    layer, must leave a syndrome-free state."""
    rounds = list(ec_layer(1, doubled))
    depth = len(rounds)
    cands = [(t, o, x, y) for t in range(depth) for o in (0, 1)
             for x in range(L) for y in range(L)]
    bad = []
    for start in range(0, len(cands), batch):
        chunk = cands[start:start + batch]
        state = new_config(L, (len(chunk),))
        by_t: dict[int, list] = {}
        for i, (t, o, x, y) in enumerate(chunk):
            by_t.setdefault(t, []).append((i, o, x, y))
        for t, rnd in enumerate(rounds):
            apply_round(state, rnd)
            for i, o, x, y in by_t.get(t, ()):
                state[i, o, x, y] ^= 1
        for rnd in rounds:
            apply_round(state, rnd)
        resid = syndromes_of(state).any(axis=(-2, -1))
        for i in np.flatnonzero(resid):
            bad.append(chunk[i])
    return {"doubled": doubled, "checked": len(cands), "failures": bad,
            "ok": not bad}


# ---------------------------------------------------------------------------
# 1D match-gadget reversibility table

# Published brute-force table: damage rows (F2-added to the encoded input)
# versus coarse inputs (abc) -> output of [majority layer o match gadget],
# all blockwise constant.  The irreversible outputs 010/101 never occur.
M1_TABLE_ROWS = [
    ("000000000", "000 001 000 011 100 111 110 111"),
    ("001000000", "000 001 000 011 100 111 110 111"),
    ("010000000", "000 001 000 011 100 111 110 111"),
    ("011000000", "100 111 110 111 000 001 000 011"),
    ("100000000", "000 001 000 011 100 111 110 111"),
    ("101000000", "100 111 110 111 000 001 000 011"),
    ("110000000", "100 111 110 111 000 001 000 011"),
    ("111000000", "100 111 110 111 000 001 000 011"),
    ("000001000", "000 001 000 011 100 111 110 111"),
    ("000010000", "000 001 000 011 100 111 110 111"),
    ("000011000", "000 011 000 001 110 111 100 111"),
    ("000100000", "000 001 000 011 100 111 110 111"),
    ("000101000", "000 011 000 001 110 111 100 111"),
    ("000110000", "000 011 000 001 110 111 100 111"),
    ("000111000", "000 011 000 001 110 111 100 111"),
]
M1_INPUTS = ["000", "001", "010", "011", "100", "101", "110", "111"]


def m1_reversibility_table() -> dict:
    """Recompute the reversibility table of the level-1 match gadget.

    For every listed damage pattern XORed onto every coarse input, runs the
    1D stabilizer M1 followed by a blockwise majority layer and reports the
    coarse output.  Asserts block-constant outputs, compares cell by cell
    with the published table, and flags the irreversible outputs 010/101.
    """
    m1 = tsirelson.build_tsirelson("Z", 1, "stabilizer")
    computed = {}
    mismatches = []
    irreversible = []
    for damage_str, row in M1_TABLE_ROWS:
        expect = row.split()
        dmg = np.array([int(c) for c in damage_str], dtype=np.uint8)
        for col, inp in enumerate(M1_INPUTS):
            bits = np.repeat([int(c) for c in inp], 3).astype(np.uint8) ^ dmg
            for rnd in m1.rounds:
                tsirelson.apply_round_1d(bits, rnd)
            for rnd in tsirelson._ec1_layer(9, "stabilizer"):
                tsirelson.apply_round_1d(bits, rnd)
            blocks = bits.reshape(3, 3)
            if not np.all(blocks == blocks[:, :1]):
                mismatches.append((damage_str, inp, "not block constant"))
                continue
            got = "".join(str(b) for b in blocks[:, 0])
            computed[(damage_str, inp)] = got
            if got in ("010", "101"):
                irreversible.append((damage_str, inp, got))
            if got != expect[col]:
                mismatches.append((damage_str, inp, got, expect[col]))
    return {"table": computed, "mismatches": mismatches,
            "irreversible": irreversible,
            "ok": not mismatches and not irreversible,
            "cells": len(M1_TABLE_ROWS) * len(M1_INPUTS)}


# ---------------------------------------------------------------------------
# Structural checks: confinement, linearity, coarse-graining


def _segment_mask(x0, y0, dx, dy, length, L=9):
    """Vertex mask of a frame segment of the given length (in links)."""
    m = np.zeros((L, L), dtype=bool)
    for i in range(length + 1):
        m[(x0 + i * dx) % L, (y0 + i * dy) % L] = True
    return m


def confinement_regions(which: str, L=9):
    """Per-layer confinement regions (vertex masks).

    For recovery and idle layers every individual frame link confines; for
    the swap and match layers the regions along the gadget orientation are
    unions of the frame links spanning each gadget's top and bottom edges
    (two links for swaps, three for matches), while the transverse gadget
    boundaries confine link by link.
    """
    if which in ("EC", "I"):
        return [_segment_mask(0, 0, 1, 0, 3, L), _segment_mask(0, 3, 1, 0, 3, L),
                _segment_mask(0, 0, 0, 1, 3, L), _segment_mask(3, 0, 0, 1, 3, L)]
    if which == "Th":
        # gadgets at x anchor 3 spanning cells x in [0, 6); idle cells beyond
        return [_segment_mask(0, 0, 0, 1, 3, L), _segment_mask(6, 0, 0, 1, 3, L),
                _segment_mask(0, 0, 1, 0, 6, L), _segment_mask(0, 3, 1, 0, 6, L),
                _segment_mask(6, 0, 1, 0, 3, L), _segment_mask(6, 3, 1, 0, 3, L)]
    if which == "Tv":
        return [_segment_mask(0, 0, 1, 0, 3, L), _segment_mask(0, 6, 1, 0, 3, L),
                _segment_mask(0, 0, 0, 1, 6, L), _segment_mask(3, 0, 0, 1, 6, L),
                _segment_mask(0, 6, 0, 1, 3, L), _segment_mask(3, 6, 0, 1, 3, L)]
    if which == "Mh":
        return [_segment_mask(0, 0, 0, 1, 3, L),
                _segment_mask(0, 0, 1, 0, 9, L), _segment_mask(0, 3, 1, 0, 9, L)]
    if which == "Mv":
        return [_segment_mask(0, 0, 1, 0, 3, L),
                _segment_mask(0, 0, 0, 1, 9, L), _segment_mask(3, 0, 0, 1, 9, L)]
    raise ValueError(which)


def layer_nonlinear_points(which: str, L=9):
    """Frame vertices where a tiling layer of the given kind can act
    nonlinearly (ends of the match gadgets' anchored frame links)."""
    if which == "Mh":
        return [(x, y) for x in (3, 6) for y in range(0, L, 3)]
    if which == "Mv":
        return [(x, y) for y in (3, 6) for x in range(0, L, 3)]
    return []


def _layer_rounds(which: str, doubled=False):
    ctx = GammaContext(doubled=doubled)
    if which == "EC":
        return list(ec_layer(1, doubled))
    return list(ctx.gate_rounds[which])


def confinement_check(which: str = "EC", trials: int = 64, seed: int = 0,
                      doubled: bool = False) -> dict:
    """Restriction equality on frame links: evolving with syndromes on a
    frame link zeroed each step must reproduce the true output everywhere
    off that link, for every single frame-link syndrome and random noise."""
    rounds = _layer_rounds(which, doubled)
    L = 9
    rng = np.random.default_rng(seed)
    failures = []
    cases = 0
    for lam in confinement_regions(which, L):
        verts = np.argwhere(lam)
        sigmas = [np.zeros((L, L), dtype=np.uint8)]
        for x, y in verts:
            s = np.zeros((L, L), dtype=np.uint8)
            s[x, y] = 1
            sigmas.append(s)
        for s0 in sigmas:
            for _ in range(trials // 8 + 1):
                toggles = {}
                for t in range(len(rounds)):
                    if rng.random() < 0.3:
                        tg = (rng.random((L, L)) < 0.02).astype(np.uint8)
                        if tg.any():
                            toggles[t] = tg
                full = run_rounds_syn(s0.copy(), rounds, toggles)
                restr = run_rounds_syn(s0.copy(), rounds, toggles, zero_mask=lam)
                cases += 1
                if np.any((full ^ restr) & ~lam):
                    failures.append((which, verts.tolist()))
    return {"layer": which, "cases": cases, "failures": failures,
            "ok": not failures}


def linearity_check(which: str = "Th", trials: int = 200, seed: int = 0,
                    doubled: bool = False) -> dict:
    """G[tau|lin + sigma, eps] == G[tau|lin] + G[sigma, eps] for coarse
    patterns tau on the linear frame vertices."""
    rounds = _layer_rounds(which, doubled)
    L = 9
    rng = np.random.default_rng(seed)
    lin = sigma_mask(L, 1).copy()
    for (x, y) in layer_nonlinear_points(which, L):
        lin[x, y] = False
    lin_pts = np.argwhere(lin)
    failures = []
    for _ in range(trials):
        pick = rng.random(len(lin_pts)) < 0.5
        if pick.sum() % 2:
            pick[np.flatnonzero(pick)[0]] = False
        tau = np.zeros((L, L), dtype=np.uint8)
        for x, y in lin_pts[pick]:
            tau[x, y] = 1
        sigma = (rng.random((L, L)) < 0.15).astype(np.uint8)
        if sigma.sum() % 2:
            sigma[tuple(np.argwhere(sigma)[0])] = 0
        toggles = {}
        for t in range(len(rounds)):
            if rng.random() < 0.25:
                tg = (rng.random((L, L)) < 0.02).astype(np.uint8)
                if tg.any():
                    toggles[t] = tg
        lhs = run_rounds_syn((tau ^ sigma).copy(), rounds, toggles)
        rhs = run_rounds_syn(tau.copy(), rounds) ^ run_rounds_syn(
            sigma.copy(), rounds, toggles)
        if not np.array_equal(lhs, rhs):
            failures.append(np.argwhere(tau).tolist())
    return {"layer": which, "trials": trials, "failures": failures,
            "ok": not failures}


def coarse_graining_check(random_inputs: int = 100_000, seed: int = 0,
                          exhaustive_pairs: bool = True,
                          batch: int = 8192) -> dict:
    """The noiseless half recovery layer coarse-grains every input: checked
    exhaustively over all inputs with at most two set links on L = 9 plus a
    random-input sweep."""
    rounds = list(ec_layer(1, False))  # undoubled = first half
    L = 9
    frame = sigma_mask(L, 1)
    bad = []
    if exhaustive_pairs:
        nlinks = 2 * L * L
        cands = [(i,) for i in range(nlinks)]
        cands += [(i, j) for i in range(nlinks) for j in range(i + 1, nlinks)]
        for start in range(0, len(cands), batch):
            chunk = cands[start:start + batch]
            state = new_config(L, (len(chunk),))
            flat = state.reshape(len(chunk), -1)
            for r, links in enumerate(chunk):
                for i in links:
                    flat[r, i] ^= 1
            for rnd in rounds:
                apply_round(state, rnd)
            resid = (syndromes_of(state) & ~frame).any(axis=(-2, -1))
            bad.extend(chunk[i] for i in np.flatnonzero(resid))
    rng = np.random.default_rng(seed)
    done = 0
    while done < random_inputs:
        b = min(batch, random_inputs - done)
        state = (rng.random((b, 2, L, L)) < 0.35).astype(np.uint8)
        start_states = state.copy()
        for rnd in rounds:
            apply_round(state, rnd)
        resid = (syndromes_of(state) & ~frame).any(axis=(-2, -1))
        for i in np.flatnonzero(resid):
            bad.append(("random", start_states[i]))
        done += b
    return {"checked_pairs": exhaustive_pairs, "random_inputs": random_inputs,
            "failures": bad, "ok": not bad}


def structural_checks(seed: int = 0, doubled: bool = False) -> dict:
    """Aggregate confinement, linearity, and coarse-graining report."""
    out = {"confinement": {}, "linearity": {}}
    for which in ("EC", "I", "Th", "Tv", "Mh", "Mv"):
        out["confinement"][which] = confinement_check(which, seed=seed,
                                                      doubled=doubled)
    for which in ("I", "Th", "Tv", "Mh", "Mv"):
        out["linearity"][which] = linearity_check(which, seed=seed,
                                                  doubled=doubled)
    out["coarse_graining"] = coarse_graining_check(random_inputs=20_000,
                                                   seed=seed)
    out["ok"] = (all(v["ok"] for v in out["confinement"].values())
                 and all(v["ok"] for v in out["linearity"].values())
                 and out["coarse_graining"]["ok"])
    return out
