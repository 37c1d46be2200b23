"""Schedule compiler for the hardwired toric-code automaton.

Builds the spacetime schedule of the full automaton from the two recursive
substitution schemes:

* the *inner* recursion, which rebuilds the recovery gadget ``EC_n`` and the
  gate gadgets at level ``n`` from level ``n-1`` pieces, inserting a layer of
  ``EC_(n-1)`` after each gate layer plus one leading layer (so EC layers
  appear doubled at gadget seams);
* the *outer* recursion (the usual fault-tolerant prescription when the
  inner level is ``k = 1``), which inserts exactly one EC layer between
  consecutive gate layers, with no doubling.

Schedules are stored as a prefix plus a repeating unit of :class:`Round`
patterns, so peak memory is independent of the simulated idle count ``T``.
All rounds are translation-periodic and identical sub-schedules are memoized.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .gadgets import (GATE_TEMPLATES, Round, ec_template, gate_footprint_cells,
                      make_round)


def _pattern_subrounds(pattern: Round, scale: int) -> list[Round]:
    """Split a pattern of gadgets one level up into its template rounds.

    ``scale`` converts template offsets to level-0 units (3**(n-1) for a
    level-n pattern).  Templates of unequal depth are padded at the end with
    idle rounds covering the shorter gadget's footprint.
    """
    kinds = {k for k, _, _ in pattern.placements}
    depth = max(len(GATE_TEMPLATES[k]) for k in kinds)
    subs: list[list] = [[] for _ in range(depth)]
    for kind, ax, ay in sorted(pattern.placements):
        rounds = GATE_TEMPLATES[kind]
        for j in range(depth):
            if j < len(rounds):
                subs[j].extend((k0, ax + dx * scale, ay + dy * scale)
                               for k0, dx, dy in rounds[j])
            else:
                subs[j].extend(("I", ax + cx * scale, ay + cy * scale)
                               for cx, cy in gate_footprint_cells(kind))
    return [make_round(pattern.period, s) for s in subs]


@lru_cache(maxsize=None)
def expand_gate_pattern(pattern: Round, n: int, doubled: bool) -> tuple[Round, ...]:
    """Level-0 rounds of a tiled pattern of level-n gate gadgets, expanded
    with the inner recursion (EC layers inserted below level n)."""
    if n == 0:
        return (pattern,)
    out: list[Round] = list(ec_layer(n - 1, doubled)) if n >= 2 else []
    for sub in _pattern_subrounds(pattern, 3 ** (n - 1)):
        out.extend(expand_gate_pattern(sub, n - 1, doubled))
        if n >= 2:
            out.extend(ec_layer(n - 1, doubled))
    return tuple(out)


@lru_cache(maxsize=None)
def ec_layer(m: int, doubled: bool) -> tuple[Round, ...]:
    """Level-0 rounds of a lattice-tiling layer of EC_m gadgets (m >= 1)."""
    if m < 1:
        raise ValueError("EC level must be >= 1")
    period, scale = 3 ** m, 3 ** (m - 1)
    subs = [make_round(period, [(k, dx * scale, dy * scale) for k, dx, dy in rnd])
            for rnd in ec_template(doubled)]
    if m == 1:
        return tuple(subs)
    out: list[Round] = list(ec_layer(m - 1, doubled))
    for sub in subs:
        out.extend(expand_gate_pattern(sub, m - 1, doubled))
        out.extend(ec_layer(m - 1, doubled))
    return tuple(out)


def inner_ec(n: int, doubled: bool = False) -> "Schedule":
    """Schedule of one lattice-tiling EC_n layer on the L = 3**n torus."""
    if n < 1:
        raise ValueError("inner_ec requires n >= 1")
    return Schedule(L=3 ** n, prefix=ec_layer(n, doubled), unit=(), T=0)


def inner_gate(kind: str, n: int, doubled: bool = False) -> "Schedule":
    """Schedule of one dense lattice-tiling layer of level-n ``kind`` gates
    (a gate anchored at every level-n frame vertex / frame cell)."""
    if kind not in GATE_TEMPLATES:
        raise ValueError(f"unknown gate kind {kind!r}")
    if n < 1:
        raise ValueError("inner_gate requires n >= 1")
    period = 3 ** n
    pattern = make_round(period, [(kind, 0, 0)])
    rounds = expand_gate_pattern(pattern, n, doubled)
    return Schedule(L=period, prefix=rounds, unit=(), T=0)


@dataclass(frozen=True)
class SimParams:
    k: int = 1
    n: int = 1
    T: int = 1

    def __post_init__(self):
        if self.k < 1 or self.n < 1 or self.T < 0:
            raise ValueError("need k >= 1, n >= 1, T >= 0")

    @property
    def L(self) -> int:
        return 3 ** (self.n * self.k)


class Schedule:
    """Lazy layer sequence: ``prefix`` followed by ``unit`` repeated ``T``
    times; ``layer(t, periodic=True)`` extends past the end cyclically."""

    def __init__(self, L: int, prefix: tuple[Round, ...],
                 unit: tuple[Round, ...], T: int):
        self.L = L
        self.prefix = tuple(prefix)
        self.unit = tuple(unit)
        self.T = T
        for rnd in set(self.prefix) | set(self.unit):
            if L % rnd.period:
                raise ValueError(f"round period {rnd.period} incompatible with L={L}")

    @property
    def depth(self) -> int:
        return len(self.prefix) + self.T * len(self.unit)

    def layer(self, t: int, periodic: bool = False) -> Round:
        if t < 0:
            raise IndexError(t)
        if t < len(self.prefix):
            return self.prefix[t]
        t -= len(self.prefix)
        if not self.unit:
            raise IndexError("schedule exhausted")
        if not periodic and t >= self.T * len(self.unit):
            raise IndexError("schedule exhausted")
        return self.unit[t % len(self.unit)]

    def layers(self, t_stop: int | None = None, periodic: bool = False):
        t, stop = 0, self.depth if t_stop is None else t_stop
        while t < stop:
            yield self.layer(t, periodic=periodic)
            t += 1

    def rounds_list(self) -> list[Round]:
        return list(self.layers())


@lru_cache(maxsize=None)
def _expand_outer_round(rnd: Round, k: int, doubled: bool) -> tuple[Round, ...]:
    """Replace every gadget of one circuit round by its level-k inner gadget
    (anchor coordinates scale by 3**k)."""
    scale = 3 ** k
    lifted = make_round(rnd.period * scale,
                        [(kind, dx * scale, dy * scale)
                         for kind, dx, dy in rnd.placements])
    return expand_gate_pattern(lifted, k, doubled)


def _outer_once(rounds: tuple[Round, ...], k: int, doubled: bool) -> tuple[Round, ...]:
    out: list[Round] = list(ec_layer(k, doubled))
    for rnd in rounds:
        out.extend(_expand_outer_round(rnd, k, doubled))
        out.extend(ec_layer(k, doubled))
    return tuple(out)


@lru_cache(maxsize=None)
def _outer_blocks(k: int, n: int, doubled: bool):
    """(prefix, unit) rounds of FT~^n(I0^T): prefix, then unit once per
    simulated idle step."""
    prefix: tuple[Round, ...] = ()
    unit: tuple[Round, ...] = (make_round(1, [("I", 0, 0)]),)
    for _ in range(n):
        new_prefix: list[Round] = list(ec_layer(k, doubled))
        for rnd in prefix:
            new_prefix.extend(_expand_outer_round(rnd, k, doubled))
            new_prefix.extend(ec_layer(k, doubled))
        new_unit: list[Round] = []
        for rnd in unit:
            new_unit.extend(_expand_outer_round(rnd, k, doubled))
            new_unit.extend(ec_layer(k, doubled))
        prefix, unit = tuple(new_prefix), tuple(new_unit)
    return prefix, unit


def outer_ft(params: SimParams, doubled: bool = False) -> Schedule:
    """Full automaton schedule FT~^n(I0^T) on the 3**(n k) torus."""
    prefix, unit = _outer_blocks(params.k, params.n, doubled)
    return Schedule(L=params.L, prefix=prefix, unit=unit, T=params.T)


def ft_ec_rounds(s: int, doubled: bool = False) -> tuple[Round, ...]:
    """Rounds of FT^(s-1)(EC) on the L = 3**s torus: the recovery unit that
    serves as the clock tick of the relaxation-time experiments."""
    if s < 1:
        raise ValueError("s >= 1")
    rounds: tuple[Round, ...] = ec_layer(1, doubled)
    for _ in range(s - 1):
        rounds = _outer_once(rounds, 1, doubled)
    return rounds


def depth(sched: Schedule) -> int:
    return sched.depth


def dump_schedule(sched: Schedule, t0: int = 0, t1: int | None = None) -> str:
    """Textual per-layer gadget listing, row-major by anchor (debug aid)."""
    t1 = sched.depth if t1 is None else t1
    lines = []
    for t in range(t0, t1):
        rnd = sched.layer(t)
        L = sched.L
        entries = []
        for kind, dx, dy in sorted(rnd.placements):
            for i in range(0, L, rnd.period):
                for j in range(0, L, rnd.period):
                    entries.append(((dx + i) % L, (dy + j) % L, kind))
        entries.sort()
        body = " ".join(f"{k}@({x},{y})" for x, y, k in entries)
        lines.append(f"t={t} {body}")
    return "\n".join(lines)
