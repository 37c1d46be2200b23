"""Time-translation-invariant 3D layering of the 2D automaton.

A stack holds ``2 * Delta`` toric-code layers on a periodic z axis, where
``Delta`` is the depth of one period of the 2D schedule.  Even layers
``z = 2t`` carry the 2D rule of timestep ``t``; odd layers idle.  The stack
steps with period 4: gadgets, even swaps (z pairs ``(2j, 2j+1)``), gadgets,
odd swaps (``(2j+1, 2j+2)``).  Every layer's content therefore travels
through the stack, experiencing the full 2D schedule interleaved with idle
steps; even starting heights traverse the schedule forward, odd ones
backward (half the codes move each way around the z circle).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import compiler, simulator
from .gadgets import apply_round, make_round
from .lattice import new_config

IDLE_ROUND_CACHE: dict[int, object] = {}


def _idle_round(L):
    if L not in IDLE_ROUND_CACHE:
        IDLE_ROUND_CACHE[L] = make_round(1, [("I", 0, 0)])
    return IDLE_ROUND_CACHE[L]


@dataclass
class Stack:
    """2*Delta toric-code layers with the per-layer rule table."""

    params: compiler.SimParams
    doubled: bool = False
    layers: np.ndarray = field(init=False, repr=False)
    schedule: compiler.Schedule = field(init=False, repr=False)
    t: int = 0

    def __post_init__(self):
        self.schedule = compiler.outer_ft(self.params, self.doubled)
        L = self.schedule.L
        self.layers = new_config(L, (2 * self.delta,))

    @property
    def delta(self) -> int:
        return self.schedule.depth

    @property
    def height(self) -> int:
        return 2 * self.delta

    def rule(self, z: int):
        """The 2D round applied in layer z during gadget phases."""
        if z % 2:
            return _idle_round(self.schedule.L)
        return self.schedule.layer((z // 2) % self.delta)

    @property
    def phase(self) -> str:
        return ("gadgets", "swap_even", "gadgets", "swap_odd")[self.t % 4]


def build_stack(params: compiler.SimParams, doubled: bool = False) -> Stack:
    return Stack(params=params, doubled=doubled)


def step_stack(stack: Stack, noise: simulator.NoiseModel | None = None,
               rng=None) -> Stack:
    """Advance one time step (period-4 rule; see module docstring).

    Gadget phases apply each layer's assigned 2D round with per-layer noise;
    swap phases exchange layer contents pairwise, and a failed swap gadget
    XORs random flips onto the swapped qubit in both layers.
    """
    H, L = stack.height, stack.schedule.L
    phase = stack.phase
    if phase == "gadgets":
        for z in range(H):
            rnd = stack.rule(z)
            if noise is None:
                apply_round(stack.layers[z], rnd)
            else:
                meas, link, sup = simulator.sample_step_noise(
                    rng, rnd, (), L, noise, t=stack.t)
                apply_round(stack.layers[z], rnd, meas_flip=meas,
                            link_flip=link, suppress=sup)
    else:
        lo = 0 if phase == "swap_even" else 1
        for z in range(lo, H + lo, 2):
            a, b = z % H, (z + 1) % H
            tmp = stack.layers[a].copy()
            stack.layers[a] = stack.layers[b]
            stack.layers[b] = tmp
            if noise is not None:
                for part in noise.flat():
                    if part.kind == "iid_gadget" and part.p > 0:
                        fails = rng.random((2, L, L)) < part.p
                        if fails.any():
                            fa = (rng.random((2, L, L)) < 0.5) & fails
                            fb = (rng.random((2, L, L)) < 0.5) & fails
                            stack.layers[a] ^= fa.astype(np.uint8)
                            stack.layers[b] ^= fb.astype(np.uint8)
                    elif part.kind == "iid_qubit" and part.p > 0:
                        for lay in (a, b):
                            f = (rng.random((2, L, L)) < part.p).astype(np.uint8)
                            stack.layers[lay] ^= f
    stack.t += 1
    return stack


def run_stack(stack: Stack, steps: int, noise=None, seed: int = 0,
              frames: dict[int, list] | None = None) -> Stack:
    """Step the stack, optionally recording moving-frame trajectories.

    ``frames`` maps a starting height z0 to a list that receives the frame's
    content after every gadget phase it experiences.
    """
    rng = np.random.default_rng(seed) if noise is not None else None
    positions = {z0: z0 for z0 in (frames or {})}
    for _ in range(steps):
        phase = stack.phase
        step_stack(stack, noise, rng)
        if frames is not None:
            if phase == "gadgets":
                for z0, z in positions.items():
                    frames[z0].append(stack.layers[z].copy())
            else:
                lo = 0 if phase == "swap_even" else 1
                for z0, z in positions.items():
                    positions[z0] = _swapped_position(z, lo, stack.height)
    return stack


def _swapped_position(z: int, lo: int, H: int) -> int:
    if (z - lo) % 2 == 0:
        return (z + 1) % H
    return (z - 1) % H


def moving_frame(params: compiler.SimParams, z0: int, cycles: int = 1,
                 doubled: bool = False) -> list[np.ndarray]:
    """Noiseless moving-frame trajectory of the layer starting at height z0:
    its content after each gadget phase over the given number of full stack
    revolutions."""
    stack = build_stack(params, doubled)
    frames = {z0: []}
    run_stack(stack, steps=4 * stack.delta * cycles, frames=frames)
    return frames[z0]


def frame_rule_sequence(stack: Stack, z0: int, steps: int) -> list[int]:
    """The 2D schedule timesteps (or -1 for idles) that the frame starting
    at z0 experiences over the run; reference for the equivalence check."""
    seq = []
    z = z0
    for t in range(steps):
        phase = ("gadgets", "swap_even", "gadgets", "swap_odd")[t % 4]
        if phase == "gadgets":
            seq.append((z // 2) % stack.delta if z % 2 == 0 else -1)
        else:
            z = _swapped_position(z, 0 if phase == "swap_even" else 1,
                                  stack.height)
    return seq
