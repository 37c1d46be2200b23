"""Torus geometry, F2 error/syndrome state, homology, and coarse-graining frames.

Conventions (fixed throughout the package):

* Vertices are ``(x, y)`` with ``0 <= x, y < L``, periodic in both directions.
* A horizontal link ``h(x, y)`` joins ``(x, y)`` to ``(x+1, y)``; a vertical
  link ``v(x, y)`` joins ``(x, y)`` to ``(x, y+1)``.
* An error configuration is a uint8 array of shape ``(..., 2, L, L)`` where
  index 0 of the orientation axis holds horizontal links and index 1 vertical
  links.  Leading axes are broadcast batch axes (used to run many Monte-Carlo
  trials or many fault candidates in lockstep).
* A syndrome configuration is a uint8 array of shape ``(..., L, L)``; entry
  ``(x, y)`` is 1 iff an odd number of the four links touching ``(x, y)`` are
  set.
* The level-k frame ``Sigma_k`` is the set of vertices with both coordinates
  divisible by ``3**k``.  ``frame_offset`` translates the whole frame for
  constructions anchored away from the origin (the default of 0 matches the
  cell hierarchy used by the schedule compiler).

Homology classes are measured against two fixed dual cuts: the parity of set
horizontal links with ``x == 0`` (winding around the x direction) and of set
vertical links with ``y == 0`` (winding around y).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HORIZONTAL, VERTICAL = 0, 1


@dataclass(frozen=True)
class TorusLattice:
    """An L x L torus with qubits on links and checks on vertices."""

    L: int

    def __post_init__(self):
        if self.L < 3:
            raise ValueError(f"torus side must be >= 3, got {self.L}")

    @property
    def n_links(self) -> int:
        return 2 * self.L * self.L

    @property
    def n_vertices(self) -> int:
        return self.L * self.L

    def empty_config(self, batch: tuple[int, ...] = ()) -> np.ndarray:
        return np.zeros(batch + (2, self.L, self.L), dtype=np.uint8)


def new_config(L: int, batch: tuple[int, ...] = ()) -> np.ndarray:
    return np.zeros(batch + (2, L, L), dtype=np.uint8)


def check_config(cfg: np.ndarray) -> int:
    """Validate config shape and return L."""
    if cfg.ndim < 3 or cfg.shape[-3] != 2 or cfg.shape[-2] != cfg.shape[-1]:
        raise ValueError(f"expected shape (..., 2, L, L), got {cfg.shape}")
    return cfg.shape[-1]


def syndromes_of(cfg: np.ndarray) -> np.ndarray:
    """Star-check values: vertex (x, y) sees h(x-1,y), h(x,y), v(x,y-1), v(x,y)."""
    check_config(cfg)
    h = cfg[..., HORIZONTAL, :, :]
    v = cfg[..., VERTICAL, :, :]
    return h ^ np.roll(h, 1, axis=-2) ^ v ^ np.roll(v, 1, axis=-1)


def homology_class(cfg: np.ndarray) -> tuple[int, int]:
    """Winding parities of a syndrome-free configuration across the fixed cuts.

    Raises ValueError when the configuration carries syndromes, since winding
    parity is only gauge invariant for closed chains.
    """
    check_config(cfg)
    if cfg.ndim != 3:
        raise ValueError("homology_class takes a single (2, L, L) config; "
                         "use homology_classes for batches")
    if syndromes_of(cfg).any():
        raise ValueError("configuration has nonempty syndrome")
    wind_x = int(cfg[HORIZONTAL, 0, :].sum() % 2)
    wind_y = int(cfg[VERTICAL, :, 0].sum() % 2)
    return (wind_x, wind_y)


def homology_classes(cfg: np.ndarray) -> np.ndarray:
    """Batched winding parities, shape (..., 2). No syndrome check."""
    check_config(cfg)
    wind_x = cfg[..., HORIZONTAL, 0, :].sum(axis=-1) % 2
    wind_y = cfg[..., VERTICAL, :, 0].sum(axis=-1) % 2
    return np.stack([wind_x, wind_y], axis=-1).astype(np.uint8)


def sigma_mask(L: int, k: int, offset: tuple[int, int] = (0, 0)) -> np.ndarray:
    """Boolean (L, L) mask of Sigma_k vertices."""
    step = 3 ** k
    if step > L:
        raise ValueError(f"3**{k} exceeds lattice side {L}")
    m = np.zeros((L, L), dtype=bool)
    m[offset[0] % step::step, offset[1] % step::step] = True
    return m


def is_coarse_grained(syn: np.ndarray, k: int, offset: tuple[int, int] = (0, 0)) -> bool:
    """True iff every set vertex lies in Sigma_k."""
    L = syn.shape[-1]
    mask = sigma_mask(L, k, offset)
    return not np.any(syn & ~mask)


def coarse_grained_batch(syn: np.ndarray, k: int) -> np.ndarray:
    """Per-batch-entry coarse-graining flags, shape (...,)."""
    L = syn.shape[-1]
    mask = sigma_mask(L, k)
    return ~np.any(syn & ~mask, axis=(-2, -1))


def pushforward_syndrome(syn: np.ndarray, k: int = 1) -> np.ndarray:
    """Reduce a level-k coarse-grained syndrome to the L/3**k lattice."""
    L = syn.shape[-1]
    step = 3 ** k
    if L % step:
        raise ValueError(f"{step} does not divide L={L}")
    if not np.all(coarse_grained_batch(syn, k)):
        raise ValueError("syndrome not coarse-grained at requested level")
    return syn[..., ::step, ::step].copy()


def pullback_chain(cfg_small: np.ndarray, factor: int = 3) -> np.ndarray:
    """Pull a chain back to the fine lattice: each link becomes `factor`
    collinear links along the corresponding coarse frame segment."""
    L = check_config(cfg_small)
    big = new_config(L * factor, cfg_small.shape[:-3])
    for i in range(factor):
        big[..., HORIZONTAL, i::factor, ::factor] = cfg_small[..., HORIZONTAL, :, :]
        big[..., VERTICAL, ::factor, i::factor] = cfg_small[..., VERTICAL, :, :]
    return big


def chain_with_syndrome(syn: np.ndarray) -> np.ndarray:
    """A deterministic chain whose boundary equals the given (even-parity)
    syndrome pattern.

    Each set vertex is joined to the origin by an L-shaped path (x run then
    y run); XOR of all paths has the requested boundary.  Parity of the
    pattern must be even, which holds for any boundary on a closed surface.
    """
    L = syn.shape[-1]
    if syn.ndim != 2:
        raise ValueError("chain_with_syndrome takes one (L, L) pattern")
    if int(syn.sum()) % 2:
        raise ValueError("syndrome pattern has odd parity")
    cfg = new_config(L)
    for x, y in np.argwhere(syn):
        cfg[HORIZONTAL, :x, 0] ^= 1
        cfg[VERTICAL, x, :y] ^= 1
    assert np.array_equal(syndromes_of(cfg), syn % 2)
    return cfg


def noncontractible_loop(L: int, direction: int) -> np.ndarray:
    """A closed loop winding once around the torus. direction 0: horizontal
    row of h links at y=0 (winding x); 1: column of v links at x=0."""
    cfg = new_config(L)
    if direction == 0:
        cfg[HORIZONTAL, :, 0] = 1
    else:
        cfg[VERTICAL, 0, :] = 1
    return cfg


def plaquette_boundary(L: int, x: int, y: int) -> np.ndarray:
    """The four links bounding the plaquette whose lower-left vertex is (x, y)."""
    cfg = new_config(L)
    cfg[HORIZONTAL, x % L, y % L] ^= 1
    cfg[HORIZONTAL, x % L, (y + 1) % L] ^= 1
    cfg[VERTICAL, x % L, y % L] ^= 1
    cfg[VERTICAL, (x + 1) % L, y % L] ^= 1
    return cfg


def pushforward_chain(cfg: np.ndarray, k: int = 1) -> np.ndarray:
    """Reduce a level-k coarse-grained chain to the L/3**k lattice.

    The reduced chain reproduces the scaled-down syndrome pattern, and its
    pullback differs from the input by a stabilizer element (a homologically
    trivial cycle), checked via the winding parities.
    """
    if cfg.ndim != 3:
        raise ValueError("pushforward_chain takes a single config")
    factor = 3 ** k
    syn = syndromes_of(cfg)
    small_syn = pushforward_syndrome(syn, k)
    small = chain_with_syndrome(small_syn)
    # fix the homology sector so pullback ^ cfg is a trivial cycle
    diff = pullback_chain(small, factor) ^ cfg
    wind_x, wind_y = homology_class(diff)
    Ls = small.shape[-1]
    if wind_x:
        small ^= noncontractible_loop(Ls, 0)
    if wind_y:
        small ^= noncontractible_loop(Ls, 1)
    diff = pullback_chain(small, factor) ^ cfg
    assert homology_class(diff) == (0, 0)
    return small
