"""Noisy execution of schedules, ideal decoding, and the memory experiments.

Noise models (all i.i.d. special cases of locally bounded noise):

* ``iid_qubit(p)``       -- each link flips with probability p after each step;
* ``iid_measurement(p)`` -- each check readout flips with probability p before
  feedback is computed (every gadget reading that vertex that step sees the
  flipped value);
* ``iid_gadget(p)``      -- each placed gadget fails with probability p; a
  failed gadget XORs a uniformly random pattern onto its qubit support at the
  end of the step (the identity pattern is allowed);
* ``skip_measurement(p)``-- each placed gadget independently skips its
  measurement-and-feedback action for the step with probability p;
* ``composite([...])``   -- several of the above applied together.

Batched states of shape ``(B, 2, L, L)`` run many trials in lockstep; every
sampler draws from a generator derived deterministically from the master
seed, so runs are reproducible bit for bit.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import compiler
from .gadgets import Round, apply_round, support_links
from .lattice import homology_classes, new_config, syndromes_of

NOISE_KINDS = ("iid_qubit", "iid_measurement", "iid_gadget", "skip_measurement")


@dataclass(frozen=True)
class NoiseModel:
    kind: str
    p: float = 0.0
    parts: tuple["NoiseModel", ...] = ()

    def __post_init__(self):
        if self.kind == "composite":
            return
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p out of range: {self.p}")

    def flat(self) -> tuple["NoiseModel", ...]:
        return self.parts if self.kind == "composite" else (self,)


def composite(*parts: NoiseModel) -> NoiseModel:
    return NoiseModel("composite", 0.0, tuple(parts))


@dataclass
class FaultRecord:
    t: int
    kind: str
    location: tuple
    pattern: tuple = ()


class DecodeFailure(RuntimeError):
    """Residual syndromes after a noise-free recovery pass (library defect)."""


def _gadget_flip_sample(rng, rnd: Round, batch_shape, L, p, log, t):
    """Uniform random support patterns on failed gadgets, XOR-accumulated."""
    flips = np.zeros(batch_shape + (2, L, L), dtype=np.uint8)
    masks = rnd.masks(L)
    for kind, mask in masks.items():
        fails = (rng.random(batch_shape + (L, L)) < p) & mask
        if not fails.any():
            continue
        for (o, dx, dy) in support_links(kind):
            bit = (rng.random(batch_shape + (L, L)) < 0.5) & fails
            if bit.any():
                flips[..., o, :, :] ^= np.roll(bit, (dx, dy), axis=(-2, -1)).astype(np.uint8)
        if log is not None:
            for x, y in np.argwhere(fails.reshape((L, L)) if batch_shape == () else fails[0]):
                log.append(FaultRecord(t, f"gadget:{kind}", (int(x), int(y))))
    return flips


def sample_step_noise(rng, rnd: Round, batch_shape, L, noise: NoiseModel,
                      log=None, t: int = 0):
    """Draw (meas_flip, link_flip, suppress) for one step; None when absent."""
    meas = None
    link = None
    suppress = None
    for part in noise.flat():
        if part.p == 0.0:
            continue
        if part.kind == "iid_qubit":
            f = (rng.random(batch_shape + (2, L, L)) < part.p).astype(np.uint8)
            link = f if link is None else link ^ f
            if log is not None:
                for o, x, y in np.argwhere(f if batch_shape == () else f[0]):
                    log.append(FaultRecord(t, "qubit", (int(o), int(x), int(y))))
        elif part.kind == "iid_measurement":
            f = (rng.random(batch_shape + (L, L)) < part.p).astype(np.uint8)
            meas = f if meas is None else meas ^ f
            if log is not None:
                for x, y in np.argwhere(f if batch_shape == () else f[0]):
                    log.append(FaultRecord(t, "meas", (int(x), int(y))))
        elif part.kind == "iid_gadget":
            f = _gadget_flip_sample(rng, rnd, batch_shape, L, part.p, log, t)
            link = f if link is None else link ^ f
        elif part.kind == "skip_measurement":
            suppress = suppress or {}
            for kind, mask in rnd.masks(L).items():
                if kind == "I":
                    continue
                sk = (rng.random(batch_shape + (L, L)) < part.p) & mask
                suppress[kind] = sk if kind not in suppress else suppress[kind] | sk
                if log is not None:
                    for x, y in np.argwhere(sk if batch_shape == () else sk[0]):
                        log.append(FaultRecord(t, f"skip:{kind}", (int(x), int(y))))
    return meas, link, suppress


def run_rounds(state: np.ndarray, rounds, noise: NoiseModel | None, rng=None,
               log=None, t0: int = 0) -> np.ndarray:
    """Apply a round sequence in place, sampling noise per step."""
    L = state.shape[-1]
    batch_shape = state.shape[:-3]
    for i, rnd in enumerate(rounds):
        if noise is None:
            apply_round(state, rnd)
        else:
            meas, link, sup = sample_step_noise(rng, rnd, batch_shape, L, noise,
                                                log=log, t=t0 + i)
            apply_round(state, rnd, meas_flip=meas, link_flip=link, suppress=sup)
    return state


def run_schedule(sched: compiler.Schedule, noise: NoiseModel | None = None,
                 seed: int | None = 0, t_stop: int | None = None,
                 state: np.ndarray | None = None, keep_log: bool = False,
                 periodic: bool = False):
    """Execute a schedule from an (optionally given) initial configuration.

    Returns ``(state, log)``; the log is a list of FaultRecord when
    ``keep_log`` and the run is unbatched, else a summary dict.
    """
    L = sched.L
    if state is None:
        state = new_config(L)
    rng = np.random.default_rng(seed) if noise is not None else None
    log: list | None = [] if keep_log else None
    t_stop = sched.depth if t_stop is None else t_stop
    run_rounds(state, sched.layers(t_stop, periodic=periodic), noise, rng, log=log)
    return state, (log if keep_log else {"steps": t_stop})


def ideal_decode(state: np.ndarray, s: int, doubled: bool = False) -> np.ndarray:
    """Noise-free recovery pass followed by homology readout.

    Applies FT^(s-1)(EC) without noise to a copy of the state; the result
    must be syndrome free (anything else raises :class:`DecodeFailure`), and
    the winding parities relative to the all-zero start are returned, shape
    ``(..., 2)``.
    """
    work = state.copy()
    run_rounds(work, compiler.ft_ec_rounds(s, doubled), None)
    if syndromes_of(work).any():
        raise DecodeFailure("syndromes left after noise-free recovery pass")
    return homology_classes(work)


@dataclass
class TrelResult:
    s: int
    noise: NoiseModel
    trials: int
    t_max: int
    t_fail: np.ndarray = field(repr=False)
    """Per-trial first failure time (t_max where censored)."""

    @property
    def censored_fraction(self) -> float:
        return float(np.mean(self.t_fail >= self.t_max))

    @property
    def mean(self) -> float:
        return float(self.t_fail.mean())

    @property
    def se(self) -> float:
        n = len(self.t_fail)
        return float(self.t_fail.std(ddof=1) / np.sqrt(n)) if n > 1 else float("inf")


def estimate_trel(s: int, noise: NoiseModel, trials: int, t_max: int,
                  seed: int = 0, doubled: bool = False,
                  batch: int = 1024) -> TrelResult:
    """Relaxation time in units of FT^(s-1)(EC) applications.

    Starts from the clean code state, applies the noisy recovery unit
    repeatedly, and after every application checks the ideal decode; the
    first application after which decoding leaves the initial homology
    sector marks the failure time.
    """
    L = 3 ** s
    unit = compiler.ft_ec_rounds(s, doubled)
    t_fail = np.empty(trials, dtype=np.int64)
    done = 0
    chunk = 0
    while done < trials:
        b = min(batch, trials - done)
        rng = np.random.default_rng(np.random.SeedSequence((seed, 0x7E1, s, chunk)))
        state = new_config(L, (b,))
        fail = np.full(b, t_max, dtype=np.int64)
        alive = np.ones(b, dtype=bool)
        for t in range(1, t_max + 1):
            run_rounds(state, unit, noise, rng)
            work = state.copy()
            run_rounds(work, unit, None)
            resid = syndromes_of(work).any(axis=(-2, -1))
            if resid.any():
                raise DecodeFailure(f"decode left syndromes in {int(resid.sum())} trials")
            cls = homology_classes(work)
            failed = (cls.sum(axis=-1) > 0) & alive
            fail[failed] = t
            alive &= ~failed
            if not alive.any():
                break
        t_fail[done:done + b] = fail
        done += b
        chunk += 1
    return TrelResult(s, noise, trials, t_max, t_fail)


# ---------------------------------------------------------------------------
# Minimal-weight failure search


def _failure_targets(L: int, s: int) -> dict[bytes, tuple[str, int]]:
    """Map from output-syndrome bytes to (failure type, orientation).

    Link failures put two syndromes at the endpoints of one s-link; corner
    failures put them at diagonally opposite corners of an s-cell.
    """
    step = 3 ** s
    targets: dict[bytes, tuple[str, int]] = {}
    for a in range(0, L, step):
        for b in range(0, L, step):
            for typ, o, (dx, dy) in (("link", 0, (step, 0)), ("link", 1, (0, step)),
                                     ("corner", 0, (step, step)),
                                     ("corner", 1, (-step, step))):
                syn = np.zeros((L, L), dtype=np.uint8)
                syn[a, b] ^= 1
                syn[(a + dx) % L, (b + dy) % L] ^= 1
                targets[syn.tobytes()] = (typ, o)
    return targets


def _eval_candidates(unit, L, candidates, batch=2048):
    """Run [noisy unit, clean unit] for each candidate fault set.

    Each candidate is a list of events ``(t, kind, payload)`` with kind in
    {"flip": payload (o, x, y); "meas": payload (x, y); "pattern": payload
    list of (o, x, y)}.  Yields (candidate index, output syndrome bytes).
    """
    depth1 = len(unit)
    for start in range(0, len(candidates), batch):
        chunk = candidates[start:start + batch]
        B = len(chunk)
        state = new_config(L, (B,))
        by_time: dict[int, list] = {}
        for i, cand in enumerate(chunk):
            for (t, kind, payload) in cand:
                by_time.setdefault(t, []).append((i, kind, payload))
        for t in range(depth1):
            meas = None
            events = by_time.get(t, ())
            for i, kind, payload in events:
                if kind == "meas":
                    if meas is None:
                        meas = np.zeros((B, L, L), dtype=np.uint8)
                    meas[i, payload[0], payload[1]] ^= 1
            apply_round(state, unit[t], meas_flip=meas)
            for i, kind, payload in events:
                if kind == "flip":
                    o, x, y = payload
                    state[i, o, x, y] ^= 1
                elif kind == "pattern":
                    for o, x, y in payload:
                        state[i, o, x, y] ^= 1
        run_rounds(state, unit, None)
        syn = syndromes_of(state)
        for i in range(B):
            yield start + i, syn[i].tobytes()


def _qubit_singles(L, depth, window):
    xs, ys = window
    return [[(t, "flip", (o, x, y))]
            for t in range(depth) for o in (0, 1) for x in xs for y in ys]


def _meas_singles(L, depth, window):
    xs, ys = window
    return [[(t, "meas", (x, y))] for t in range(depth) for x in xs for y in ys]


def _gadget_singles(unit, L, window):
    xs, ys = set(window[0]), set(window[1])
    out = []
    for t, rnd in enumerate(unit):
        for kind, dx, dy in sorted(rnd.placements):
            for ax in range(dx, L, rnd.period):
                for ay in range(dy, L, rnd.period):
                    if ax not in xs or ay not in ys:
                        continue
                    links = [( o, (ax + lx) % L, (ay + ly) % L)
                             for o, lx, ly in support_links(kind)]
                    for pat in range(1, 2 ** len(links)):
                        pattern = [links[i] for i in range(len(links)) if pat >> i & 1]
                        out.append([(t, "pattern", pattern)])
    return out


def min_weight_search(s: int, model: str, mode: str = "exhaustive",
                      doubled: bool = False, max_weight: int = 2,
                      s1_witnesses: dict | None = None) -> dict:
    """Smallest fault count (per the model's weight) failing an s-link or
    s-corner, with the trajectory confined to the first of two recovery
    layers.

    Exhaustive mode (s = 1): all weight-1 faults lattice-wide, then all
    weight-2 combinations inside the spacetime support of one recovery
    gadget.  For s = 2 the search is targeted: the level-1 witnesses are
    re-injected inside the final EC_1 block of the first FT(EC), which
    realizes the recursive upper bound; results are flagged as upper bounds.
    """
    if model not in ("qubit", "measurement", "gadget"):
        raise ValueError(f"unknown model {model!r}")
    # run on the lattice one level up so level-s failures are visible
    L = 3 ** (s + 1)
    unit = list(compiler.ft_ec_rounds(s, doubled))
    targets = _failure_targets(L, s)
    found: dict[tuple[str, int], tuple[int, list]] = {}

    def scan(cands, weight):
        weights = [weight] * len(cands) if isinstance(weight, int) else weight
        for idx, key in _eval_candidates(unit, L, cands):
            hit = targets.get(key)
            if hit is not None and (hit not in found or found[hit][0] > weights[idx]):
                found[hit] = (weights[idx], cands[idx])

    if s == 1 and mode == "exhaustive":
        full = (range(L), range(L))
        win = (range(5), range(5))
        if model == "qubit":
            singles = _qubit_singles(L, len(unit), full)
            scan(singles, 1)
            if len(found) < 4 and max_weight >= 2:
                sites = [(t, o, x, y) for t in range(len(unit))
                         for o in (0, 1) for x in win[0] for y in win[1]]
                pairs = [[(t1, "flip", (o1, x1, y1)), (t2, "flip", (o2, x2, y2))]
                         for i, (t1, o1, x1, y1) in enumerate(sites)
                         for (t2, o2, x2, y2) in sites[i + 1:]]
                scan(pairs, 2)
        elif model == "measurement":
            scan(_meas_singles(L, len(unit), full), 1)
            if len(found) < 4 and max_weight >= 2:
                sites = [(t, x, y) for t in range(len(unit))
                         for x in win[0] for y in win[1]]
                pairs = [[(t1, "meas", (x1, y1)), (t2, "meas", (x2, y2))]
                         for i, (t1, x1, y1) in enumerate(sites)
                         for (t2, x2, y2) in sites[i + 1:]]
                scan(pairs, 2)
        else:
            scan(_gadget_singles(unit, L, full), 1)
        exhaustive = True
    elif s == 2:
        if not s1_witnesses:
            raise ValueError("s=2 targeted search needs the s=1 witnesses")
        block0 = len(unit) - len(compiler.ec_layer(1, doubled))
        cands, weights = [], []
        for wit in s1_witnesses.values():
            w, events = wit["weight"], wit["events"]
            t_lo = min(t for t, _, _ in events)
            span = max(t for t, _, _ in events) - t_lo
            for cx in range(0, 9, 3):
                for cy in range(0, 9, 3):
                    for tau in range(block0, len(unit) - span):
                        shifted = []
                        for (t, kind, payload) in events:
                            tt = tau + (t - t_lo)
                            if kind == "flip":
                                o, x, y = payload
                                shifted.append((tt, kind, (o, (x + cx) % L, (y + cy) % L)))
                            elif kind == "meas":
                                x, y = payload
                                shifted.append((tt, kind, ((x + cx) % L, (y + cy) % L)))
                            else:
                                shifted.append((tt, kind,
                                                [(o, (x + cx) % L, (y + cy) % L)
                                                 for o, x, y in payload]))
                        cands.append(shifted)
                        weights.append(w)
        scan(cands, weights)
        exhaustive = False
    else:
        raise ValueError("exhaustive search supported at s=1; targeted at s=2")

    def agg(typ):
        ws = [found[(typ, o)][0] for o in (0, 1) if (typ, o) in found]
        return max(ws) if len(ws) == 2 else None

    return {
        "model": model,
        "s": s,
        "w_link": agg("link"),
        "w_c": agg("corner"),
        "witnesses": {f"{typ}_{o}": {"weight": w, "events": ev}
                      for (typ, o), (w, ev) in sorted(found.items())},
        "exhaustive": exhaustive,
    }
