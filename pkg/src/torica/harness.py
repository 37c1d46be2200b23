"""Command-line harness: experiment configs, deterministic seeding, sweep
orchestration, and CSV/JSON result emission.

Config files are plain ``key = value`` lines (``#`` comments); every key can
be overridden by a ``--key value`` flag.  Result rows carry the master seed
and a hash of the resolved config, so any row can be regenerated bit for bit.
Exit codes: 0 success, 1 verification failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
import zlib
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import compiler, simulator, stack3d, tsirelson, verifier

SCHEMA_VERSION = 1


def seed_derivation(master_seed: int, trial_index: int, stream_tag: str):
    """Collision-free derived seed stream, stable across worker counts."""
    return np.random.SeedSequence(
        (int(master_seed), zlib.crc32(stream_tag.encode()), int(trial_index)))


def config_hash(cfg: dict) -> str:
    blob = json.dumps({k: cfg[k] for k in sorted(cfg)}, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def parse_config_file(path: str) -> dict:
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"bad config line: {line!r}")
            key, val = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = val
    return out


def _coerce(value: str, like):
    if isinstance(like, bool):
        return value.lower() in ("1", "true", "yes")
    if isinstance(like, int):
        return int(value)
    if isinstance(like, float):
        return float(value)
    if isinstance(like, list):
        return [float(x) for x in value.replace(",", " ").split()]
    return value


def resolve_config(defaults: dict, args) -> dict:
    cfg = dict(defaults)
    if getattr(args, "config", None):
        for key, val in parse_config_file(args.config).items():
            if key not in cfg:
                raise SystemExit(f"unknown config key {key!r}")
            cfg[key] = _coerce(val, cfg[key])
    for key in cfg:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


class ResultSink:
    """Append-only CSV writer; every row carries seed and config hash."""

    def __init__(self, path: str | None, fieldnames: list[str]):
        self.path = path
        self.fieldnames = fieldnames + ["seed", "config_hash", "schema"]
        self.rows: list[dict] = []

    def emit(self, row: dict, seed, cfg_hash):
        row = dict(row)
        row["seed"] = seed
        row["config_hash"] = cfg_hash
        row["schema"] = SCHEMA_VERSION
        self.rows.append(row)

    def flush(self):
        self.rows.sort(key=lambda r: json.dumps(r, sort_keys=True, default=str))
        out = sys.stdout if self.path in (None, "-") else open(self.path, "w",
                                                               newline="")
        try:
            writer = csv.DictWriter(out, fieldnames=self.fieldnames)
            writer.writeheader()
            for row in self.rows:
                writer.writerow(row)
        finally:
            if out is not sys.stdout:
                out.close()


def default_workers() -> int:
    env = os.environ.get("TORICA_WORKERS")
    if env:
        return max(1, int(env))
    return max(1, os.cpu_count() or 1)


def powerlaw_fit(ps, means, censored, max_censor=0.05):
    """Least-squares slope of log(t) against log(1/p) on well-sampled points."""
    keep = [(p, m) for p, m, c in zip(ps, means, censored) if c < max_censor]
    if len(keep) < 2:
        return None
    x = np.log([1.0 / p for p, _ in keep])
    y = np.log([m for _, m in keep])
    slope, intercept = np.polyfit(x, y, 1)
    return {"slope": float(slope), "intercept": float(intercept),
            "points": len(keep)}


# ---------------------------------------------------------------------------
# Subcommands


def _noise_1d(kind: str, p: float, eta: float):
    if kind == "wire":
        return tsirelson.WireNoise(p, eta)
    if kind == "gadget":
        return tsirelson.GadgetNoise1D(p)
    raise SystemExit(f"unknown 1D noise kind {kind!r}")


def _fidelity_point(job):
    cfg, L, p = job
    n = round(np.log(L) / np.log(3))
    noise = _noise_1d(cfg["noise"], p, cfg["eta"])
    seed = int.from_bytes(
        seed_derivation(cfg["seed"], 0, f"fid:{L}:{p}").generate_state(2).tobytes(),
        "little")
    return L, p, tsirelson.estimate_fidelity(n, cfg["T"], noise, cfg["trials"],
                                             seed=seed)


def cmd_tsirelson_fidelity(cfg, sink):
    jobs = [(cfg, int(L), p) for L in cfg["L_list"] for p in cfg["p_list"]]
    results = _run_jobs(_fidelity_point, jobs, cfg["workers"])
    h = config_hash(cfg)
    for L, p, res in results:
        sink.emit({"quantity": "fidelity", "L": L, "p": p, "eta": cfg["eta"],
                   "noise": cfg["noise"], "T": cfg["T"],
                   "trials": cfg["trials"], "value": res["F"],
                   "se": res["se"]}, cfg["seed"], h)
    return 0


def _trel1d_point(job):
    cfg, L, p = job
    n = round(np.log(L) / np.log(3))
    noise = _noise_1d(cfg["noise"], p, cfg["eta"])
    seed = int.from_bytes(
        seed_derivation(cfg["seed"], 0, f"trel1d:{L}:{p}").generate_state(2).tobytes(),
        "little")
    return L, p, tsirelson.estimate_trel_1d(n, noise, cfg["trials"],
                                            cfg["t_max"], seed=seed)


def cmd_tsirelson_trel(cfg, sink):
    jobs = [(cfg, int(L), p) for L in cfg["L_list"] for p in cfg["p_list"]]
    results = _run_jobs(_trel1d_point, jobs, cfg["workers"])
    h = config_hash(cfg)
    by_L: dict[int, list] = {}
    for L, p, res in results:
        sink.emit({"quantity": "trel", "L": L, "p": p, "eta": cfg["eta"],
                   "noise": cfg["noise"], "t_max": cfg["t_max"],
                   "trials": cfg["trials"], "value": res["mean"],
                   "se": res["se"], "censored_fraction":
                   res["censored_fraction"]}, cfg["seed"], h)
        by_L.setdefault(L, []).append((p, res["mean"], res["censored_fraction"]))
    for L, pts in sorted(by_L.items()):
        pts.sort()
        fit = powerlaw_fit(*zip(*pts))
        if fit:
            sink.emit({"quantity": "trel_fit", "L": L, "noise": cfg["noise"],
                       "eta": cfg["eta"], "value": fit["slope"],
                       "se": 0.0, "trials": cfg["trials"],
                       "t_max": cfg["t_max"], "p": 0.0,
                       "censored_fraction": 0.0}, cfg["seed"], h)
    return 0


def _toric_point(job):
    cfg, p = job
    noise = simulator.NoiseModel({"qubit": "iid_qubit",
                                  "measurement": "iid_measurement",
                                  "gadget": "iid_gadget"}[cfg["model"]], p)
    seed = int.from_bytes(
        seed_derivation(cfg["seed"], 0, f"toric:{cfg['s']}:{p}").generate_state(2).tobytes(),
        "little")
    res = simulator.estimate_trel(cfg["s"], noise, cfg["trials"], cfg["t_max"],
                                  seed=seed, doubled=cfg["doubled"])
    return p, res


def cmd_toric_trel(cfg, sink):
    jobs = [(cfg, p) for p in cfg["p_list"]]
    results = _run_jobs(_toric_point, jobs, cfg["workers"])
    h = config_hash(cfg)
    pts = []
    for p, res in sorted(results):
        sink.emit({"quantity": "toric_trel", "model": cfg["model"],
                   "s": cfg["s"], "p": p, "trials": cfg["trials"],
                   "t_max": cfg["t_max"], "value": res.mean, "se": res.se,
                   "censored_fraction": res.censored_fraction},
                  cfg["seed"], h)
        pts.append((p, res.mean, res.censored_fraction))
    fit = powerlaw_fit(*zip(*pts)) if len(pts) >= 2 else None
    if fit:
        sink.emit({"quantity": "toric_trel_fit", "model": cfg["model"],
                   "s": cfg["s"], "p": 0.0, "trials": cfg["trials"],
                   "t_max": cfg["t_max"], "value": fit["slope"], "se": 0.0,
                   "censored_fraction": 0.0}, cfg["seed"], h)
    return 0


def cmd_minweight(cfg, sink):
    res = simulator.min_weight_search(cfg["s"], cfg["model"],
                                      mode=cfg["mode"],
                                      doubled=cfg["doubled"],
                                      s1_witnesses=None if cfg["s"] == 1 else
                                      simulator.min_weight_search(
                                          1, cfg["model"],
                                          doubled=cfg["doubled"])["witnesses"])
    h = config_hash(cfg)
    sink.emit({"quantity": "minweight", "model": cfg["model"], "s": cfg["s"],
               "w_link": res["w_link"], "w_c": res["w_c"],
               "exhaustive": res["exhaustive"]}, cfg["seed"], h)
    if cfg["witness_file"]:
        with open(cfg["witness_file"], "w") as fh:
            json.dump({k: {"weight": v["weight"],
                           "events": [[t, kind, list(map(list, [payload]))[0]
                                       if kind == "pattern" else list(payload)]
                                      for t, kind, payload in v["events"]]}
                       for k, v in res["witnesses"].items()}, fh, indent=1)
    ok = res["w_link"] is not None and res["w_c"] is not None
    return 0 if ok else 1


def cmd_verify_nilpotence(cfg, sink):
    h = config_hash(cfg)
    rc = 0
    for variant in ("clean", "arbitrary_input"):
        rep = verifier.nilpotence_report(variant, j_max=cfg["j_max"],
                                         doubled=cfg["doubled"],
                                         progress=print if cfg["verbose"] else None)
        for kind, j in rep["first_empty"].items():
            sink.emit({"quantity": f"nilpotence_{variant}", "chain": kind,
                       "first_empty_j": j,
                       "history": "/".join(map(str, rep["history"][kind]))},
                      cfg["seed"], h)
            if j is None:
                rc = 1
        if cfg["report_file"]:
            path = cfg["report_file"].replace(".json", f".{variant}.json")
            with open(path, "w") as fh:
                json.dump({
                    "variant": variant,
                    "first_empty": rep["first_empty"],
                    "history": rep["history"],
                    "mirror_symmetry_j1": rep["mirror_symmetry_j1"],
                    "patterns": {k: {str(j): [sorted(map(list, pat)) for pat in sorted(pats, key=sorted)]
                                     for j, pats in by_j.items()}
                                 for k, by_j in rep["patterns"].items()},
                }, fh, indent=1)
    return rc


def cmd_verify_gadgets(cfg, sink):
    h = config_hash(cfg)
    rc = 0
    for doubled in (True, False):
        res = verifier.r0_single_fault_check(doubled=doubled)
        sink.emit({"quantity": "r0_single_fault", "doubled": doubled,
                   "checked": res["checked"], "ok": res["ok"]},
                  cfg["seed"], h)
        rc |= 0 if res["ok"] else 1
    table = verifier.m1_reversibility_table()
    sink.emit({"quantity": "m1_reversibility", "doubled": False,
               "checked": table["cells"], "ok": table["ok"]}, cfg["seed"], h)
    rc |= 0 if table["ok"] else 1
    gate_ec = tsirelson.check_gate_ec_conditions_level1()
    sink.emit({"quantity": "gate_ec_level1", "doubled": False,
               "checked": gate_ec["cases"], "ok": gate_ec["ok"]},
              cfg["seed"], h)
    rc |= 0 if gate_ec["ok"] else 1
    struct = verifier.structural_checks(seed=cfg["seed"])
    sink.emit({"quantity": "structural", "doubled": False,
               "checked": 1, "ok": struct["ok"]}, cfg["seed"], h)
    rc |= 0 if struct["ok"] else 1
    return rc


def cmd_stack3d_equivalence(cfg, sink):
    params = compiler.SimParams(k=cfg["k"], n=cfg["n"], T=cfg["T"])
    stack = stack3d.build_stack(params, doubled=cfg["doubled"])
    rng = np.random.default_rng(cfg["seed"])
    h = config_hash(cfg)
    rc = 0
    heights = range(stack.height) if cfg["all_heights"] else [0, 1]
    for z0 in heights:
        init = (rng.random((2, stack.schedule.L, stack.schedule.L)) < 0.2
                ).astype(np.uint8)
        st = stack3d.build_stack(params, doubled=cfg["doubled"])
        st.layers[z0] = init.copy()
        frames = {z0: []}
        stack3d.run_stack(st, steps=4 * st.delta, frames=frames)
        seq = stack3d.frame_rule_sequence(st, z0, 4 * st.delta)
        ref = init.copy()
        ok = True
        for frame, step in zip(frames[z0], (s for s in seq)):
            if step >= 0:
                from .gadgets import apply_round
                apply_round(ref, st.schedule.layer(step))
            if not np.array_equal(frame, ref):
                ok = False
                break
        sink.emit({"quantity": "stack3d_equivalence", "z0": z0, "ok": ok},
                  cfg["seed"], h)
        rc |= 0 if ok else 1
    return rc


def cmd_dump_schedule(cfg, sink):
    params = compiler.SimParams(k=cfg["k"], n=cfg["n"], T=cfg["T"])
    sched = compiler.outer_ft(params, doubled=cfg["doubled"])
    t1 = cfg["t1"] if cfg["t1"] >= 0 else sched.depth
    print(compiler.dump_schedule(sched, cfg["t0"], t1))
    return 0


def _run_jobs(fn, jobs, workers):
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


# ---------------------------------------------------------------------------
# CLI wiring

_COMMANDS = {
    "tsirelson-fidelity": (cmd_tsirelson_fidelity, {
        "L_list": [27.0, 81.0, 243.0], "p_list": [0.012, 0.0135, 0.015, 0.017],
        "T": 50, "eta": 0.0, "noise": "wire", "trials": 2000, "seed": 0,
        "workers": 0, "out": "-"}),
    "tsirelson-trel": (cmd_tsirelson_trel, {
        "L_list": [9.0, 27.0], "p_list": [0.004, 0.005, 0.0065, 0.008],
        "eta": 0.0, "noise": "wire", "trials": 400, "t_max": 100000,
        "seed": 0, "workers": 0, "out": "-"}),
    "toric-trel": (cmd_toric_trel, {
        "model": "qubit", "s": 1, "p_list": [0.02, 0.03, 0.045, 0.07],
        "trials": 400, "t_max": 100000, "doubled": False, "seed": 0,
        "workers": 0, "out": "-"}),
    "minweight": (cmd_minweight, {
        "model": "qubit", "s": 1, "mode": "exhaustive", "doubled": False,
        "witness_file": "", "seed": 0, "out": "-"}),
    "verify-nilpotence": (cmd_verify_nilpotence, {
        "j_max": 4, "doubled": False, "verbose": False, "report_file": "",
        "seed": 0, "out": "-"}),
    "verify-gadgets": (cmd_verify_gadgets, {"seed": 0, "out": "-"}),
    "stack3d-equivalence": (cmd_stack3d_equivalence, {
        "k": 1, "n": 1, "T": 1, "doubled": False, "all_heights": True,
        "seed": 0, "out": "-"}),
    "dump-schedule": (cmd_dump_schedule, {
        "k": 1, "n": 1, "T": 1, "doubled": False, "t0": 0, "t1": -1,
        "seed": 0, "out": "-"}),
}

_FIELDS = ["quantity", "model", "chain", "L", "s", "p", "eta", "noise", "T",
           "k", "n", "z0", "trials", "t_max", "value", "se",
           "censored_fraction", "w_link", "w_c", "exhaustive", "doubled",
           "checked", "ok", "first_empty_j", "history"]


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="torica",
        description="Hierarchical toric-code automaton: experiments and verification")
    sub = parser.add_subparsers(dest="command")
    for name, (_, defaults) in _COMMANDS.items():
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="key=value config file")
        for key, val in defaults.items():
            if isinstance(val, bool):
                p.add_argument(f"--{key.replace('_', '-')}", dest=key,
                               default=None, type=lambda s: s.lower() in
                               ("1", "true", "yes"))
            elif isinstance(val, list):
                p.add_argument(f"--{key.replace('_', '-')}", dest=key,
                               default=None, type=lambda s: [float(x) for x in
                                                             s.replace(",", " ").split()])
            else:
                p.add_argument(f"--{key.replace('_', '-')}", dest=key,
                               default=None, type=type(val))
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_usage()
        return 2
    fn, defaults = _COMMANDS[args.command]
    try:
        cfg = resolve_config(defaults, args)
    except SystemExit:
        raise
    except Exception as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if "workers" in cfg and not cfg["workers"]:
        cfg["workers"] = default_workers()
    sink = ResultSink(cfg.get("out"), _FIELDS)
    code = fn(cfg, sink)
    sink.flush()
    return code


if __name__ == "__main__":
    sys.exit(main())
