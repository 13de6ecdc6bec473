"""Command-line front end: run constructions and checks, write traces and summaries.

Exit codes: 0 when every verdict passes, 1 on a violation (the first failing
witness is printed), 2 on a usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .costfn import (
    CostFunction,
    benign_bound,
    benign_witness_verify,
    c_fragment,
    c_omega,
    cost_table_csv,
    longest_expensive_sequence,
    monotonicity_violation,
    product_identity_check,
)
from .dyadic import ZERO, Dyadic
from .omega import LeftCEApprox, omega_source, parse_set
from .constructions import (
    EmptyTest,
    JoinCaptureTest,
    StageTrace,
    benign_to_fragment,
    build_capture_test,
    build_noncapture_open,
    criterion_check,
    default_ravenous,
    family_from_spec,
    g_inverse,
    run_obedient_ce,
    run_shift,
    run_smart,
    schedule_from_spec,
    w_family_from_spec,
)
from .constructions.trace import ANCHORS, _Tally

CONSTRUCTIONS = ("smart", "shift", "obedient", "capture", "noncapture", "benign-r", "ravenous")
CHECKS = ("criterion", "product-identity", "benign-bound")

# flag defaults; a --config file overrides these and explicit flags override both
DEFAULTS: dict = {
    "source": "toy-machine",
    "path": None,
    "profile": "steady",
    "seed": 0,
    "seeds": None,
    "horizon": 200,
    "jobs": 1,
    "out": None,
    "quiet_passing": False,
    # construction parameters
    "cost": None,
    "schedule": "empty",
    "kmax": None,
    "no_floor": False,
    "strict": False,
    "family": None,
    "strategies": 4,
    "r": None,
    "s": None,
    "nmax": 50,
    "k_shift": 0,
    "eps": None,
    "test": "join",
    "delta": "1/2",
    "expect": None,
    "xs": "0:8",
    "stages": None,
}


class UsageError(Exception):
    pass


# --- parsing -----------------------------------------------------------------------------


def dyadic_arg(text: str) -> Dyadic:
    try:
        return Dyadic.parse(str(text))
    except ValueError as exc:
        raise UsageError(f"{exc} (numbers are dyadic strings such as 1/64 or 3/2^5)") from None


def seeds_arg(text) -> list[int]:
    """``a:b`` (half-open range) or a comma list."""
    if isinstance(text, list):
        return [int(x) for x in text]
    text = str(text)
    try:
        if ":" in text:
            a, b = text.split(":")
            return list(range(int(a), int(b)))
        return [int(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"bad seed list {text!r}") from None


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file of options; flags override it")
    p.add_argument("--source", choices=["toy-machine", "synthetic", "replay"])
    p.add_argument("--path", help="JSON-lines stream for --source replay")
    p.add_argument("--profile", help="synthetic stream profile")
    p.add_argument("--seed", type=int)
    p.add_argument("--seeds", help="a:b or comma list; one run per seed")
    p.add_argument("--horizon", type=int)
    p.add_argument("--jobs", type=int, help="worker processes for --seeds")
    p.add_argument("--out", help="directory for trace.jsonl and summary.csv")
    p.add_argument("--quiet-passing", action="store_true", default=None, dest="quiet_passing",
                   help="record failing verdicts only")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="costlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("omega", help="print a stream approximation as JSON lines")
    _common(p)

    p = sub.add_parser("costfn", help="tabulate a cost function and check monotonicity")
    _common(p)
    p.add_argument("--cost", help="omega | fragment:<set>")
    p.add_argument("--xs", help="a:b range of positions")
    p.add_argument("--stages", help="comma list of stages (default: the horizon)")

    p = sub.add_parser("construct", help="run a construction")
    csub = p.add_subparsers(dest="construction", required=True)
    for name in CONSTRUCTIONS:
        q = csub.add_parser(name)
        _common(q)
        if name in ("smart", "shift", "obedient"):
            q.add_argument("--cost", help="omega | fragment:<set> | zero")
        if name == "smart":
            q.add_argument("--schedule", help="empty | random | random:<seed> | script.json")
            q.add_argument("--kmax", type=int)
            q.add_argument("--no-floor", action="store_true", default=None, dest="no_floor")
            q.add_argument("--strict", action="store_true", default=None)
        if name in ("shift", "obedient"):
            q.add_argument("--family", help="enumeration family spec; {seed} is substituted")
        if name == "shift":
            q.add_argument("--strategies", type=int)
        if name in ("capture", "noncapture", "ravenous"):
            q.add_argument("--r", help="computable set, e.g. evens or col:1,2/3")
        if name == "capture":
            q.add_argument("--nmax", type=int)
            q.add_argument("--k-shift", type=int, dest="k_shift")
        if name == "noncapture":
            q.add_argument("--s", help="computable set S")
            q.add_argument("--eps", help="power of two, e.g. 1/64")
            q.add_argument("--test", choices=["join", "empty"])
        if name == "benign-r":
            q.add_argument("--delta", help="power of two in (0,1]")
            q.add_argument("--cost", help="self | omega")
        if name == "ravenous":
            q.add_argument("--kmax", type=int)

    p = sub.add_parser("check", help="run a standalone check")
    ksub = p.add_subparsers(dest="check", required=True)
    q = ksub.add_parser("criterion")
    _common(q)
    q.add_argument("--r")
    q.add_argument("--s")
    q.add_argument("--expect", choices=["bounded", "growing"])
    q = ksub.add_parser("product-identity")
    _common(q)
    q.add_argument("--r", action="append", help="repeatable")
    q = ksub.add_parser("benign-bound")
    _common(q)
    q.add_argument("--r", action="append", help="repeatable")
    q.add_argument("--eps", action="append", help="repeatable")

    p = sub.add_parser("report", help="summarize an output directory")
    p.add_argument("directory")
    return parser


def resolve_config(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.is_file():
            raise UsageError(f"config file not found: {path}")
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise UsageError(f"config is not JSON: {exc}") from None
        unknown = set(data) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        for key, value in data.items():
            if isinstance(value, float):
                raise UsageError(f"config key {key!r} is a float; use a dyadic string")
        cfg.update(data)
    for key, value in vars(args).items():
        if key in DEFAULTS and value is not None:
            cfg[key] = value
    if not isinstance(cfg["horizon"], int) or cfg["horizon"] < 1:
        raise UsageError("horizon must be a positive integer")
    if cfg["source"] == "replay" and not (cfg["path"] and Path(cfg["path"]).is_file()):
        raise UsageError(f"replay stream not found: {cfg['path']}")
    if cfg["jobs"] < 1:
        raise UsageError("jobs must be >= 1")
    return cfg


# --- jobs ------------------------------------------------------------------------------


def _stream(cfg: dict, seed: int, horizon: int) -> LeftCEApprox:
    return omega_source(cfg["source"], horizon, seed=seed, profile=cfg["profile"], path=cfg["path"])


def _set(text: str):
    try:
        return parse_set(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _cost(spec: str, omega: LeftCEApprox) -> CostFunction:
    if spec == "omega":
        return c_omega(omega)
    if spec == "zero":
        return CostFunction(lambda x, s: ZERO, "zero", "additive")
    if spec.startswith("fragment:"):
        return c_fragment(omega, _set(spec.split(":", 1)[1]))
    raise UsageError(f"unknown cost {spec!r}")


def _construct(name: str, cfg: dict, seed: int) -> StageTrace:
    T = cfg["horizon"]
    keep = not cfg["quiet_passing"]
    omega = _stream(cfg, seed, T + 1)
    if name == "smart":
        sched = cfg["schedule"]
        if sched == "random":
            sched = f"random:{seed}"
        elif sched not in ("empty",) and not sched.startswith("random:") and not Path(sched).is_file():
            raise UsageError(f"schedule file not found: {sched}")
        run = run_smart(_cost(cfg["cost"] or "omega", omega), schedule_from_spec(sched), T,
                        kmax=cfg["kmax"] if cfg["kmax"] is not None else 4,
                        floor=not cfg["no_floor"], strict=cfg["strict"], keep_passing=keep)
        run.trace.event(T, "result", a=sorted(run.a), counts=run.counts, total=run.total)
        return run.trace
    if name == "shift":
        family = family_from_spec((cfg["family"] or "mirrors").format(seed=seed), cfg["strategies"])
        run = run_shift(_cost(cfg["cost"] or "fragment:odds", omega), family, T, keep_passing=keep)
        return run.trace
    if name == "obedient":
        spec = (cfg["family"] or "naturals@1,evens@5,random:{seed},empty").format(seed=seed)
        if spec.endswith(".json") and not Path(spec).is_file():
            raise UsageError(f"family file not found: {spec}")
        run = run_obedient_ce(_cost(cfg["cost"] or "omega", omega), w_family_from_spec(spec), T,
                              keep_passing=keep)
        return run.trace
    if name == "capture":
        run = build_capture_test(omega, _set(cfg["r"] or "evens"), T, nmax=cfg["nmax"],
                                 k_shift=cfg["k_shift"], keep_passing=keep)
        return run.trace
    if name == "noncapture":
        s_set, r = _set(cfg["s"] or "naturals"), _set(cfg["r"] or "evens")
        eps = dyadic_arg(cfg["eps"] or "1/64")
        if eps <= ZERO or Dyadic.pow2(-eps.floor_neg_log2()) != eps:
            raise UsageError("eps must be a power of two")
        test = JoinCaptureTest(omega, s_set, r) if cfg["test"] == "join" else EmptyTest()
        run = build_noncapture_open(test, s_set, r, omega, eps, T, keep_passing=keep)
        return run.trace
    if name == "benign-r":
        delta = dyadic_arg(cfg["delta"])
        if delta <= ZERO or delta > Dyadic(1) or Dyadic.pow2(-delta.floor_neg_log2()) != delta:
            raise UsageError("delta must be a power of two in (0,1]")
        spec = cfg["cost"] or "self"
        cost = None if spec == "self" else _cost(spec, omega)
        run = benign_to_fragment(g_inverse, delta, omega, T, cost=cost, keep_passing=keep)
        run.trace.event(T, "result", m=run.m, beta=run.beta[run.beta.horizon], increments=run.increments)
        return run.trace
    if name == "ravenous":
        run = default_ravenous(seed, omega, _set(cfg["r"] or "evens"), T,
                               kmax=cfg["kmax"] if cfg["kmax"] is not None else 3)
        return run.trace
    raise UsageError(f"unknown construction {name!r}")


def _check(name: str, cfg: dict, seed: int) -> StageTrace:
    T = cfg["horizon"]
    if name == "criterion":
        r, s = _set(cfg["r"] or "evens"), _set(cfg["s"] or "naturals")
        trace = StageTrace("criterion", {"r": r.name, "s": s.name, "horizon": T})
        rep = criterion_check(r, s, T)
        trace.event(T, "estimate", **rep.to_json())
        if cfg["expect"]:
            trace.check("check.criterion", T, rep.trend == cfg["expect"],
                        {"expect": cfg["expect"], "trend": rep.trend, "b": rep.b})
        return trace
    omega = _stream(cfg, seed, T)
    sets = cfg["r"] or ["evens"]
    if isinstance(sets, str):
        sets = [sets]
    if name == "product-identity":
        trace = StageTrace("product-identity", {"r": sets, "horizon": T})
        for text in sets:
            rep = product_identity_check(omega, _set(text), T)
            trace.check("check.product-identity", T, rep.passed,
                        {"r": text, "checks": rep.checks, **(rep.witness or {})})
        return trace
    if name == "benign-bound":
        epss = cfg["eps"] or ["1/2", "1/4", "1/8"]
        if isinstance(epss, str):
            epss = [epss]
        trace = StageTrace("benign-bound", {"r": sets, "eps": epss, "horizon": T})
        costs = [("check.benign-omega", "omega", c_omega(omega), None)]
        costs += [("check.benign-fragment", t, c_fragment(omega, _set(t)), _set(t)) for t in sets]
        for e_text in epss:
            eps = dyadic_arg(e_text)
            if eps <= ZERO:
                raise UsageError("eps must be positive")
            for inv, label, c, r in costs:
                seq = longest_expensive_sequence(c, eps, T, monotone=True)
                bound = benign_bound("c_omega" if r is None else "c_fragment", eps, r)
                ok = len(seq) <= bound and benign_witness_verify(c, eps, seq, bound)
                trace.check(inv, T, ok,
                            {"cost": label, "eps": eps, "length": len(seq), "bound": bound, "sequence": seq})
        return trace
    raise UsageError(f"unknown check {name!r}")


def run_job(job: tuple[str, str, dict, int]) -> StageTrace:
    """One independent run; top-level so worker processes can import it."""
    group, name, cfg, seed = job
    trace = _construct(name, cfg, seed) if group == "construct" else _check(name, cfg, seed)
    return trace


def _config_record(cfg: dict, seed: int) -> dict:
    keep = {k: v for k, v in cfg.items() if k not in ("jobs", "out", "seeds")}
    keep["seed"] = seed
    return keep


def run_batch(group: str, name: str, cfg: dict) -> list[StageTrace]:
    seeds = seeds_arg(cfg["seeds"]) if cfg["seeds"] is not None else [cfg["seed"]]
    jobs = [(group, name, cfg, seed) for seed in seeds]
    if cfg["jobs"] > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg["jobs"]) as pool:
            return list(pool.map(run_job, jobs))
    return [run_job(j) for j in jobs]


# --- output ------------------------------------------------------------------------------


def combined_outputs(name: str, cfg: dict, traces: list[StageTrace]) -> tuple[str, StageTrace]:
    """The trace file text (a run header per seed) and a merged tally."""
    seeds = seeds_arg(cfg["seeds"]) if cfg["seeds"] is not None else [cfg["seed"]]
    lines = []
    merged = StageTrace(name)
    for seed, trace in zip(seeds, traces):
        header = {"stage": 0, "kind": "run", "payload": {"run": name, "config": _config_record(cfg, seed)}}
        lines.append(json.dumps(header, sort_keys=True) + "\n")
        lines.append(trace.to_jsonl())
        merged.merge_tallies(trace)
    return "".join(lines), merged


def _emit(name: str, cfg: dict, traces: list[StageTrace], out=None) -> int:
    out = out or sys.stdout
    text, merged = combined_outputs(name, cfg, traces)
    if cfg["out"]:
        d = Path(cfg["out"])
        d.mkdir(parents=True, exist_ok=True)
        (d / "trace.jsonl").write_text(text)
        (d / "summary.csv").write_text(merged.summary_csv())
    for row in merged.summary_rows():
        print(f"{row['invariant']}: {row['checks']} checks, {row['failures']} failures", file=out)
    if merged.violated:
        print("VIOLATION " + json.dumps(merged.first_failure, sort_keys=True), file=out)
        return 1
    print(f"{name}: {len(traces)} run(s), all verdicts pass", file=out)
    return 0


def _omega_cmd(cfg: dict) -> int:
    stream = _stream(cfg, cfg["seed"], cfg["horizon"])
    text = stream.to_jsonl()
    if cfg["out"]:
        d = Path(cfg["out"])
        d.mkdir(parents=True, exist_ok=True)
        (d / "omega.jsonl").write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _costfn_cmd(cfg: dict) -> int:
    T = cfg["horizon"]
    omega = _stream(cfg, cfg["seed"], T)
    c = _cost(cfg["cost"] or "omega", omega)
    a, _, b = str(cfg["xs"]).partition(":")
    try:
        xs = range(int(a), int(b))
        stages = [int(x) for x in cfg["stages"].split(",")] if cfg["stages"] else [T]
    except ValueError:
        raise UsageError("xs is a:b and stages a comma list of integers") from None
    if any(s > T or s < 0 for s in stages):
        raise UsageError("stages must lie in [0, horizon]")
    table = cost_table_csv(c, xs, stages)
    trace = StageTrace("costfn", {"cost": c.name, "horizon": T})
    bad = monotonicity_violation(c, T, xs=[x for x in xs if x < T])
    trace.check("costfn.monotone", T, bad is None, {"violation": bad})
    if cfg["out"]:
        d = Path(cfg["out"])
        d.mkdir(parents=True, exist_ok=True)
        (d / "costs.csv").write_text(table)
    else:
        sys.stdout.write(table)
    return _emit("costfn", cfg, [trace])


def _report_cmd(directory: str) -> int:
    path = Path(directory) / "trace.jsonl"
    if not path.is_file():
        raise UsageError(f"no trace.jsonl in {directory}")
    tallies: dict[str, _Tally] = {}
    first = None
    runs = 0
    for line in path.read_text().splitlines():
        rec = json.loads(line)
        if rec.get("kind") == "run":
            runs += 1
        if "invariant" not in rec:
            continue
        t = tallies.setdefault(rec["invariant"], _Tally())
        t.checks += 1
        if not rec["pass"]:
            t.failures += 1
            t.witness = rec["witness"]
            first = first or rec
        elif t.witness is None:
            t.witness = rec["witness"]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["invariant", "anchor", "checks", "failures", "witness"])
    for inv, t in sorted(tallies.items()):
        w.writerow([inv, ANCHORS.get(inv, ""), t.checks, t.failures, json.dumps(t.witness, sort_keys=True)])
    sys.stdout.write(buf.getvalue())
    print(f"{runs} run(s)")
    if first is not None:
        print("VIOLATION " + json.dumps(first, sort_keys=True))
        return 1
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        if args.command == "report":
            return _report_cmd(args.directory)
        cfg = resolve_config(args)
        if args.command == "omega":
            return _omega_cmd(cfg)
        if args.command == "costfn":
            return _costfn_cmd(cfg)
        group, name = (("construct", args.construction) if args.command == "construct"
                       else ("check", args.check))
        return _emit(name, cfg, run_batch(group, name, cfg))
    except (UsageError, ValueError, FileNotFoundError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
