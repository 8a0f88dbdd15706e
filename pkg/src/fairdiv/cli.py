"""Command-line front end.

Every run prints one JSON report with sorted keys.  The exit status is 0
exactly when the returned set meets the contract of the chosen algorithm
(and, with ``--verify``, passes the oracle check).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import fixtures
from .core import Dataset, FairDivError, FairnessSpec, Solution, derive_rng, diversity, validate
from .distributed import by_hash, from_mapping, round_robin, two_round_solve
from .euclidean import build_coreset, fair_euclidean_search, fair_line_opt
from .greedy_flow import fair_greedy_flow_search
from .guessing import dataset_range
from .io import dumps, load_dataset, read_partition_file
from .lp_rounding import concentration_threshold, lp_pipeline
from .oracle import brute_force_opt, verify
from .streaming import (
    OnceStream,
    fair_stream_euclidean,
    fair_stream_gen,
    fair_stream_two_groups,
    stream_order,
)
from .synthetic import generate_synthetic

SOLVE_ALGOS = ("brute", "lp2", "lp6", "greedy-flow", "line", "euclidean")
STREAM_ALGOS = ("gen", "euclidean", "two-groups")
FINAL_SOLVERS = ("brute", "fair_euclidean", "lp6")


class UsageError(FairDivError):
    pass


@dataclass(frozen=True)
class Contract:
    """Guarantee an algorithm promises: ``div >= opt/alpha`` and ``ceil(beta*k_i)`` per group.

    ``exact`` also demands no more than ``k_i`` points per group; ``min_div``
    is the separation the algorithm certifies from its own guess.
    """

    alpha: float
    beta: float
    exact: bool
    min_div: float = 0.0
    fairness_checked: bool = True


def contract_for(kind: str, spec: FairnessSpec, eps: float, sol: Solution) -> Contract:
    g = sol.gamma_used or 0.0
    m = spec.m
    table: dict[str, Contract] = {
        "brute": Contract(1.0, 1.0, True),
        "line": Contract(1.0, 1.0, True),
        "lp2": Contract(2.0, 1.0, False, g / 2, fairness_checked=False),
        "lp6": Contract(6.0, 1 - eps, False, g / 6),
        "greedy-flow": Contract((m + 1) * (1 + eps), 1.0, True, g / (m + 1)),
        "euclidean": Contract(1 + eps, 1 - eps, False, g),
        "stream-gen": Contract(30 * (1 + eps), 1 - eps, False, g / 6),
        "stream-euclidean": Contract(1 + eps, 1 - eps, False, g),
        "stream-two-groups": Contract(4 * (1 + eps), 1.0, True, g / 4),
        "distributed-brute": Contract(1 + eps, 1.0, True),
        "distributed-fair_euclidean": Contract((1 + eps) ** 2, 1 - eps, False, g),
        "distributed-lp6": Contract(6 * (1 + eps), 1 - eps, False, g / 6),
    }
    return table[kind]


def contract_met(c: Contract, spec: FairnessSpec, sol: Solution) -> bool:
    if sol.diversity < c.min_div:
        return False
    if c.exact:
        return tuple(sol.group_counts) == tuple(spec.quotas)
    if not c.fairness_checked:
        return True
    need = [math.ceil(c.beta * k) for k in spec.quotas]
    return all(cnt >= r for cnt, r in zip(sol.group_counts, need))


# -- parsing helpers --------------------------------------------------------


def parse_quotas(text: str | None, dataset: Dataset, fixture: str | None) -> FairnessSpec:
    if text is None:
        if fixture is not None:
            return FairnessSpec.from_mapping(dataset, fixtures.fixture_quotas(fixture))
        raise UsageError("--k is required (e.g. --k g1=2,g2=1)")
    quotas: dict[str, int] = {}
    for part in text.split(","):
        if not part.strip():
            continue
        label, sep, val = part.partition("=")
        if not sep:
            raise UsageError(f"bad quota {part!r}; expected label=count")
        try:
            quotas[label.strip()] = int(val)
        except ValueError:
            raise UsageError(f"bad quota count in {part!r}") from None
    try:
        return FairnessSpec.from_mapping(dataset, quotas)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def open_dataset(arg: str, fmt: str) -> tuple[Dataset, str | None]:
    """Path, or ``fixture:<name>`` for a bundled fixture."""
    if arg.startswith("fixture:"):
        name = arg.split(":", 1)[1]
        return load_dataset(fixtures.fixture_path(name), fmt), name
    path = Path(arg)
    if not path.exists():
        raise UsageError(f"no such file: {arg}")
    return load_dataset(path, fmt), None


def fmt_float(x: float | None) -> float | str | None:
    if x is None:
        return None
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(x)


def jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return fmt_float(float(obj))
    return obj


def solution_report(dataset: Dataset, spec: FairnessSpec, sol: Solution) -> dict[str, Any]:
    recomputed = diversity(dataset, sol.selected)
    if recomputed != sol.diversity:
        raise FairDivError("reported diversity does not match the recomputed value")
    return {
        "selected_ids": sol.ids(dataset),
        "diversity": fmt_float(sol.diversity),
        "group_counts": dict(zip(dataset.group_names, sol.group_counts)),
        "quotas": dict(zip(dataset.group_names, spec.quotas)),
        "gamma_used": fmt_float(sol.gamma_used),
        "trials": sol.trials,
        "algorithm_tag": sol.algorithm_tag,
        "info": jsonable(dict(sol.info)),
    }


def finish(
    args: argparse.Namespace,
    dataset: Dataset,
    spec: FairnessSpec,
    sol: Solution,
    kind: str,
    base: dict[str, Any],
    started: float,
) -> int:
    report = dict(base)
    report.update(solution_report(dataset, spec, sol))
    c = contract_for(kind, spec, args.eps, sol)
    ok = contract_met(c, spec, sol)
    report["contract"] = {
        "alpha": c.alpha,
        "beta": c.beta,
        "exact_quotas": c.exact,
        "min_diversity": fmt_float(c.min_div),
        "met": ok,
    }
    if getattr(args, "verify", False):
        v = verify(dataset, spec, sol, alpha=c.alpha, beta=max(c.beta, 1e-12))
        fair_ok = v.fairness_ok or not c.fairness_checked
        report["verdict"] = {
            "alpha": c.alpha,
            "beta": c.beta,
            "optimum": fmt_float(v.optimum),
            "ratio": fmt_float(v.ratio),
            "diversity_ok": v.diversity_ok,
            "fairness_ok": v.fairness_ok,
            "pass": v.diversity_ok and fair_ok,
        }
        ok = ok and v.diversity_ok and fair_ok
    if getattr(args, "timing", False):
        report["wall_time_s"] = round(time.perf_counter() - started, 6)
    emit(report, args)
    return 0 if ok else 1


def emit(report: dict[str, Any], args: argparse.Namespace) -> None:
    text = json.dumps(jsonable(report), sort_keys=True, indent=2) + "\n"
    out = getattr(args, "output", None)
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def header(args: argparse.Namespace, dataset: Dataset, command: str, **extra: Any) -> dict[str, Any]:
    params = {"eps": args.eps, "seed": args.seed}
    if hasattr(args, "delta"):
        params["delta"] = args.delta
    params.update(extra)
    return {
        "command": command,
        "dataset": {
            "source": args.data,
            "n": dataset.n,
            "m": dataset.m,
            "metric": "euclidean" if dataset.is_euclidean else "matrix",
            "groups": list(dataset.group_names),
        },
        "params": params,
    }


def need_coords(dataset: Dataset, algo: str) -> None:
    if not dataset.is_euclidean:
        raise UsageError(f"algorithm {algo!r} needs coordinates but the input is a distance matrix")


def maybe_validate(args: argparse.Namespace, dataset: Dataset, spec: FairnessSpec, base: dict[str, Any]) -> None:
    if getattr(args, "validate", False):
        base["validation"] = validate(dataset, spec).issues


# -- subcommands ------------------------------------------------------------


def run_solver(algo: str, dataset: Dataset, spec: FairnessSpec, args: argparse.Namespace) -> Solution:
    rng = derive_rng(args.seed, "solve", algo)
    if algo == "brute":
        return brute_force_opt(dataset, spec)
    if algo == "line":
        need_coords(dataset, algo)
        if dataset.dim != 1:
            raise UsageError("algorithm 'line' needs one-dimensional points")
        return fair_line_opt(dataset, spec)
    if algo == "greedy-flow":
        return fair_greedy_flow_search(dataset, spec, eps=args.eps, mode=args.search)
    if algo in ("lp2", "lp6"):
        mode = "expected2" if algo == "lp2" else "concentrated6"
        return lp_pipeline(dataset, spec, eps=args.eps, mode=mode, delta=args.delta, rng=rng)
    if algo == "euclidean":
        need_coords(dataset, algo)
        return fair_euclidean_search(dataset, spec, eps=args.eps, delta=args.delta, rng=rng, lam=args.lam)
    raise UsageError(f"unknown algorithm {algo!r}")


def cmd_solve(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    dataset, fx = open_dataset(args.data, args.format)
    spec = parse_quotas(args.k, dataset, fx)
    base = header(args, dataset, "solve", algo=args.algo)
    maybe_validate(args, dataset, spec, base)
    if args.algo == "lp6":
        need = concentration_threshold(args.eps, spec.m)
        if any(0 < k < need for k in spec.quotas):
            base["note"] = (
                f"quotas below {need:.1f}: the (1-eps) fairness bound does not apply; "
                "greedy-flow gives exact quotas for small k"
            )
    sol = run_solver(args.algo, dataset, spec, args)
    return finish(args, dataset, spec, sol, args.algo, base, started)


def stream_bounds(args: argparse.Namespace, dataset: Dataset) -> tuple[float, float]:
    lo, hi = args.dmin_lb, args.dmax_ub
    if lo is None or hi is None:
        d_lo, d_hi = dataset_range(dataset)
        lo = d_lo if lo is None else lo
        hi = d_hi if hi is None else hi
    return lo, hi


def cmd_stream(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    dataset, fx = open_dataset(args.data, args.format)
    spec = parse_quotas(args.k, dataset, fx)
    lo, hi = stream_bounds(args, dataset)
    base = header(args, dataset, "stream", algo=args.algo, dmin_lb=lo, dmax_ub=hi, shuffle_seed=args.shuffle_seed)
    maybe_validate(args, dataset, spec, base)
    stream = OnceStream(stream_order(dataset, args.shuffle_seed))
    rng = derive_rng(args.seed, "stream", args.algo)
    if args.algo == "gen":
        sol = fair_stream_gen(dataset, stream, spec, lo, hi, eps=args.eps, delta=args.delta, rng=rng)
    elif args.algo == "euclidean":
        need_coords(dataset, "euclidean")
        sol = fair_stream_euclidean(dataset, stream, spec, lo, hi, eps=args.eps, lam=args.lam, delta=args.delta, rng=rng)
    else:
        sol = fair_stream_two_groups(dataset, stream, spec, lo, hi, eps=args.eps)
    base["memory"] = {k: sol.info[k] for k in ("guesses", "peak_memory_points", "peak_per_guess") if k in sol.info}
    return finish(args, dataset, spec, sol, f"stream-{args.algo}", base, started)


def partitions_for(args: argparse.Namespace, dataset: Dataset) -> list[list[int]]:
    how = args.partition
    if how == "round-robin":
        return round_robin(dataset.n, args.sites)
    if how == "by-hash":
        return by_hash(dataset.ids, args.sites)
    if how.startswith("file:"):
        return from_mapping(dataset, read_partition_file(how[5:]))
    raise UsageError(f"unknown partition scheme {how!r}")


def cmd_distributed(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    dataset, fx = open_dataset(args.data, args.format)
    spec = parse_quotas(args.k, dataset, fx)
    if args.final == "fair_euclidean":
        need_coords(dataset, "fair_euclidean")
    parts = partitions_for(args, dataset)
    base = header(args, dataset, "distributed", final=args.final, partition=args.partition, sites=len(parts))
    rng = derive_rng(args.seed, "distributed", args.final)
    sol = two_round_solve(
        dataset, parts, spec, eps=args.eps, final_solver=args.final, lam=args.lam, delta=args.delta, rng=rng
    )
    return finish(args, dataset, spec, sol, f"distributed-{args.final}", base, started)


def cmd_coreset(args: argparse.Namespace) -> int:
    dataset, fx = open_dataset(args.data, args.format)
    spec = parse_quotas(args.k, dataset, fx)
    bundle = build_coreset(dataset, spec, args.eps, args.lam)
    report = header(args, dataset, "coreset", lam=bundle.lam)
    report["per_group_size_cap"] = bundle.size
    report["coreset"] = {
        name: {
            "ids": [dataset.ids[p] for p in o.order],
            "insertion_radii": [fmt_float(r) for r in o.radii],
        }
        for name, o in zip(dataset.group_names, bundle.orderings)
    }
    report["size"] = len(bundle)
    emit(report, args)
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    dataset, fx = open_dataset(args.data, args.format)
    spec = parse_quotas(args.k, dataset, fx)
    try:
        picks = [dataset.index_of(x.strip()) for x in args.ids.split(",") if x.strip()]
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None
    sol = Solution.build(dataset, picks, tag="given")
    v = verify(dataset, spec, sol, alpha=args.alpha, beta=args.beta)
    report = {
        "command": "verify",
        "dataset": {"source": args.data, "n": dataset.n, "m": dataset.m},
        "selected_ids": sol.ids(dataset),
        "diversity": fmt_float(sol.diversity),
        "group_counts": dict(zip(dataset.group_names, sol.group_counts)),
        "verdict": {
            "alpha": args.alpha,
            "beta": args.beta,
            "optimum": fmt_float(v.optimum),
            "required_counts": dict(zip(dataset.group_names, v.required_counts)),
            "diversity_ok": v.diversity_ok,
            "fairness_ok": v.fairness_ok,
            "pass": v.passed,
        },
    }
    emit(report, args)
    return 0 if v.passed else 1


def cmd_gen(args: argparse.Namespace) -> int:
    ds = generate_synthetic(
        args.n,
        args.m,
        args.dim,
        matrix=args.matrix,
        clusters=args.clusters,
        spread=args.spread,
        seed=args.seed,
    )
    text = dumps(ds)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _bench_one(task: tuple[str, str, str, str | None, dict[str, Any]]) -> dict[str, Any]:
    algo, data, fmt, quotas, params = task
    ns = argparse.Namespace(data=data, format=fmt, k=quotas, **params)
    dataset, fx = open_dataset(data, fmt)
    spec = parse_quotas(quotas, dataset, fx)
    t0 = time.perf_counter()
    try:
        sol = run_solver(algo, dataset, spec, ns)
    except (FairDivError, ValueError) as exc:
        return {"algo": algo, "error": str(exc)}
    row = {
        "algo": algo,
        "diversity": fmt_float(sol.diversity),
        "group_counts": list(sol.group_counts),
        "contract_met": contract_met(contract_for(algo, spec, ns.eps, sol), spec, sol),
    }
    if params.get("timing"):
        row["wall_time_s"] = round(time.perf_counter() - t0, 6)
    return row


def cmd_bench(args: argparse.Namespace) -> int:
    dataset, fx = open_dataset(args.data, args.format)
    spec = parse_quotas(args.k, dataset, fx)
    algos = [a.strip() for a in args.algos.split(",") if a.strip()]
    bad = [a for a in algos if a not in SOLVE_ALGOS]
    if bad:
        raise UsageError(f"unknown algorithm(s): {', '.join(bad)}")
    params = {"eps": args.eps, "delta": args.delta, "seed": args.seed, "lam": args.lam, "search": args.search, "timing": args.timing}
    tasks = [(a, args.data, args.format, args.k, params) for a in algos]
    if args.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_bench_one, tasks))
    else:
        rows = [_bench_one(t) for t in tasks]
    report = header(args, dataset, "bench", algos=algos)
    try:
        opt = brute_force_opt(dataset, spec).diversity
        report["optimum"] = fmt_float(opt)
        for row in rows:
            if "diversity" in row:
                d = row["diversity"]
                d = math.inf if d == "inf" else d
                row["ratio"] = fmt_float(1.0 if d == opt else (math.inf if d == 0 else opt / d))
    except FairDivError as exc:
        report["optimum"] = None
        report["optimum_note"] = str(exc)
    report["results"] = rows
    emit(report, args)
    return 0 if all(r.get("contract_met") for r in rows) else 1


# -- argument parser --------------------------------------------------------


def _common(p: argparse.ArgumentParser, *, data: bool = True, randomized: bool = True) -> None:
    if data:
        p.add_argument("data", help="dataset path, or fixture:<name> (fix_a, fix_b, fix_tight)")
        p.add_argument("--format", choices=("auto", "csv", "matrix"), default="auto")
        p.add_argument("--k", help="quotas as label=count pairs, e.g. g1=2,g2=1")
    p.add_argument("--eps", type=float, default=0.5)
    if randomized:
        p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lambda", dest="lam", type=float, default=None, help="doubling dimension (default: D)")
    p.add_argument("-o", "--output", help="write the report here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fairdiv", description="Fair max-min diversification")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run an offline algorithm")
    _common(p)
    p.add_argument("--algo", choices=SOLVE_ALGOS, required=True)
    p.add_argument("--search", choices=("scan", "binary"), default="scan", help="greedy-flow guess search")
    p.add_argument("--verify", action="store_true", help="check the result against the exact optimum")
    p.add_argument("--validate", action="store_true", help="include the dataset validation report")
    p.add_argument("--timing", action="store_true", help="include wall time (makes reports run-dependent)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("stream", help="run a single-pass algorithm in file order")
    _common(p)
    p.add_argument("--algo", choices=STREAM_ALGOS, required=True)
    p.add_argument("--dmin-lb", type=float, default=None)
    p.add_argument("--dmax-ub", type=float, default=None)
    p.add_argument("--shuffle-seed", type=int, default=None)
    p.add_argument("--verify", action="store_true")
    p.add_argument("--validate", action="store_true")
    p.add_argument("--timing", action="store_true")
    p.set_defaults(func=cmd_stream)

    p = sub.add_parser("distributed", help="two-round composable-coreset protocol")
    _common(p)
    p.add_argument("--sites", type=int, default=2)
    p.add_argument("--partition", default="round-robin", help="round-robin | by-hash | file:<path>")
    p.add_argument("--final", choices=FINAL_SOLVERS, default="brute")
    p.add_argument("--verify", action="store_true")
    p.add_argument("--timing", action="store_true")
    p.set_defaults(func=cmd_distributed)

    p = sub.add_parser("coreset", help="print the per-group GMM coreset")
    _common(p, randomized=False)
    p.set_defaults(func=cmd_coreset)

    p = sub.add_parser("verify", help="check a given selection against the exact optimum")
    p.add_argument("data")
    p.add_argument("--format", choices=("auto", "csv", "matrix"), default="auto")
    p.add_argument("--k")
    p.add_argument("--ids", required=True, help="comma-separated point ids")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gen", help="write a synthetic dataset")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--matrix", action="store_true", help="random shortest-path metric instead of points")
    p.add_argument("--clusters", type=int, default=3)
    p.add_argument("--spread", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="compare several offline algorithms on one dataset")
    _common(p)
    p.add_argument("--algos", default="brute,greedy-flow,lp2,lp6")
    p.add_argument("--search", choices=("scan", "binary"), default="scan")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--timing", action="store_true")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    func: Callable[[argparse.Namespace], int] = args.func
    try:
        return func(args)
    except (FairDivError, ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"fairdiv: error: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
