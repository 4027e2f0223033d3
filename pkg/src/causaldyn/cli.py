"""Command-line orchestrator.

Subcommands:

    generate simple    one dataset per (system, noise amplitude, confounder)
    generate coupled   grid over nodes, noise, confounders, lag, standardize
                       and driver mix
    generate climate   the 11-experiment recharge-oscillator suite
    baseline           score a dataset with a reference method
    evaluate           compare predictions against ground truth
    export-csv         dump trajectories as plot-ready CSV
    catalog            print the dynamical-system catalog as JSON

Every run is reproducible from (subcommand, flags, master seed): graph k of
a run uses seed splitmix64(master_seed XOR k), and trajectory-level streams
split further from there. Parallel workers only share completed files, so
results are independent of the worker count. The environment variable
CAUSALDYN_OUT provides the default output root.

Exit codes: 0 success, 2 partial (some graphs were skipped), 1 fatal.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import climate as climate_mod
from . import systems as dynsys
from .baselines import (
    BaselineConfig,
    lagged_correlation,
    random_scorer,
    reduce_nodes,
    var_granger,
)
from .coupling import GenerationConfig, simulate_system
from .dataio import (
    DatasetRecord,
    append_manifest,
    export_csv,
    iter_graph_dirs,
    load_dataset,
    save_dataset,
)
from .errors import AllDegenerate, CausalDynError
from .graphs import CausalGraph, latent_projection, observed_subgraph, summary_graph
from .metrics import ScoredGraph, score_prediction
from .rng import child_seed, spawn

DEFAULT_DELTAS = (0.0, 0.5, 1.0, 1.5, 2.0)
DEFAULT_NODES = (3, 5, 10)
ALT_NODES = (3, 5, 8)
DEFAULT_MIXES = ("1:0", "1:1")


def _default_out() -> str:
    return os.environ.get("CAUSALDYN_OUT", "causaldyn-data")


def _parse_floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v != ""]


def _parse_ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v != ""]


def _parse_ratio(text: str) -> tuple[float, float]:
    a, b = text.split(":")
    return float(a), float(b)


def _tristate(text: str) -> list[bool]:
    table = {"off": [False], "on": [True], "both": [False, True]}
    try:
        return table[text]
    except KeyError:
        raise argparse.ArgumentTypeError("expected one of off/on/both") from None


# --- generation jobs ----------------------------------------------------------

def _simple_job(job: dict) -> dict:
    """Generate one simple-tier dataset: a single 3-D system, each coordinate
    recorded as one scalar node."""
    system = dynsys.get_system(job["system"])
    rng = spawn(job["seed"], 0)
    R, T = job["trajectories"], job["timesteps"]
    data = dynsys.solve_system(system, T, R, rng, delta=job["delta"])
    values = np.moveaxis(data, 0, 1)[:, :, :, None]  # (R, T, 3 nodes, 1)
    graph = CausalGraph(n=3, adj=dynsys.adjacency_from_jacobian(system),
                        hidden={0} if job["confounders"] else set())
    record = DatasetRecord(
        graph_id=job["graph_id"], tier="simple", graph=graph, values=values,
        meta={"seed": job["seed"], "system": system.name, "delta": job["delta"],
              "confounders": job["confounders"],
              "cell": f"{system.name}|d{job['delta']:g}|c{int(job['confounders'])}"},
    )
    return save_dataset(record, job["out"], force=job["force"],
                        update_manifest=False)


def _coupled_job(job: dict) -> dict:
    cfg = GenerationConfig.from_dict(job["config"])
    values, params = simulate_system(cfg)
    cell = (f"n{cfg.num_nodes}|d{cfg.delta:g}|c{int(cfg.confounders)}"
            f"|l{cfg.time_lag}|s{int(cfg.standardize)}"
            f"|m{cfg.init_ratios[0]:g}:{cfg.init_ratios[1]:g}")
    record = DatasetRecord(
        graph_id=job["graph_id"], tier="coupled", graph=params.graph,
        values=values,
        meta={"seed": cfg.seed, "config": cfg.to_dict(), "cell": cell,
              "driver_labels": params.driver_labels},
    )
    return save_dataset(record, job["out"], force=job["force"],
                        update_manifest=False)


def _climate_job(job: dict) -> dict:
    params = (climate_mod.load_params(job["params_file"])
              if job["params_file"] else climate_mod.default_params())
    exp = climate_mod.CouplingExperiment(job["experiment"],
                                         tuple(job["decoupled"]))
    R, T = job["trajectories"], job["timesteps"]
    values = np.empty((R, T, 10, 1))
    for r in range(R):
        rng = spawn(job["seed"], 1 + r)
        values[r, :, :, 0] = climate_mod.xro_integrate(
            params, exp, T, rng, burn_in=job["burn_in"])
    graph = climate_mod.ground_truth_graph(params, exp)
    record = DatasetRecord(
        graph_id=job["graph_id"], tier="climate", graph=graph, values=values,
        meta={"seed": job["seed"], "experiment": exp.name,
              "decoupled_modes": list(exp.decoupled_modes),
              "cell": exp.name},
    )
    return save_dataset(record, job["out"], force=job["force"],
                        update_manifest=False)


_JOB_RUNNERS = {"simple": _simple_job, "coupled": _coupled_job,
                "climate": _climate_job}


def _run_job(job: dict):
    """Worker entry point: returns (job_id, entry, error_message)."""
    try:
        entry = _JOB_RUNNERS[job["kind"]](job)
        return job["graph_id"], entry, None
    except CausalDynError as exc:
        return job["graph_id"], None, f"{type(exc).__name__}: {exc}"


def _execute_jobs(jobs: list[dict], workers: int, out: str) -> int:
    """Run generation jobs and append manifest entries in job order.

    Workers only write their own graph directories; the manifest is written
    here, by this single coordinator, so results are independent of the
    worker count. Returns the process exit code.
    """
    for job in jobs:
        job["out"] = out
    if workers <= 1:
        results = [_run_job(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_job, jobs))
    skipped = 0
    for graph_id, entry, err in results:
        if err is not None:
            skipped += 1
            print(f"[skip] {graph_id}: {err}", file=sys.stderr)
        else:
            append_manifest(out, entry)
    print(f"generated {len(jobs) - skipped}/{len(jobs)} graphs under {out}")
    if skipped:
        print(f"skipped {skipped} graphs", file=sys.stderr)
        return 2
    return 0


def cmd_generate(args) -> int:
    out = args.out
    Path(out).mkdir(parents=True, exist_ok=True)
    jobs: list[dict] = []
    common = {"trajectories": args.trajectories, "force": args.force}

    if args.tier == "simple":
        systems = (args.systems.split(",") if args.systems
                   else [s.name for s in dynsys.catalog()])
        deltas = _parse_floats(args.deltas) if args.deltas else list(DEFAULT_DELTAS)
        confs = _tristate(args.confounders)
        idx = 0
        for name in systems:
            sys_name = dynsys.get_system(name).name
            for delta in deltas:
                for conf in confs:
                    jobs.append({
                        "kind": "simple",
                        "graph_id": f"{sys_name.lower()}_d{delta:g}_c{int(conf)}",
                        "seed": child_seed(args.seed, idx),
                        "system": sys_name, "delta": delta, "confounders": conf,
                        "timesteps": args.timesteps, **common,
                    })
                    idx += 1

    elif args.tier == "coupled":
        nodes = _parse_ints(args.nodes) if args.nodes else list(
            ALT_NODES if args.alt_nodes else DEFAULT_NODES)
        deltas = _parse_floats(args.delta) if args.delta else list(DEFAULT_DELTAS)
        confs = _tristate(args.confounders)
        lags = _parse_ints(args.time_lag) if args.time_lag else [0, 1]
        stds = _tristate(args.standardize)
        mixes = (args.init_ratios.split(",") if args.init_ratios
                 else list(DEFAULT_MIXES))
        idx = 0
        for n in nodes:
            for delta in deltas:
                for conf in confs:
                    for lag in lags:
                        for std in stds:
                            for mix in mixes:
                                cfg = GenerationConfig(
                                    num_nodes=n, delta=delta, confounders=conf,
                                    time_lag=lag, standardize=std,
                                    init_ratios=_parse_ratio(mix),
                                    system_name=args.system,
                                    num_timesteps=args.timesteps,
                                    num_trajectories=args.trajectories,
                                    p_t=args.p_t, p_zero=args.p_zero, r=args.r,
                                    seed=child_seed(args.seed, idx),
                                )
                                jobs.append({
                                    "kind": "coupled",
                                    "graph_id": f"coupled_{idx:05d}",
                                    "config": cfg.to_dict(), **common,
                                })
                                idx += 1

    else:  # climate
        suite = climate_mod.experiment_suite()
        for idx, exp in enumerate(suite):
            jobs.append({
                "kind": "climate",
                "graph_id": f"climate_{exp.name}",
                "seed": child_seed(args.seed, idx),
                "experiment": exp.name,
                "decoupled": list(exp.decoupled_modes),
                "timesteps": args.timesteps,
                "burn_in": args.burn_in,
                "params_file": args.params, **common,
            })

    return _execute_jobs(jobs, args.workers, out)


# --- baselines ----------------------------------------------------------------

_METHODS = ("laggedcorr", "vargranger", "random")


def cmd_baseline(args) -> int:
    data_root = Path(args.data)
    pred_root = data_root / "predictions" / args.method
    cfg = BaselineConfig(tau_max=args.tau_max, ridge=args.ridge)
    n_files = 0
    failures = 0
    for gidx, (entry, gdir) in enumerate(iter_graph_dirs(data_root)):
        record = load_dataset(gdir)
        out_dir = pred_root / record.tier / record.graph_id
        out_dir.mkdir(parents=True, exist_ok=True)
        # hidden series are unobserved: scorers only ever see observed nodes
        observed = np.asarray(
            [i for i in range(record.graph.n) if i not in record.graph.hidden])
        R = record.values.shape[0]
        for r in range(R):
            X = reduce_nodes(record.values[r])[:, observed]
            try:
                if args.method == "laggedcorr":
                    scored = lagged_correlation(X, cfg)
                elif args.method == "vargranger":
                    scored = var_granger(X, cfg)
                else:
                    scored = random_scorer(X.shape[1],
                                           spawn(args.seed, gidx, r))
            except CausalDynError as exc:
                failures += 1
                print(f"[skip] {record.graph_id} trajectory {r}: "
                      f"{type(exc).__name__}: {exc}", file=sys.stderr)
                continue
            blob = scored.to_dict()
            blob["observed_nodes"] = observed.tolist()
            (out_dir / f"traj_{r:03d}.json").write_text(json.dumps(blob))
            n_files += 1
    print(f"wrote {n_files} prediction files under {pred_root}")
    return 2 if failures else 0


# --- evaluation ----------------------------------------------------------------

def _resolve_truth(record: DatasetRecord, include_diagonal: str,
                   latent: bool):
    """Ground-truth matrix, observed-node index and pair universe per tier."""
    graph = record.graph
    if include_diagonal == "auto":
        diag = record.tier == "simple"
    else:
        diag = include_diagonal == "true"
    if graph.hidden:
        if latent:
            sub, keep = latent_projection(graph)
        else:
            sub, keep = observed_subgraph(graph)
        truth = summary_graph(sub).adj
    else:
        keep = np.arange(graph.n)
        truth = summary_graph(graph).adj
    return truth, keep, diag


def cmd_evaluate(args) -> int:
    data_root = Path(args.data)
    pred_root = Path(args.predictions) if args.predictions else (
        data_root / "predictions" / args.method)
    out_dir = Path(args.report_out) if args.report_out else (
        data_root / "reports" / args.method)
    out_dir.mkdir(parents=True, exist_ok=True)

    rows = []
    degenerate_graphs = 0
    for entry, gdir in iter_graph_dirs(data_root):
        record = load_dataset(gdir)
        pdir = pred_root / record.tier / record.graph_id
        if not pdir.is_dir():
            continue
        truth, keep, diag = _resolve_truth(record, args.include_diagonal,
                                           args.latent_projection)
        preds = []
        for path in sorted(pdir.glob("traj_*.json")):
            scored = ScoredGraph.from_dict(json.loads(path.read_text()))
            if scored.n == truth.shape[0]:
                preds.append(scored)  # already on observed nodes
            elif scored.n == record.graph.n:
                preds.append(ScoredGraph(scores=scored.scores[np.ix_(keep, keep)]))
            else:
                raise CausalDynError(
                    f"{path}: prediction size {scored.n} matches neither the "
                    f"observed ({truth.shape[0]}) nor full ({record.graph.n}) "
                    f"node count")
        if not preds:
            continue
        try:
            report = score_prediction(preds, truth, include_diagonal=diag)
        except AllDegenerate as exc:
            degenerate_graphs += 1
            (out_dir / f"{record.graph_id}.json").write_text(json.dumps(
                {"graph_id": record.graph_id, "error": str(exc)}, indent=2))
            continue
        blob = {"graph_id": record.graph_id, "tier": record.tier,
                "cell": record.meta.get("cell", record.tier),
                **report.to_dict()}
        (out_dir / f"{record.graph_id}.json").write_text(
            json.dumps(blob, indent=2, sort_keys=True))
        rows.append(blob)

    cells: dict[str, dict] = {}
    for row in rows:
        cell = cells.setdefault(row["cell"], {"auroc": [], "auprc": [], "n": 0})
        cell["auroc"].append(row["auroc_mean"])
        cell["auprc"].append(row["auprc_mean"])
        cell["n"] += 1
    aggregate = {
        name: {
            "auroc_mean": float(np.mean(c["auroc"])),
            "auprc_mean": float(np.mean(c["auprc"])),
            "n_graphs": c["n"],
        }
        for name, c in sorted(cells.items())
    }
    (out_dir / "aggregate.json").write_text(
        json.dumps(aggregate, indent=2, sort_keys=True))
    lines = ["cell,auroc_mean,auprc_mean,n_graphs"]
    for name, c in aggregate.items():
        lines.append(f"{name},{c['auroc_mean']:.6f},{c['auprc_mean']:.6f},"
                     f"{c['n_graphs']}")
    (out_dir / "aggregate.csv").write_text("\n".join(lines) + "\n")
    print(f"evaluated {len(rows)} graphs "
          f"({degenerate_graphs} degenerate) -> {out_dir}")
    return 0


def cmd_export_csv(args) -> int:
    data_root = Path(args.data)
    out_dir = Path(args.csv_out) if args.csv_out else data_root / "csv"
    count = 0
    for entry, gdir in iter_graph_dirs(data_root):
        if args.graph_id and entry["graph_id"] != args.graph_id:
            continue
        record = load_dataset(gdir)
        export_csv(record, out_dir / record.tier)
        count += 1
    print(f"exported CSV for {count} graphs -> {out_dir}")
    return 0 if count else 1


def cmd_catalog(args) -> int:
    print(json.dumps(dynsys.catalog_json(), indent=2))
    return 0


# --- argument parsing -----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="causaldyn",
        description="Generate, score and evaluate causal-discovery benchmarks "
                    "on coupled dynamical systems.")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="generate a dataset tier")
    gen_sub = gen.add_subparsers(dest="tier", required=True)

    def add_common(p):
        p.add_argument("--seed", type=int, default=0, help="master seed")
        p.add_argument("--out", default=_default_out(),
                       help="output root (default: $CAUSALDYN_OUT)")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--trajectories", type=int, default=10)
        p.add_argument("--timesteps", type=int, default=1000)
        p.add_argument("--force", action="store_true",
                       help="overwrite existing graph directories")

    p_simple = gen_sub.add_parser("simple", help="single 3-D systems")
    add_common(p_simple)
    p_simple.add_argument("--systems", help="comma list (default: full catalog)")
    p_simple.add_argument("--deltas", help="comma list of noise amplitudes "
                          "(default: 0,0.5,1,1.5,2)")
    p_simple.add_argument("--confounders", default="off",
                          help="off/on/both (default off; 'both' doubles the grid)")

    p_coupled = gen_sub.add_parser("coupled", help="coupled causal models")
    add_common(p_coupled)
    p_coupled.add_argument("--nodes", help="comma list (default: 3,5,10)")
    p_coupled.add_argument("--alt-nodes", action="store_true",
                           help="use the alternative 3,5,8 node preset")
    p_coupled.add_argument("--delta", help="comma list (default: 0,0.5,1,1.5,2)")
    p_coupled.add_argument("--confounders", default="both", help="off/on/both")
    p_coupled.add_argument("--time-lag", dest="time_lag",
                           help="comma list of lags (default: 0,1)")
    p_coupled.add_argument("--standardize", default="both", help="off/on/both")
    p_coupled.add_argument("--init-ratios", dest="init_ratios",
                           help="comma list of a:b driver mixes (default: 1:0,1:1)")
    p_coupled.add_argument("--system", default="random",
                           help="driver system name or 'random'")
    p_coupled.add_argument("--p-t", dest="p_t", type=float, default=0.1)
    p_coupled.add_argument("--p-zero", dest="p_zero", type=float, default=0.2)
    p_coupled.add_argument("--r", type=float, default=0.5,
                           help="redirection probability")

    p_climate = gen_sub.add_parser("climate", help="recharge-oscillator suite")
    add_common(p_climate)
    p_climate.set_defaults(timesteps=1000)
    p_climate.add_argument("--params", help="JSON parameter file (default: shipped)")
    p_climate.add_argument("--burn-in", dest="burn_in", type=int, default=120,
                           help="discarded spin-up months")

    base = sub.add_parser("baseline", help="run a reference scorer")
    base.add_argument("--data", default=_default_out())
    base.add_argument("--method", choices=_METHODS, required=True)
    base.add_argument("--seed", type=int, default=0)
    base.add_argument("--tau-max", dest="tau_max", type=int, default=1)
    base.add_argument("--ridge", type=float, default=1e-6)

    ev = sub.add_parser("evaluate", help="score predictions against ground truth")
    ev.add_argument("--data", default=_default_out())
    ev.add_argument("--method", default="random",
                    help="method name used to locate predictions")
    ev.add_argument("--predictions", help="explicit predictions directory")
    ev.add_argument("--report-out", dest="report_out")
    ev.add_argument("--include-diagonal", dest="include_diagonal",
                    choices=("auto", "true", "false"), default="auto",
                    help="pair universe (auto: diagonal for the simple tier only)")
    ev.add_argument("--latent-projection", dest="latent_projection",
                    action="store_true",
                    help="project hidden nodes instead of dropping them")

    ex = sub.add_parser("export-csv", help="dump trajectories as CSV")
    ex.add_argument("--data", default=_default_out())
    ex.add_argument("--graph-id", dest="graph_id")
    ex.add_argument("--out", dest="csv_out")

    sub.add_parser("catalog", help="print the system catalog as JSON")
    return parser


_COMMANDS = {
    "generate": cmd_generate,
    "baseline": cmd_baseline,
    "evaluate": cmd_evaluate,
    "export-csv": cmd_export_csv,
    "catalog": cmd_catalog,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except CausalDynError as exc:
        print(f"fatal: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
