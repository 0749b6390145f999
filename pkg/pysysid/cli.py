import argparse
import collections
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from .Ablations import Ablations
from .CalibError import CalibError, ConfigError, EmptyInputError
from .CalibrationLoop import CalibrationConfig, run_calibration
from .Control import control_bounds
from .Evaluation import (aggregate_seeds, amplitude_report, confidence_records, evaluate_holdout, format_rank_summary,
                         holdout_breakdown, read_holdout_csv, recovery_report, seed_means, write_aggregate_csv,
                         write_amplitude_csv, write_breakdown_csv, write_confidence_csv, write_holdout_csv,
                         write_ranks_csv, write_recovery_csv)
from .Experiment import ExperimentSpec, load_experiment, override
from .ParameterSpace import ParameterBounds, ParameterVector
from .Platforms import Platforms
from .RunDirectory import RunDirectory, read_run
from .recommenders import METHODS, VLMClient, make_recommender
from .recommenders.History import RunHistory
from .sim.Scenario import ReplaySource, ScenarioSource, ground_truth_scenario, physical_params

from typing import Dict, List, Sequence

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_FAILURE = 3

HOLDOUT_FILE = "holdout.csv"
REPORT_FILES = ("ranks.csv", "aggregate.csv", "holdout_breakdown.csv", "recovery.csv", "confidence.csv", "amplitudes.csv")

RunOutcome = collections.namedtuple('RunOutcome', 'method seed path error iteration partial failure')
"""
NamedTuple summarising one calibration run of `cmd_calibrate`

**Properties:**
- `method` - Registry name of the recommender
- `seed` - Run seed
- `path` - Run directory
- `error` - Best training error (`inf` if none)
- `iteration` - Iteration of the best error
- `partial` - The recommender became unavailable before the budget ran out
- `failure` - Message of an aborting error, None if the run completed
"""

def run_path(spec:ExperimentSpec, method:str, seed:int) -> str:
    return os.path.join(spec.output, method, "seed_{}".format(seed))

def _load_bounds(spec:ExperimentSpec) -> ParameterBounds:
    try:
        return ParameterBounds.load(spec.bounds_path, spec.platform)
    except (OSError, CalibError) as e:
        raise ConfigError("Cannot load bounds {}: {}".format(spec.bounds_path, e), field="bounds")

def _make_client(spec:ExperimentSpec) -> VLMClient:
    if spec.endpoint is None:
        return None
    e = spec.endpoint
    return VLMClient(e.url, e.model, e.timeout, e.retries, e.backoff, decoding=e.decoding)

def _replay_source(spec:ExperimentSpec) -> ReplaySource:
    return ReplaySource.load(spec.manifest, Platforms.FPS[spec.platform])

def _calibrate_one(spec:ExperimentSpec, bounds:ParameterBounds, method:str, seed:int, client, replay, force:bool) -> RunOutcome:
    path = run_path(spec, method, seed)
    sim = spec.simulation
    gt = None
    if replay is None:
        scenario = ground_truth_scenario(spec.platform, seed, bounds, sim.duration, sim.settle, noise=sim.observation_noise, space=sim.space)
        source, gt = scenario.source, scenario.gt
    else:
        source = replay
    tuned = bounds.select(Platforms.TUNED_KINDS[spec.platform])
    run_dir = RunDirectory(path, force)
    recommender = make_recommender(method, tuned, seed, spec.budget, spec.platform, client, spec.script,
                                   spec.endpoint.media_mode if spec.endpoint else "path")
    config = CalibrationConfig(spec.platform, bounds, recommender, source, seed=seed, budget=spec.budget, flags=spec.flag_mask,
                               run_dir=run_dir, duration=sim.duration, settle=sim.settle, skip=sim.skip, max_lag=sim.max_lag,
                               metric=sim.metric, normalize_arclength=sim.normalize_arclength, space=sim.space)
    logger.info("Calibrating %s seed %d with %s -> %s", spec.platform, seed, METHODS[method], path)
    result = run_calibration(config)
    run_dir.write_run({
        "setting": spec.platform,
        "mode": spec.mode,
        "method": method,
        "seed": seed,
        "budget": spec.budget,
        "flags": Ablations.names(spec.flag_mask),
        "bounds": bounds.to_dict(),
        "ground_truth": dict(gt.as_dict()) if gt is not None else None,
        "simulation": spec.to_dict()["simulation"],
        "result": {
            "params": dict(result.params.as_dict()),
            "control": result.control.to_dict(),
            "error": result.error if math.isfinite(result.error) else None,
            "iteration": result.iteration,
            "iterations": len(result.history),
            "evaluations": result.history[len(result.history) - 1].evaluations if len(result.history) else 0,
            "partial": result.partial,
        },
    })
    return RunOutcome(method, seed, path, result.error, result.iteration, result.partial, None)

def cmd_calibrate(spec:ExperimentSpec, force:bool=False) -> List[RunOutcome]:
    """
    One calibration run per (seed, method), fanned out over `spec.workers` threads

    Returns:
        (list[RunOutcome]): Outcomes in (method, seed) order
    """
    bounds = _load_bounds(spec)
    client = _make_client(spec)
    replay = _replay_source(spec) if spec.mode == "replay" else None
    jobs = [(m, s) for m in spec.methods for s in spec.seeds]
    for m, s in jobs:
        RunDirectory(run_path(spec, m, s), force)

    def run(job):
        method, seed = job
        try:
            return _calibrate_one(spec, bounds, method, seed, client, replay, True)
        except ConfigError:
            raise
        except CalibError as e:
            logger.error("Run %s seed %d aborted: %s", method, seed, e)
            return RunOutcome(method, seed, run_path(spec, method, seed), math.inf, None, False, str(e))

    try:
        if spec.workers > 1:
            with ThreadPoolExecutor(max_workers=spec.workers) as pool:
                return list(pool.map(run, jobs))
        return [run(j) for j in jobs]
    finally:
        if client is not None:
            client.close()

def _run_bounds(document:Dict):
    bounds = ParameterBounds.from_dict(document["bounds"])
    setting = document["setting"]
    return bounds, bounds.select(Platforms.TUNED_KINDS[setting]), control_bounds(setting, bounds)

def load_run(path:str):
    """
    (run.json document, full bounds, `RunHistory`) of a run directory

    Raises:
        ConfigError: No run.json or history.csv
    """
    document = read_run(path)
    bounds, tuned, cbounds = _run_bounds(document)
    history_path = os.path.join(path, "history.csv")
    if not os.path.exists(history_path):
        raise ConfigError("{} has no history.csv".format(path), field="runs")
    return document, bounds, RunHistory.load(history_path, tuned, cbounds)

def cmd_holdout(spec:ExperimentSpec, force:bool=False) -> str:
    """
    Evaluate the best iteration of every (method, seed) run under H1-H4 x R

    Returns:
        (str): Path of the written holdout.csv
    """
    out = os.path.join(spec.output, HOLDOUT_FILE)
    if os.path.exists(out) and not force:
        raise ConfigError("{} exists; use --force to overwrite".format(out), field="output")
    sim = spec.simulation
    replay = _replay_source(spec) if spec.mode == "replay" else None
    reports = []
    for method in spec.methods:
        for seed in spec.seeds:
            document, bounds, history = load_run(run_path(spec, method, seed))
            best = history.best()
            if replay is None:
                gt = document["ground_truth"]
                source = ScenarioSource(spec.platform, physical_params(bounds, gt), sim.duration, sim.settle,
                                        noise=sim.observation_noise, seed=seed, space=sim.space)
            else:
                source = replay
            logger.info("Holdout %s seed %d: iteration %d (training error %.4g)", method, seed, best.iteration, best.error)
            reports.append(evaluate_holdout(best.params, spec.platform, bounds, source, spec.repeats, method, seed,
                                            sim.duration, sim.settle, sim.skip, sim.max_lag, sim.metric,
                                            sim.normalize_arclength, sim.space, spec.workers))
    write_holdout_csv(reports, out)
    return out

def _find_runs(directory:str) -> List[str]:
    found = []
    for root, dirs, files in os.walk(directory):
        dirs.sort()
        if "run.json" in files and "history.csv" in files:
            found.append(root)
    return found

def cmd_report(dirs:Sequence[str], out:str=None, force:bool=False) -> Dict[str, str]:
    """
    Aggregate holdout results and run histories of experiment directories

    Writes ranks, per-seed aggregates, the per-holdout breakdown and, where run directories are present,
    recovery (sim2sim), confidence and amplitude tables. Prints the rank summary.

    Returns:
        (dict): Table name -> written path
    """
    reports = []
    for d in dirs:
        path = d if d.endswith(".csv") else os.path.join(d, HOLDOUT_FILE)
        if os.path.exists(path):
            reports += read_holdout_csv(path)
        else:
            logger.warning("No %s in %s", HOLDOUT_FILE, d)
    if not reports:
        raise EmptyInputError("No holdout results found in {}".format(list(dirs)))
    out = out or (dirs[0] if not dirs[0].endswith(".csv") else os.path.dirname(dirs[0]))
    targets = {name: os.path.join(out, name) for name in REPORT_FILES}
    existing = [p for p in targets.values() if os.path.exists(p)]
    if existing and not force:
        raise ConfigError("{} exist; use --force to overwrite".format(existing), field="output")

    aggregates = collections.OrderedDict((key, aggregate_seeds(values)) for key, values in seed_means(reports).items())
    means = collections.OrderedDict()
    for (setting, method), a in aggregates.items():
        means.setdefault(setting, collections.OrderedDict())[method] = a.mean
    write_aggregate_csv(aggregates, targets["aggregate.csv"])
    write_ranks_csv(means, targets["ranks.csv"])
    write_breakdown_csv(holdout_breakdown(reports), targets["holdout_breakdown.csv"])
    written = {k: targets[k] for k in ("aggregate.csv", "ranks.csv", "holdout_breakdown.csv")}

    histories = collections.OrderedDict()
    for d in dirs:
        if d.endswith(".csv"):
            continue
        for run in _find_runs(d):
            document, bounds, history = load_run(run)
            key = (document["setting"], document["method"])
            histories.setdefault(key, []).append((document, bounds, history))
    if histories:
        confidence = collections.OrderedDict()
        recovery = collections.OrderedDict()
        amplitudes = collections.OrderedDict()
        for (setting, method), runs in histories.items():
            confidence.setdefault(method, [])
            for _, _, h in runs:
                confidence[method] += confidence_records(h)
            amplitudes[(setting, method)] = amplitude_report(collections.OrderedDict((doc["seed"], h) for doc, _, h in runs))
            with_gt = [(doc, h) for doc, _, h in runs if doc.get("ground_truth") and len(h)]
            if with_gt:
                tuned = with_gt[0][1].bounds
                recovery[(setting, method)] = recovery_report(
                    collections.OrderedDict((doc["seed"], h) for doc, h in with_gt),
                    collections.OrderedDict((doc["seed"], ParameterVector(tuned, doc["ground_truth"])) for doc, h in with_gt),
                    tuned)
        write_confidence_csv(confidence, targets["confidence.csv"])
        write_amplitude_csv(amplitudes, targets["amplitudes.csv"])
        written["confidence.csv"] = targets["confidence.csv"]
        written["amplitudes.csv"] = targets["amplitudes.csv"]
        if recovery:
            write_recovery_csv(recovery, targets["recovery.csv"])
            written["recovery.csv"] = targets["recovery.csv"]

    print(format_rank_summary(means))
    return written

def _csv_list(value:str) -> List[str]:
    return [v.strip() for v in value.split(",") if v.strip()]

def _seed_list(value:str) -> List[int]:
    try:
        return [int(v) for v in _csv_list(value)]
    except ValueError:
        raise argparse.ArgumentTypeError("seeds must be comma-separated integers, got '{}'".format(value))

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pysysid", description="Calibrate simulator physics parameters against observed trajectories")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for progress, -vv for wire payloads")
    commands = parser.add_subparsers(dest="command", required=True)

    def experiment_options(p):
        p.add_argument("--spec", required=True, help="Experiment spec (YAML)")
        p.add_argument("--out", help="Output directory (overrides the spec)")
        p.add_argument("--seeds", type=_seed_list, help="Comma-separated seeds, e.g. 0,1,2")
        p.add_argument("--budget", type=int, help="Iterations per run")
        p.add_argument("--method", type=_csv_list, help="Comma-separated methods: {}".format(",".join(METHODS)))
        p.add_argument("--flags", type=_csv_list, help="Comma-separated ablations: {}".format(",".join(Ablations.NAMES)))
        p.add_argument("--force", action="store_true", help="Overwrite existing outputs")

    experiment_options(commands.add_parser("calibrate", help="Run calibrations"))
    experiment_options(commands.add_parser("holdout", help="Evaluate the best iteration of each run on H1-H4"))
    report = commands.add_parser("report", help="Aggregate holdout results and histories")
    report.add_argument("dirs", nargs="+", help="Experiment output directories (or holdout.csv files)")
    report.add_argument("--out", help="Directory for the report tables (default: the first input)")
    report.add_argument("--force", action="store_true", help="Overwrite existing tables")
    return parser

def _experiment(args) -> ExperimentSpec:
    spec = load_experiment(args.spec)
    return override(spec, seeds=args.seeds, budget=args.budget, methods=args.method, flags=args.flags, output=args.out)

def main(argv:Sequence[str]=None) -> int:
    """
    Entry point of the `pysysid` command

    Returns:
        (int): 0 success, 2 usage error, 3 run failure
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    logging.basicConfig(level=[logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)],
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "calibrate":
            outcomes = cmd_calibrate(_experiment(args), args.force)
            for o in outcomes:
                print("{:<12} seed {:<4} best error {:>10.4g} at iteration {}{}".format(
                    o.method, o.seed, o.error, o.iteration, " (partial)" if o.partial else " (failed)" if o.failure else ""))
            return EXIT_FAILURE if any(o.failure or o.partial for o in outcomes) else EXIT_OK
        if args.command == "holdout":
            print(cmd_holdout(_experiment(args), args.force))
            return EXIT_OK
        cmd_report(args.dirs, args.out, args.force)
        return EXIT_OK
    except (ConfigError, EmptyInputError) as e:
        logger.error("%s", e)
        print("pysysid: error: {}".format(e), file=sys.stderr)
        return EXIT_USAGE
    except CalibError as e:
        logger.error("%s", e)
        print("pysysid: run failed: {}".format(e), file=sys.stderr)
        return EXIT_FAILURE
