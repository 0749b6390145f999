import collections
import csv
import io
import logging
import math
import numpy as np
from concurrent.futures import ThreadPoolExecutor
from scipy.stats import rankdata
from .AtomicFile import atomic_write
from .CalibError import DivergedSimulationError, EmptyInputError, MissingRecordingError
from .CalibrationLoop import Objective
from .Control import holdout_suite
from .ParameterSpace import ParameterBounds, ParameterVector, normalized_distance, relative_error
from .recommenders.History import RunHistory

from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

logger = logging.getLogger(__name__)

CATASTROPHIC_ERROR = 100.0
"""Recommendations whose starting error exceeds this are left out of confidence precision"""

CONFIDENCE_THRESHOLDS = (0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95)

HOLDOUT_COLUMNS = ["seed", "holdout", "repeat", "error", "method", "setting", "flags"]

HoldoutEntry = collections.namedtuple('HoldoutEntry', 'holdout repeat error flags')
"""
NamedTuple of one holdout datapoint

**Properties:**
- `holdout` - `H1` ... `H4`
- `repeat` - 1-based repeat
- `error` - MAE, `inf` if the simulation diverged, None if the recording is missing
- `flags` - Tuple of notes (`missing`, `diverged`, `lag_at_window_edge`, ...)
"""

class HoldoutReport(collections.namedtuple('HoldoutReport', 'method seed setting entries')):
    """
    Holdout errors of one calibrated parameter vector

    **Properties:**
    - `method` - Recommender name
    - `seed` - Training seed
    - `setting` - Setting name
    - `entries` - List of `HoldoutEntry`, holdout-major
    """
    __slots__ = ()

    @property
    def gaps(self) -> List[Tuple[str, int]]:
        """(holdout, repeat) pairs without a recording"""
        return [(e.holdout, e.repeat) for e in self.entries if e.error is None]

    @property
    def complete(self) -> bool:
        return not self.gaps

    @property
    def mean(self) -> Optional[float]:
        """Mean over the present entries (None if none)"""
        values = [e.error for e in self.entries if e.error is not None]
        return float(np.mean(values)) if values else None

    def per_holdout(self) -> "collections.OrderedDict[str, float]":
        """Holdout -> mean over its present repeats"""
        out = collections.OrderedDict()
        for e in self.entries:
            out.setdefault(e.holdout, [])
            if e.error is not None:
                out[e.holdout].append(e.error)
        return collections.OrderedDict((h, float(np.mean(v)) if v else None) for h, v in out.items())

ConfidenceRecord = collections.namedtuple('ConfidenceRecord', 'confidence error_before error_after success')
"""
NamedTuple of one recommendation outcome

**Properties:**
- `confidence` - Confidence the recommender reported, in [0, 1]
- `error_before` - Training error at the point the recommendation started from
- `error_after` - Training error of the recommended point
- `success` - `error_after < error_before`
"""

SeedAggregate = collections.namedtuple('SeedAggregate', 'mean std best n')
"""
NamedTuple returned by `aggregate_seeds`

**Properties:**
- `mean` - Arithmetic mean
- `std` - Population standard deviation
- `best` - Minimum
- `n` - Number of seeds
"""

RecoveryReport = collections.namedtuple('RecoveryReport', 'distances best_seed best_seed_errors mean_errors mean')
"""
NamedTuple returned by `recovery_report`

**Properties:**
- `distances` - Seed -> per-iteration normalized distance of the best-so-far parameters to the ground truth
- `best_seed` - Seed with the lowest best training error
- `best_seed_errors` - `RelativeErrorReport` of that seed's best parameters
- `mean_errors` - Parameter -> relative error (%) averaged over the seeds
- `mean` - Mean of `mean_errors`
"""

AmplitudeReport = collections.namedtuple('AmplitudeReport', 'rows collapsed')
"""
NamedTuple returned by `amplitude_report`

**Properties:**
- `rows` - List of (seed, iteration, channel name, amplitude)
- `collapsed` - Seeds whose final control sits at the minimum amplitude on some channel
"""

def make_confidence_record(confidence:float, error_before:float, error_after:float) -> ConfidenceRecord:
    return ConfidenceRecord(float(confidence), float(error_before), float(error_after), bool(error_after < error_before))

def evaluate_holdout(params:ParameterVector, setting:str, bounds:ParameterBounds, source, repeats:int=3, method:str="", seed:int=0,
                     duration:float=10.0, settle:float=2.0, skip:float=5.0, max_lag:float=1.0, metric:str=None,
                     normalize_arclength:bool=None, space:str="px", workers:int=1) -> HoldoutReport:
    """
    Simulate `params` under H1-H4 and score every repeat's observation

    Alignment is recomputed per recording. A missing recording becomes an entry with error None and flag `missing`.

    Parameters:
        params (ParameterVector): Calibrated parameters (tuned coordinates)
        setting (str): Setting name
        bounds (ParameterBounds): Full bounds of the setting
        source: Observation source (`observe(control, repeat)`)
        repeats (int): Repeats R per holdout

    Returns:
        (HoldoutReport): 4 x R entries
    """
    objective = Objective(setting, bounds, source, duration, settle, skip, max_lag, metric, normalize_arclength, space=space)

    def run(profile):
        try:
            sim = objective.simulate(params, profile)
        except DivergedSimulationError as e:
            logger.warning("Holdout %s diverged: %s", profile.name, e)
            sim = None
        entries = []
        for r in range(1, repeats + 1):
            try:
                real = source.observe(profile, r - 1)
            except MissingRecordingError as e:
                logger.warning("%s", e)
                entries.append(HoldoutEntry(profile.name, r, None, ("missing",)))
                continue
            if sim is None:
                entries.append(HoldoutEntry(profile.name, r, math.inf, ("diverged",)))
                continue
            outcome = objective.score(sim, real)
            entries.append(HoldoutEntry(profile.name, r, outcome.error, tuple(outcome.flags)))
        return entries

    suite = holdout_suite(setting)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, suite))
    else:
        results = [run(p) for p in suite]
    report = HoldoutReport(method, seed, setting, [e for entries in results for e in entries])
    if not report.complete:
        logger.warning("Holdout report for %s seed %s has gaps: %s", method, seed, report.gaps)
    return report

def aggregate_seeds(values:Sequence[float]) -> SeedAggregate:
    """
    Mean, population standard deviation and best of per-seed values

    Raises:
        EmptyInputError: No values
    """
    values = np.asarray(list(values), dtype=float)
    if values.size == 0:
        raise EmptyInputError("aggregate_seeds needs at least one seed")
    return SeedAggregate(float(values.mean()), float(values.std()), float(values.min()), int(values.size))

def rank_table(means:Mapping[str, Mapping[str, float]]) -> "collections.OrderedDict[str, collections.OrderedDict[str, float]]":
    """
    Rank methods within every setting, ascending by mean, ties sharing the average position

    Methods without a finite mean in every setting are left out with a warning.

    Parameters:
        means (mapping): Setting -> method -> mean holdout error

    Returns:
        (OrderedDict): Setting -> method -> rank
    """
    methods = []
    for per_method in means.values():
        methods += [m for m in per_method if m not in methods]
    complete = []
    for m in methods:
        missing = [s for s, per_method in means.items() if per_method.get(m) is None or not math.isfinite(per_method[m])]
        if missing:
            logger.warning("Method '%s' has no mean in %s; excluded from ranking", m, missing)
        else:
            complete.append(m)
    ranks = collections.OrderedDict()
    for setting, per_method in means.items():
        r = rankdata([per_method[m] for m in complete], method="average")
        ranks[setting] = collections.OrderedDict(zip(complete, (float(v) for v in r)))
    return ranks

def average_rank(means:Mapping[str, Mapping[str, float]]) -> "collections.OrderedDict[str, float]":
    """
    Per-method rank averaged over settings (exact; round for display)

    Parameters:
        means (mapping): Setting -> method -> mean holdout error
    """
    ranks = rank_table(means)
    if not ranks:
        return collections.OrderedDict()
    methods = list(next(iter(ranks.values())).keys())
    return collections.OrderedDict((m, float(np.mean([r[m] for r in ranks.values()]))) for m in methods)

def confidence_precision(records:Iterable[ConfidenceRecord], tau:float, catastrophic:float=CATASTROPHIC_ERROR) -> Tuple[Optional[float], int]:
    """
    Success rate among recommendations with confidence >= tau

    Parameters:
        records (iterable): Outcomes
        tau (float): Threshold
        catastrophic (float): Records starting above this error are excluded (None keeps all)

    Returns:
        (tuple): (precision or None when n = 0, n)
    """
    kept = [r for r in records if r.confidence >= tau and (catastrophic is None or not r.error_before > catastrophic)]
    if not kept:
        return None, 0
    return sum(1 for r in kept if r.success) / len(kept), len(kept)

def precision_curve(records:Iterable[ConfidenceRecord], taus:Sequence[float]=CONFIDENCE_THRESHOLDS,
                    catastrophic:float=CATASTROPHIC_ERROR) -> List[Tuple[float, Optional[float], int]]:
    """(tau, precision, n) for every threshold"""
    records = list(records)
    return [(t,) + confidence_precision(records, t, catastrophic) for t in taus]

def confidence_records(history:RunHistory) -> List[ConfidenceRecord]:
    """
    Pair every recommended iteration with the iteration it started from

    Iteration k >= 2 carries the confidence of the recommendation that produced it; its error is `error_after`
    and the error of iteration k-1 is `error_before`. Iterations without a confidence are skipped.
    """
    out = []
    for before, after in zip(history, list(history)[1:]):
        if after.confidence is None:
            continue
        out.append(make_confidence_record(after.confidence, before.error, after.error))
    return out

def best_so_far_params(history:RunHistory) -> List[ParameterVector]:
    """Parameters of the running best (strict improvement) at every iteration"""
    out = []
    best = None
    for r in history:
        if best is None or r.error < best.error:
            best = r
        out.append(best.params)
    return out

def recovery_report(histories:Mapping, ground_truth:Mapping, bounds:ParameterBounds) -> RecoveryReport:
    """
    Parameter recovery of sim2sim runs

    Parameters:
        histories (mapping): Seed -> `RunHistory`
        ground_truth (mapping): Seed -> ground-truth `ParameterVector`
        bounds (ParameterBounds): Tuned coordinates

    Returns:
        (RecoveryReport): Distance curves, best-seed and cross-seed relative errors
    """
    if not histories:
        raise EmptyInputError("recovery_report needs at least one run")
    distances = collections.OrderedDict()
    finals = collections.OrderedDict()
    for seed, history in histories.items():
        gt = ground_truth[seed]
        path = best_so_far_params(history)
        distances[seed] = [normalized_distance(p, gt, bounds) for p in path]
        if path:
            finals[seed] = (min(history.errors), relative_error(path[-1], gt))
    if not finals:
        raise EmptyInputError("recovery_report got only empty histories")
    best_seed = min(finals, key=lambda s: finals[s][0])
    names = bounds.names
    mean_errors = collections.OrderedDict()
    for name in names:
        values = [report.per_parameter[name] for _, report in finals.values() if report.per_parameter[name] is not None]
        mean_errors[name] = float(np.mean(values)) if values else None
    defined = [v for v in mean_errors.values() if v is not None]
    return RecoveryReport(distances, best_seed, finals[best_seed][1], mean_errors, float(np.mean(defined)) if defined else None)

def amplitude_report(histories:Mapping) -> AmplitudeReport:
    """
    Control amplitudes per iteration and seed, flagging runs whose final control collapsed to a minimum bound

    Parameters:
        histories (mapping): Seed -> `RunHistory`
    """
    rows = []
    collapsed = []
    for seed, history in histories.items():
        names = history.cbounds.names
        for r in history:
            rows += [(seed, r.iteration, n, float(a)) for n, a in zip(names, r.control.amplitudes)]
        if len(history):
            final = history[len(history) - 1].control.amplitudes
            if np.any(np.isclose(final, history.cbounds.lower)):
                collapsed.append(seed)
    if collapsed:
        logger.warning("Control collapsed to the minimum amplitude for seeds %s", collapsed)
    return AmplitudeReport(rows, collapsed)

def holdout_breakdown(reports:Iterable[HoldoutReport]) -> "collections.OrderedDict[str, collections.OrderedDict[str, float]]":
    """Method -> holdout -> mean over seeds and repeats"""
    pooled = collections.OrderedDict()
    for report in reports:
        per_method = pooled.setdefault(report.method, collections.OrderedDict())
        for e in report.entries:
            per_method.setdefault(e.holdout, [])
            if e.error is not None:
                per_method[e.holdout].append(e.error)
    return collections.OrderedDict(
        (m, collections.OrderedDict((h, float(np.mean(v)) if v else None) for h, v in per_holdout.items()))
        for m, per_holdout in pooled.items())

def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)

def _write(path:str, header:List[str], rows:Iterable[Sequence]):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    atomic_write(path, buf.getvalue())

def write_holdout_csv(reports:Iterable[HoldoutReport], path:str):
    """Long format, one holdout datapoint per row"""
    _write(path, HOLDOUT_COLUMNS, ((r.seed, e.holdout, e.repeat, e.error, r.method, r.setting, ";".join(e.flags))
                                   for r in reports for e in r.entries))

def read_holdout_csv(path:str) -> List[HoldoutReport]:
    """Reports grouped by (method, seed, setting) from a file written by `write_holdout_csv`"""
    grouped = collections.OrderedDict()
    with open(path, "r", newline="") as f:
        for row in csv.DictReader(f):
            key = (row.get("method", ""), int(row["seed"]), row.get("setting", ""))
            error = float(row["error"]) if row["error"] else None
            flags = tuple(x for x in (row.get("flags") or "").split(";") if x)
            grouped.setdefault(key, []).append(HoldoutEntry(row["holdout"], int(row["repeat"]), error, flags))
    return [HoldoutReport(m, s, st, entries) for (m, s, st), entries in grouped.items()]

def seed_means(reports:Iterable[HoldoutReport]) -> "collections.OrderedDict[Tuple[str, str], List[float]]":
    """(setting, method) -> per-seed holdout means"""
    out = collections.OrderedDict()
    for r in reports:
        if r.mean is not None:
            out.setdefault((r.setting, r.method), []).append(r.mean)
    return out

def write_aggregate_csv(aggregates:Mapping[Tuple[str, str], SeedAggregate], path:str):
    _write(path, ["setting", "method", "mean", "std", "best", "n"],
           ((s, m, a.mean, a.std, a.best, a.n) for (s, m), a in aggregates.items()))

def write_ranks_csv(means:Mapping[str, Mapping[str, float]], path:str):
    """One row per (setting, method) rank plus an `average` row per method"""
    ranks = rank_table(means)
    rows = [(s, m, means[s][m], r) for s, per_method in ranks.items() for m, r in per_method.items()]
    rows += [("average", m, None, r) for m, r in average_rank(means).items()]
    _write(path, ["setting", "method", "mean", "rank"], rows)

def write_recovery_csv(reports:Mapping[Tuple[str, str], RecoveryReport], path:str):
    """
    Long format per (setting, method): distance rows per (seed, iteration), then relative-error rows per reading and parameter
    """
    rows = []
    for (setting, method), report in reports.items():
        key = (setting, method)
        rows += [key + ("distance", seed, i + 1, "", d) for seed, ds in report.distances.items() for i, d in enumerate(ds)]
        rows += [key + ("best_seed_relative_error", report.best_seed, "", n, v) for n, v in report.best_seed_errors.per_parameter.items()]
        rows += [key + ("best_seed_relative_error", report.best_seed, "", "mean", report.best_seed_errors.mean)]
        rows += [key + ("mean_relative_error", "", "", n, v) for n, v in report.mean_errors.items()]
        rows += [key + ("mean_relative_error", "", "", "mean", report.mean)]
    _write(path, ["setting", "method", "quantity", "seed", "iteration", "parameter", "value"], rows)

def write_confidence_csv(records:Mapping[str, Iterable[ConfidenceRecord]], path:str, taus:Sequence[float]=CONFIDENCE_THRESHOLDS,
                         catastrophic:float=CATASTROPHIC_ERROR):
    """Precision-vs-threshold rows per method; empty precision where n = 0"""
    _write(path, ["method", "tau", "precision", "n"],
           ((m,) + row for m, rs in records.items() for row in precision_curve(rs, taus, catastrophic)))


def write_breakdown_csv(breakdown:Mapping[str, Mapping[str, float]], path:str):
    _write(path, ["method", "holdout", "mean"], ((m, h, v) for m, per in breakdown.items() for h, v in per.items()))

def write_amplitude_csv(reports:Mapping[Tuple[str, str], AmplitudeReport], path:str):
    _write(path, ["setting", "method", "seed", "iteration", "channel", "amplitude", "collapsed"],
           ((s, m) + row + (row[0] in r.collapsed,) for (s, m), r in reports.items() for row in r.rows))


def format_rank_summary(means:Mapping[str, Mapping[str, float]]) -> str:
    """Text table: one row per method, the mean per setting and the average rank (1 decimal)"""
    averages = average_rank(means)
    settings = list(means.keys())
    head = ["Method"] + settings + ["Avg. Rank"]
    rows = []
    for m, r in averages.items():
        rows.append([m] + ["{:.1f}".format(means[s][m]) for s in settings] + ["{:.1f}".format(r)])
    widths = [max([len(h)] + [len(row[i]) for row in rows]) for i, h in enumerate(head)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(head, widths))]
    lines += ["  ".join(c.ljust(w) for c, w in zip(row, widths)) for row in rows]
    return "\n".join(lines)
