import collections
import dataclasses
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from .Ablations import Ablations, RequestFlags
from .Alignment import compare
from .CalibError import (DivergedSimulationError, InsufficientOverlapError, RecommenderUnavailableError,
                         ResponseParseError)
from .Control import ControlBounds, ControlProfile, clamp_control, control_bounds, training_profile
from .ParameterSpace import ParameterBounds, ParameterVector, clamp, sample_uniform
from .Platforms import Platforms
from .RunDirectory import RunDirectory
from .recommenders.History import IterationRecord, RunHistory
from .recommenders.Recommender import Evaluation, Recommender, RecommendationRequest, RecommendationResponse
from .sim.Scenario import physical_params, simulate

from typing import Callable, List, Optional

logger = logging.getLogger(__name__)

INIT_SEED_OFFSET = 10007
"""Added to the run seed when drawing theta0; the ground truth of a scenario uses the bare seed"""

EvaluationOutcome = collections.namedtuple('EvaluationOutcome', 'error lag flags sim real')
"""
NamedTuple returned by an objective

**Properties:**
- `error` - Training error, `inf` when the simulation diverged
- `lag` - Alignment lag in frames (None if not aligned)
- `flags` - Tuple of notes (`diverged`, `lag_at_window_edge`, ...)
- `sim` - Simulated `Trajectory` (None if diverged)
- `real` - Observed `Trajectory`
"""

CalibrationResult = collections.namedtuple('CalibrationResult', 'params control error iteration history partial')
"""
NamedTuple returned by `run_loop`

**Properties:**
- `params` - Best parameters seen (theta*)
- `control` - Control of that iteration
- `error` - Best error (`inf` if every iteration diverged)
- `iteration` - 1-based iteration of theta* (None for an empty history)
- `history` - The `RunHistory`
- `partial` - True if the run stopped early because the recommender became unavailable
"""

class Objective:
    """
    Training error of (params, control): simulate, observe, align, trim and score
    """
    def __init__(self, setting:str, bounds:ParameterBounds, source, duration:float=10.0, settle:float=2.0, skip:float=5.0,
                 max_lag:float=1.0, metric:str=None, normalize_arclength:bool=None, fps:float=None, space:str="px", repeat:int=0):
        """
        Parameters:
            setting (str): Setting name
            bounds (ParameterBounds): Full bounds (fixed and nominal values fill the non-tuned parameters)
            source: Observation source with `observe(control, repeat)` and `resolve(control)`
            duration (float): Simulated seconds
            settle (float): Discarded settle seconds
            skip (float): Transient seconds dropped before scoring
            max_lag (float): Alignment window half width in seconds
            metric (str): `tip` or `centerline` (default: the setting's)
            normalize_arclength (bool): Arc-length normalization (default: on for centerlines)
            fps (float): Frame rate (default: the setting's)
            space (str): `px` or `mm`
            repeat (int): Observation repeat used for training
        """
        self.setting = Platforms.check(setting)
        self.bounds = bounds
        self.source = source
        self.duration = duration
        self.settle = settle
        self.skip = skip
        self.max_lag = max_lag
        self.metric = metric or Platforms.METRIC[setting]
        self.normalize_arclength = self.metric == "centerline" if normalize_arclength is None else normalize_arclength
        self.fps = fps or Platforms.FPS[setting]
        self.space = space
        self.repeat = repeat

    def simulate(self, params, control:ControlProfile):
        return simulate(self.setting, physical_params(self.bounds, params), control, self.duration, self.fps, self.settle, self.space)

    def score(self, sim, real) -> EvaluationOutcome:
        try:
            report = compare(sim, real, self.metric, self.max_lag, self.skip, self.normalize_arclength)
        except InsufficientOverlapError as e:
            logger.warning("Scoring failed: %s", e)
            return EvaluationOutcome(math.inf, None, ("insufficient_overlap",), sim, real)
        error = report.mae if math.isfinite(report.mae) else math.inf
        return EvaluationOutcome(error, report.lag_frames, report.flags, sim, real)

    def __call__(self, params, control:ControlProfile) -> EvaluationOutcome:
        real = self.source.observe(control, self.repeat)
        try:
            sim = self.simulate(params, control)
        except DivergedSimulationError as e:
            logger.warning("%s", e)
            return EvaluationOutcome(math.inf, None, ("diverged",), None, real)
        return self.score(sim, real)


def _outcome(value) -> EvaluationOutcome:
    if isinstance(value, EvaluationOutcome):
        error = value.error
        if error is None or math.isnan(error):
            return value._replace(error=math.inf, flags=tuple(value.flags) + ("nan_error",))
        return value
    error = float(value)
    if math.isnan(error):
        return EvaluationOutcome(math.inf, None, ("nan_error",), None, None)
    return EvaluationOutcome(error, None, (), None, None)

def _evaluate_one(evaluate, params, control) -> EvaluationOutcome:
    try:
        return _outcome(evaluate(params, control))
    except DivergedSimulationError as e:
        logger.warning("%s", e)
        return EvaluationOutcome(math.inf, None, ("diverged",), None, None)

def run_loop(evaluate:Callable, recommender:Recommender, theta0:ParameterVector, control0:ControlProfile, bounds:ParameterBounds,
             cbounds:ControlBounds, budget:int=10, flags:RequestFlags=None, workers:int=1, run_dir:RunDirectory=None,
             resolve_control:Callable[[ControlProfile], ControlProfile]=None) -> CalibrationResult:
    """
    The iterative calibration loop

    Every iteration evaluates the pending candidate(s) (the initial point first, a whole generation for CMA-ES),
    records the best of them, keeps the best-so-far, then asks the recommender for the next candidate(s) and clamps
    them into the bounds. No recommendation is requested after the last iteration.

    Parameters:
        evaluate (callable): `(params, control) -> EvaluationOutcome` or a plain error value
        recommender (Recommender): Proposal strategy
        theta0 (ParameterVector): Initial tuned parameters (clamped first)
        control0 (ControlProfile): Initial control (clamped first)
        bounds (ParameterBounds): Tuned coordinates
        cbounds (ControlBounds): Control bounds
        budget (int): Iterations K >= 0
        flags (RequestFlags): Request switches (default all on)
        workers (int): Threads used to evaluate a multi-candidate iteration
        run_dir (RunDirectory): Where to write per-iteration trajectories and the history
        resolve_control (callable): Maps a proposed control onto one that can be observed (replay mode)

    Returns:
        (CalibrationResult): Best-so-far parameters and the history
    """
    if budget < 0:
        raise ValueError("budget must be >= 0, got {}".format(budget))
    flags = flags or Ablations.request_flags(0)
    resolve_control = resolve_control or (lambda c: c)
    theta = clamp(theta0, bounds)
    control = resolve_control(clamp_control(control0, cbounds))
    history = RunHistory(bounds, cbounds)
    if budget == 0:
        return CalibrationResult(theta, control, math.inf, None, history, False)

    pending = [RecommendationResponse(theta, control, None, "initial", "")]
    best = None
    total = 0
    partial = False
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for k in range(1, budget + 1):
            if pool is not None and len(pending) > 1:
                outcomes = list(pool.map(lambda p: _evaluate_one(evaluate, p.params, p.control), pending))
            else:
                outcomes = [_evaluate_one(evaluate, p.params, p.control) for p in pending]
            total += len(pending)
            index = min(range(len(outcomes)), key=lambda i: (outcomes[i].error, i))
            chosen, outcome = pending[index], outcomes[index]
            record = IterationRecord(k, chosen.params, chosen.control, outcome.error, chosen.confidence, chosen.rationale,
                                     total, outcome.lag, tuple(outcome.flags))
            history.append(record)
            if best is None or record.error < best.error:
                best = record
            logger.info("Iteration %d/%d: error %.4g (best %.4g), %d evaluations", k, budget, record.error, best.error, total)

            media = None
            if run_dir is not None:
                media = run_dir.write_iteration(k, outcome.sim, outcome.real)
                run_dir.write_history(history)
            if k == budget:
                break

            request = RecommendationRequest(k, chosen.params, chosen.control, outcome.error, bounds, cbounds, history,
                                            [Evaluation(p.params, p.control, o.error) for p, o in zip(pending, outcomes)],
                                            media, flags)
            try:
                proposals = recommender.propose(request)
            except RecommenderUnavailableError as e:
                logger.error("Recommender unavailable at iteration %d: %s; returning best so far", k, e)
                partial = True
                break
            except ResponseParseError as e:
                logger.warning("Recommendation at iteration %d unparseable (%s); repeating current point", k, e)
                proposals = [RecommendationResponse(chosen.params, chosen.control, 0.0, "parse failure", "")]

            pending = []
            for p in proposals:
                proposed = p.control if recommender.tunes_control and flags.tune_control else chosen.control
                pending.append(p._replace(params=clamp(p.params, bounds), control=resolve_control(clamp_control(proposed, cbounds))))
    finally:
        if pool is not None:
            pool.shutdown()
    return CalibrationResult(best.params, best.control, best.error, best.iteration, history, partial)


@dataclasses.dataclass
class CalibrationConfig:
    """Everything one calibration run needs"""
    setting: str
    bounds: ParameterBounds
    """Full bounds of the setting"""
    recommender: Recommender
    source: object
    """Observation source (`ScenarioSource` or `ReplaySource`)"""
    theta0: Optional[ParameterVector] = None
    """Initial tuned parameters; drawn uniformly (seed + INIT_SEED_OFFSET) when None"""
    amplitudes0: Optional[List[float]] = None
    """Initial control amplitudes; nominal when None"""
    seed: int = 0
    budget: int = 10
    flags: int = 0
    """Ablation mask"""
    workers: int = 1
    run_dir: Optional[RunDirectory] = None
    duration: float = 10.0
    settle: float = 2.0
    skip: float = 5.0
    max_lag: float = 1.0
    metric: Optional[str] = None
    normalize_arclength: Optional[bool] = None
    space: str = "px"

    @property
    def tuned_bounds(self) -> ParameterBounds:
        return self.bounds.select(Platforms.TUNED_KINDS[self.setting])

    @property
    def cbounds(self) -> ControlBounds:
        return control_bounds(self.setting, self.bounds)

def run_calibration(config:CalibrationConfig) -> CalibrationResult:
    """
    Run the loop for a configuration: build the objective from the source, the initial point and control

    Returns:
        (CalibrationResult): Result of `run_loop`
    """
    tuned = config.tuned_bounds
    cbounds = config.cbounds
    theta0 = config.theta0 if config.theta0 is not None else sample_uniform(tuned, config.seed + INIT_SEED_OFFSET)
    amplitudes = config.amplitudes0 if config.amplitudes0 is not None else [config.bounds[n].nominal for n in cbounds.names]
    objective = Objective(config.setting, config.bounds, config.source, config.duration, config.settle, config.skip,
                          config.max_lag, config.metric, config.normalize_arclength, space=config.space)
    return run_loop(objective, config.recommender, theta0, training_profile(cbounds, amplitudes), tuned, cbounds,
                    config.budget, Ablations.request_flags(config.flags), config.workers, config.run_dir, config.source.resolve)
