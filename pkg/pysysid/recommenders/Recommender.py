import collections
import math
import numpy as np
from ..Ablations import RequestFlags, Ablations
from ..Control import ControlBounds, ControlProfile
from ..ParameterSpace import ParameterBounds, ParameterVector

from typing import List

Evaluation = collections.namedtuple('Evaluation', 'params control error')
"""
NamedTuple for one simulator evaluation

**Properties:**
- `params` - Evaluated `ParameterVector` (tuned coordinates)
- `control` - `ControlProfile` it ran with
- `error` - Training MAE, `inf` if the simulation diverged
"""

RecommendationRequest = collections.namedtuple('RecommendationRequest', 'iteration params control error bounds cbounds history evaluations media flags')
"""
NamedTuple handed to a recommender after every loop iteration

**Properties:**
- `iteration` - Index of the iteration just evaluated (1-based)
- `params` - Best-of-iteration parameters (tuned coordinates)
- `control` - Control of that iteration
- `error` - Its training error
- `bounds` - `ParameterBounds` of the tuned coordinates
- `cbounds` - `ControlBounds`
- `history` - `RunHistory` up to and including this iteration
- `evaluations` - List of `Evaluation`s made this iteration, in proposal order
- `media` - Dict `sim`/`real` -> trajectory file path, or None
- `flags` - `RequestFlags`
"""

RecommendationResponse = collections.namedtuple('RecommendationResponse', 'params control confidence rationale analysis')
"""
NamedTuple holding one proposal, before clamping

**Properties:**
- `params` - Proposed `ParameterVector`
- `control` - Proposed `ControlProfile`
- `confidence` - Self-reported confidence in [0, 1]
- `rationale` - Short reason
- `analysis` - Free text (empty for optimizers)
"""

def make_request(iteration:int, params:ParameterVector, control:ControlProfile, error:float, bounds:ParameterBounds, cbounds:ControlBounds,
                 history=None, evaluations:List[Evaluation]=None, media=None, flags:RequestFlags=None) -> RecommendationRequest:
    """Request with defaults: no history, the current point as the only evaluation, all flags on"""
    return RecommendationRequest(iteration, params, control, error, bounds, cbounds, history,
                                 evaluations if evaluations is not None else [Evaluation(params, control, error)],
                                 media, flags if flags is not None else Ablations.request_flags(0))

def finite_error(error) -> float:
    """NaN and None count as diverged (+inf)"""
    if error is None or math.isnan(error):
        return math.inf
    return float(error)

def reflect(x) -> np.ndarray:
    """Fold any real into [0, 1] by reflecting at the bounds: 1.2 -> 0.8, -0.3 -> 0.3"""
    x = np.mod(np.asarray(x, dtype=float), 2.0)
    return np.where(x > 1.0, 2.0 - x, x)


class Recommender:
    """
    Base class of the proposal strategies.

    A run calls `propose` once per finished iteration (except the last). The request carries the evaluations of that
    iteration, so ask/tell optimizers learn from `req.evaluations` and then return their next candidate(s).
    Black-box optimizers search the unit cube of the tuned coordinates and keep the control fixed.
    """
    name = "base"
    """Registry name"""
    tunes_control = False
    """Whether proposals may change the control amplitudes"""

    def __init__(self, bounds:ParameterBounds, seed:int=0):
        """
        Parameters:
            bounds (ParameterBounds): Tuned coordinates
            seed (int): Seed of every random choice the recommender makes
        """
        self.bounds = bounds
        self.seed = seed
        self.rng = np.random.default_rng(seed)

    @property
    def dim(self) -> int:
        return len(self.bounds)

    def unit(self, params:ParameterVector) -> np.ndarray:
        """Clipped unit-cube image of a vector"""
        return np.clip(self.bounds.to_unit(params.array), 0.0, 1.0)

    def vector(self, unit) -> ParameterVector:
        return ParameterVector(self.bounds, self.bounds.from_unit(np.clip(unit, 0.0, 1.0)))

    def respond(self, unit, req:RecommendationRequest, rationale:str=None, confidence:float=0.5) -> RecommendationResponse:
        """Response for a unit-cube point, control unchanged"""
        return RecommendationResponse(self.vector(unit), req.control, confidence, rationale or self.name, "")

    def propose(self, req:RecommendationRequest) -> List[RecommendationResponse]:
        """
        Next candidate(s) to evaluate. Most strategies return exactly one; CMA-ES returns a generation

        Parameters:
            req (RecommendationRequest): The iteration just evaluated
        """
        return [self.recommend(req)]

    def recommend(self, req:RecommendationRequest) -> RecommendationResponse:
        raise NotImplementedError()

    def __repr__(self):
        return "{}(d={}, seed={})".format(type(self).__name__, self.dim, self.seed)
