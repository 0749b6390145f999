import logging
import numpy as np
from .Recommender import Recommender, RecommendationRequest, RecommendationResponse, finite_error

logger = logging.getLogger(__name__)

class NelderMead(Recommender):
    """
    Downhill simplex on the unit cube, one evaluation per iteration

    Reflection, expansion and contraction coefficients (1, 2, 0.5), shrink 0.5. Every point is clipped to the cube.
    """
    name = "nelder_mead"

    ALPHA = 1.0
    GAMMA = 2.0
    RHO = 0.5
    SIGMA = 0.5
    STEP = 0.05
    """Initial simplex step (fraction of the range)"""
    ZERO_STEP = 0.00025
    """Initial simplex step for coordinates sitting at 0"""

    def __init__(self, bounds, seed:int=0):
        super().__init__(bounds, seed)
        self._search = None
        self._pending = None
        self.restarts = 0
        """Degenerate-simplex restarts so far"""

    def initial_simplex(self, x0:np.ndarray) -> np.ndarray:
        simplex = [x0]
        for i in range(len(x0)):
            step = self.ZERO_STEP if x0[i] == 0 else self.STEP
            x = x0.copy()
            x[i] = x0[i] + step if x0[i] + step <= 1.0 else x0[i] - step
            simplex.append(x)
        return np.array(simplex)

    def minimize(self, x0:np.ndarray):
        """
        Generator: yields points to evaluate, receives their values. Runs until closed
        """
        clip = lambda x: np.clip(x, 0.0, 1.0)
        x0 = clip(np.asarray(x0, dtype=float))
        while True:
            simplex = self.initial_simplex(x0)
            values = []
            for x in simplex:
                values.append(finite_error((yield x)))
            values = np.array(values)
            while True:
                order = np.argsort(values, kind="stable")
                simplex, values = simplex[order], values[order]
                if np.max(np.ptp(simplex, axis=0)) < 1e-12:
                    logger.warning("Simplex collapsed to a point; restarting around it")
                    self.restarts += 1
                    x0 = simplex[0]
                    break
                centroid = simplex[:-1].mean(axis=0)
                worst = simplex[-1]
                xr = clip(centroid + self.ALPHA * (centroid - worst))
                fr = finite_error((yield xr))
                if fr < values[0]:
                    xe = clip(centroid + self.GAMMA * (xr - centroid))
                    fe = finite_error((yield xe))
                    simplex[-1], values[-1] = (xe, fe) if fe < fr else (xr, fr)
                    continue
                if fr < values[-2]:
                    simplex[-1], values[-1] = xr, fr
                    continue
                if fr < values[-1]:
                    xc = clip(centroid + self.RHO * (xr - centroid))
                else:
                    xc = clip(centroid + self.RHO * (worst - centroid))
                fc = finite_error((yield xc))
                if fc < min(fr, values[-1]):
                    simplex[-1], values[-1] = xc, fc
                    continue
                for i in range(1, len(simplex)):
                    simplex[i] = simplex[0] + self.SIGMA * (simplex[i] - simplex[0])
                    values[i] = finite_error((yield simplex[i].copy()))

    def recommend(self, req:RecommendationRequest) -> RecommendationResponse:
        if self._search is None:
            self._search = self.minimize(self.unit(req.params))
            self._pending = next(self._search)
        for evaluation in req.evaluations:
            self._pending = self._search.send(evaluation.error)
        return self.respond(self._pending, req)
