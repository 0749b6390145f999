import logging
import math
import numpy as np
from scipy.stats import qmc
from .GaussianProcess import GaussianProcess, expected_improvement
from .Recommender import Recommender, RecommendationRequest, RecommendationResponse, finite_error

logger = logging.getLogger(__name__)

class BayesOpt(Recommender):
    """
    GP-EI Bayesian optimization on the unit cube

    The first `n_initial` proposals are uniform random; later ones maximize expected improvement over a scrambled
    Sobol set plus Gaussian perturbations of the best point seen.
    """
    name = "bo"

    N_INITIAL = 3
    N_SOBOL = 2048
    N_LOCAL = 256
    LOCAL_SCALE = 0.05

    def __init__(self, bounds, seed:int=0, n_initial:int=N_INITIAL, jitter:float=1e-6):
        super().__init__(bounds, seed)
        self.n_initial = n_initial
        self.jitter = jitter
        self.x = []
        self.y = []
        self.proposals = 0

    def tell(self, unit, error:float):
        self.x.append(np.clip(np.asarray(unit, dtype=float), 0.0, 1.0))
        self.y.append(finite_error(error))

    def _random(self) -> np.ndarray:
        return self.rng.uniform(0.0, 1.0, self.dim)

    def ask(self) -> np.ndarray:
        """Next point in the unit cube"""
        self.proposals += 1
        y = np.array(self.y)
        finite = np.isfinite(y)
        if self.proposals <= self.n_initial or not finite.any():
            return self._random()
        y = np.where(finite, y, y[finite].max())
        x = np.array(self.x)
        try:
            gp = GaussianProcess(self.jitter).fit(x, y)
        except np.linalg.LinAlgError:
            logger.warning("GP fit failed on %d points; proposing a random point", len(y))
            return self._random()
        sobol = qmc.Sobol(self.dim, scramble=True, seed=self.rng).random_base2(int(math.log2(self.N_SOBOL)))
        local = np.clip(x[np.argmin(y)] + self.rng.normal(0.0, self.LOCAL_SCALE, (self.N_LOCAL, self.dim)), 0.0, 1.0)
        candidates = np.vstack([sobol, local])
        mu, sigma = gp.predict(candidates)
        ei = expected_improvement(mu, sigma, y.min())
        return candidates[int(np.argmax(ei))]

    def recommend(self, req:RecommendationRequest) -> RecommendationResponse:
        for evaluation in req.evaluations:
            self.tell(self.unit(evaluation.params), evaluation.error)
        return self.respond(self.ask(), req)
