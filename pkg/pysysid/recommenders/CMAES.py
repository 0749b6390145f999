import logging
import math
import numpy as np
from .Recommender import Recommender, RecommendationRequest, RecommendationResponse, finite_error, reflect

from typing import List

logger = logging.getLogger(__name__)

def population_size(d:int) -> int:
    """lambda = 4 + floor(3 ln(d + 1))"""
    return 4 + int(math.floor(3 * math.log(d + 1)))

class CMAES(Recommender):
    """
    Covariance matrix adaptation evolution strategy on the unit cube

    One generation of `popsize` candidates per loop iteration. Samples are reflected into [0, 1] and the update
    uses the reflected points. Rank-one and rank-mu covariance updates with cumulative step-size adaptation.
    """
    name = "cmaes"

    SIGMA0 = 0.3
    EIGEN_FLOOR = 1e-14

    def __init__(self, bounds, seed:int=0, sigma0:float=SIGMA0, popsize:int=None):
        super().__init__(bounds, seed)
        d = self.dim
        self.popsize = popsize or population_size(d)
        self.mu = self.popsize // 2
        w = math.log(self.mu + 0.5) - np.log(np.arange(1, self.mu + 1))
        self.weights = w / w.sum()
        self.mueff = 1.0 / np.sum(self.weights ** 2)
        self.cs = (self.mueff + 2) / (d + self.mueff + 5)
        self.ds = 1 + 2 * max(0.0, math.sqrt((self.mueff - 1) / (d + 1)) - 1) + self.cs
        self.cc = (4 + self.mueff / d) / (d + 4 + 2 * self.mueff / d)
        self.c1 = 2 / ((d + 1.3) ** 2 + self.mueff)
        self.cmu = min(1 - self.c1, 2 * (self.mueff - 2 + 1 / self.mueff) / ((d + 2) ** 2 + self.mueff))
        self.chin = math.sqrt(d) * (1 - 1 / (4 * d) + 1 / (21 * d * d))
        self.sigma = float(sigma0)
        self.mean = None
        self.C = np.eye(d)
        self.B = np.eye(d)
        self.D = np.ones(d)
        self.ps = np.zeros(d)
        self.pc = np.zeros(d)
        self.generation = 0
        self._population = None

    def ask(self) -> np.ndarray:
        """A generation (popsize, d) of reflected samples"""
        z = self.rng.standard_normal((self.popsize, self.dim))
        y = z @ (self.B * self.D).T
        self._population = reflect(self.mean + self.sigma * y)
        return self._population.copy()

    def tell(self, population:np.ndarray, errors):
        d = self.dim
        errors = np.array([finite_error(e) for e in errors])
        order = np.argsort(errors, kind="stable")[:self.mu]
        y = (population[order] - self.mean) / self.sigma
        yw = self.weights @ y
        self.mean = self.mean + self.sigma * yw
        self.generation += 1

        inv_sqrt = self.B @ np.diag(1.0 / self.D) @ self.B.T
        self.ps = (1 - self.cs) * self.ps + math.sqrt(self.cs * (2 - self.cs) * self.mueff) * inv_sqrt @ yw
        norm_ps = np.linalg.norm(self.ps)
        hsig = norm_ps / math.sqrt(1 - (1 - self.cs) ** (2 * self.generation)) < (1.4 + 2 / (d + 1)) * self.chin
        self.pc = (1 - self.cc) * self.pc + hsig * math.sqrt(self.cc * (2 - self.cc) * self.mueff) * yw
        rank_mu = (self.weights[:, None] * y).T @ y
        self.C = ((1 - self.c1 - self.cmu) * self.C
                  + self.c1 * (np.outer(self.pc, self.pc) + (1 - hsig) * self.cc * (2 - self.cc) * self.C)
                  + self.cmu * rank_mu)
        self.sigma *= math.exp((self.cs / self.ds) * (norm_ps / self.chin - 1))
        self._decompose()

    def _decompose(self):
        self.C = (self.C + self.C.T) / 2
        eigenvalues, self.B = np.linalg.eigh(self.C)
        if np.any(eigenvalues < self.EIGEN_FLOOR):
            logger.warning("Covariance lost positive definiteness (min eigenvalue %.3g); flooring at %g", eigenvalues.min(), self.EIGEN_FLOOR)
            eigenvalues = np.maximum(eigenvalues, self.EIGEN_FLOOR)
            self.C = self.B @ np.diag(eigenvalues) @ self.B.T
        self.D = np.sqrt(eigenvalues)

    def propose(self, req:RecommendationRequest) -> List[RecommendationResponse]:
        if self.mean is None:
            self.mean = self.unit(req.params)
        elif self._population is not None:
            self.tell(self._population, [e.error for e in req.evaluations])
        return [self.respond(x, req, "cmaes generation {}".format(self.generation + 1)) for x in self.ask()]

    def recommend(self, req:RecommendationRequest) -> RecommendationResponse:
        return self.propose(req)[0]
