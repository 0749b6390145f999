import collections
import math
import numpy as np
from .Recommender import Recommender, RecommendationRequest, RecommendationResponse, finite_error

from typing import Callable

INVPHI = (math.sqrt(5) - 1) / 2
"""1 / golden ratio"""

GoldenResult = collections.namedtuple('GoldenResult', 'lower upper x value')
"""
NamedTuple returned by golden-section searches

**Properties:**
- `lower` - Final bracket start
- `upper` - Final bracket end
- `x` - Best evaluated point
- `value` - Its value
"""

def golden_steps(a:float, b:float, shrinks:int):
    """
    Generator form of golden-section search: yields points, receives values, returns a `GoldenResult`

    `shrinks` bracket reductions by 1/phi cost `shrinks + 1` evaluations (at least one)
    """
    if shrinks <= 0:
        x = (a + b) / 2
        fx = yield x
        return GoldenResult(a, b, x, fx)
    c = b - INVPHI * (b - a)
    d = a + INVPHI * (b - a)
    fc = yield c
    fd = yield d
    best = (c, fc) if fc <= fd else (d, fd)
    for s in range(shrinks):
        last = s == shrinks - 1
        if fc <= fd:
            b, d, fd = d, c, fc
            if not last:
                c = b - INVPHI * (b - a)
                fc = yield c
                if fc < best[1]:
                    best = (c, fc)
        else:
            a, c, fc = c, d, fd
            if not last:
                d = a + INVPHI * (b - a)
                fd = yield d
                if fd < best[1]:
                    best = (d, fd)
    return GoldenResult(a, b, best[0], best[1])

def golden_section(f:Callable[[float], float], a:float, b:float, shrinks:int) -> GoldenResult:
    """
    Minimize a unimodal function on [a, b]

    Parameters:
        f (callable): Objective
        a (float): Bracket start
        b (float): Bracket end
        shrinks (int): Bracket reductions; the final bracket is (b - a) * 0.618^shrinks wide
    """
    steps = golden_steps(a, b, shrinks)
    x = next(steps)
    try:
        while True:
            x = steps.send(f(x))
    except StopIteration as stop:
        return stop.value

class GoldenCD(Recommender):
    """
    Coordinate descent with a golden-section line search per axis over its full range

    The first evaluation is the initial point; the remaining `budget - 1` evaluations are split evenly across the axes
    (extra ones to the first axes). Each axis search starts from the best point found so far. A finished cycle
    starts over with the same split.
    """
    name = "golden_cd"

    def __init__(self, bounds, seed:int=0, budget:int=10):
        super().__init__(bounds, seed)
        self.budget = int(budget)
        self._search = None
        self._pending = None

    def allocation(self):
        """Evaluations per axis"""
        d = self.dim
        spare = max(self.budget - 1, d)
        return [spare // d + (1 if i < spare % d else 0) for i in range(d)]

    def minimize(self, x0:np.ndarray):
        """Generator: yields points to evaluate, receives their values"""
        best_x = np.clip(np.asarray(x0, dtype=float), 0.0, 1.0)
        best_f = finite_error((yield best_x.copy()))
        while True:
            for axis, evaluations in enumerate(self.allocation()):
                steps = golden_steps(0.0, 1.0, evaluations - 1)
                t = next(steps)
                try:
                    while True:
                        x = best_x.copy()
                        x[axis] = t
                        t = steps.send(finite_error((yield x)))
                except StopIteration as stop:
                    result = stop.value
                if result.value < best_f:
                    best_x[axis], best_f = result.x, result.value

    def recommend(self, req:RecommendationRequest) -> RecommendationResponse:
        if self._search is None:
            self._search = self.minimize(self.unit(req.params))
            next(self._search)
        for evaluation in req.evaluations:
            self._pending = self._search.send(evaluation.error)
        return self.respond(self._pending, req)
