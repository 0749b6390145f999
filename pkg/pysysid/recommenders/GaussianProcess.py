import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.spatial.distance import cdist
from scipy.stats import norm

from typing import Tuple

def matern52(a:np.ndarray, b:np.ndarray, length_scale:float) -> np.ndarray:
    """Matern 5/2 correlation between the rows of `a` and `b`"""
    r = np.sqrt(5.0) * cdist(np.atleast_2d(a), np.atleast_2d(b)) / length_scale
    return (1.0 + r + r * r / 3.0) * np.exp(-r)

def expected_improvement(mu, sigma, f_min:float) -> np.ndarray:
    """
    EI for minimization. Where sigma is 0 it reduces to max(f_min - mu, 0)
    """
    mu = np.asarray(mu, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    improvement = f_min - mu
    ei = np.maximum(improvement, 0.0)
    positive = sigma > 0
    z = improvement[positive] / sigma[positive]
    ei[positive] = improvement[positive] * norm.cdf(z) + sigma[positive] * norm.pdf(z)
    return np.maximum(ei, 0.0)

class GaussianProcess:
    """
    Zero-mean GP regression with an isotropic Matern 5/2 kernel on standardized targets

    The length scale is picked from a log grid by marginal likelihood; the signal variance has a closed-form
    maximum-likelihood value for each length scale.
    """
    LENGTH_SCALES = np.logspace(-2, 1, 31)

    def __init__(self, jitter:float=1e-6, length_scales=None):
        self.jitter = jitter
        """Diagonal noise added to the correlation matrix"""
        self.length_scales = np.asarray(length_scales if length_scales is not None else self.LENGTH_SCALES, dtype=float)
        self.length_scale = None
        """Selected length scale"""
        self.variance = None
        """Signal variance of the standardized targets"""
        self.log_likelihood = None

    def fit(self, x, y) -> "GaussianProcess":
        """
        Parameters:
            x (array-like): Inputs (n, d)
            y (array-like): Finite targets (n,)

        Raises np.linalg.LinAlgError if no length scale gives a positive definite matrix
        """
        x = np.atleast_2d(np.asarray(x, dtype=float))
        y = np.asarray(y, dtype=float)
        self._mean = y.mean()
        self._scale = y.std() if y.std() > 0 else 1.0
        ys = (y - self._mean) / self._scale
        n = len(ys)
        best = None
        for length in self.length_scales:
            k = matern52(x, x, length) + self.jitter * np.eye(n)
            try:
                factor = cho_factor(k, lower=True)
            except np.linalg.LinAlgError:
                continue
            alpha = cho_solve(factor, ys)
            variance = max(float(ys @ alpha) / n, 1e-12)
            ll = -0.5 * n * np.log(variance) - np.sum(np.log(np.diag(factor[0])))
            if best is None or ll > best[0]:
                best = (ll, length, factor, alpha, variance)
        if best is None:
            raise np.linalg.LinAlgError("Correlation matrix is singular for every length scale")
        self.log_likelihood, self.length_scale, self._factor, self._alpha, self.variance = best
        self._x = x
        return self

    def predict(self, x) -> Tuple[np.ndarray, np.ndarray]:
        """
        Posterior mean and standard deviation in target units
        """
        k = matern52(np.atleast_2d(x), self._x, self.length_scale)
        mu = k @ self._alpha
        v = cho_solve(self._factor, k.T)
        var = self.variance * np.maximum(1.0 - np.sum(k * v.T, axis=1), 0.0)
        return self._mean + self._scale * mu, self._scale * np.sqrt(var)
