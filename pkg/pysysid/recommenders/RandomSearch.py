from ..ParameterSpace import ParameterVector
from .Recommender import Recommender, RecommendationRequest, RecommendationResponse

class RandomSearch(Recommender):
    """Independent uniform samples from the bounds, no refinement"""
    name = "random"

    def recommend(self, req:RecommendationRequest) -> RecommendationResponse:
        values = self.rng.uniform(self.bounds.lower, self.bounds.upper)
        return RecommendationResponse(ParameterVector(self.bounds, values), req.control, 0.5, "random", "")
