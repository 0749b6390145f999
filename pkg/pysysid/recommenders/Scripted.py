import json
import logging
from .Prompt import parse_response
from .Recommender import Recommender, RecommendationRequest, RecommendationResponse

from typing import Dict, List, Union

logger = logging.getLogger(__name__)

class ScriptedRecommender(Recommender):
    """
    Replays a fixed list of replies in the recommendation output schema, one per request

    When the script runs out the last entry is repeated.
    """
    name = "scripted"
    tunes_control = True

    def __init__(self, bounds, script:Union[str, List[Dict]], seed:int=0):
        """
        Parameters:
            bounds (ParameterBounds): Tuned coordinates
            script (str or list): Path of a JSON array, or the array itself
        """
        super().__init__(bounds, seed)
        if isinstance(script, str):
            with open(script, "r") as f:
                script = json.load(f)
        if not isinstance(script, list) or not script:
            raise ValueError("A script needs at least one entry")
        self.script = script
        self.position = 0

    def recommend(self, req:RecommendationRequest) -> RecommendationResponse:
        if self.position >= len(self.script):
            logger.warning("Script exhausted after %d entries; repeating the last one", len(self.script))
            entry = self.script[-1]
        else:
            entry = self.script[self.position]
        self.position += 1
        return parse_response(entry, req)
