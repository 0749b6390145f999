from ..CalibError import ConfigError
from .Recommender import (Recommender, Evaluation, RecommendationRequest, RecommendationResponse,
                          make_request, finite_error, reflect)
from .History import IterationRecord, RunHistory, select_best_iteration
from .RandomSearch import RandomSearch
from .NelderMead import NelderMead
from .GoldenCD import GoldenCD, GoldenResult, golden_section, golden_steps
from .GaussianProcess import GaussianProcess, matern52, expected_improvement
from .BayesOpt import BayesOpt
from .CMAES import CMAES, population_size
from .Prompt import PromptPayload, Sections, build_prompt, parse_response, reprompt
from .VLMClient import VLMClient, VLMMessage
from .VLM import VLMRecommender, media_descriptors
from .Scripted import ScriptedRecommender

METHODS = {
    "random": "Random",
    "nelder_mead": "Nelder-Mead",
    "golden_cd": "Golden-CD",
    "bo": "BO",
    "cmaes": "CMA-ES",
    "vlm": "VLM",
    "scripted": "Scripted",
}
"""Registry name -> display name"""

def make_recommender(method:str, bounds, seed:int=0, budget:int=10, setting:str=None, client:VLMClient=None, script=None, media_mode:str="path") -> Recommender:
    """
    Build a recommender by registry name

    Parameters:
        method (str): One of `METHODS`
        bounds (ParameterBounds): Tuned coordinates
        seed (int): Run seed
        budget (int): Iteration budget (Golden-CD splits it across axes)
        setting (str): Setting name (VLM prompt wording)
        client (VLMClient): Endpoint connection, required for `vlm`
        script (str or list): Script, required for `scripted`
        media_mode (str): `path` or `inline` attachments for `vlm`
    """
    if method == "random":
        return RandomSearch(bounds, seed)
    if method == "nelder_mead":
        return NelderMead(bounds, seed)
    if method == "golden_cd":
        return GoldenCD(bounds, seed, budget)
    if method == "bo":
        return BayesOpt(bounds, seed)
    if method == "cmaes":
        return CMAES(bounds, seed)
    if method == "vlm":
        if client is None:
            raise ConfigError("The vlm method needs an endpoint", field="endpoint")
        return VLMRecommender(bounds, client, setting, seed, media_mode)
    if method == "scripted":
        if script is None:
            raise ConfigError("The scripted method needs a script", field="script")
        return ScriptedRecommender(bounds, script, seed)
    raise ConfigError("Unknown method '{}'. Expected one of {}".format(method, sorted(METHODS)), field="methods")
