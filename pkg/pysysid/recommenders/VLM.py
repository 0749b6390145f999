import base64
import logging
import os
from ..CalibError import ResponseParseError
from .Prompt import build_prompt, parse_response, reprompt
from .Recommender import Recommender, RecommendationRequest, RecommendationResponse
from .VLMClient import VLMClient

from typing import Dict, List

logger = logging.getLogger(__name__)

MEDIA_MODES = ("path", "inline")

def media_descriptors(media:Dict[str, str], mode:str="path") -> List[Dict]:
    """
    Attachment descriptors for the sim and real recordings

    Parameters:
        media (dict): `sim` / `real` -> file path
        mode (str): `path` sends references, `inline` sends base64 file contents
    """
    if mode not in MEDIA_MODES:
        raise ValueError("media mode must be one of {}, got '{}'".format(MEDIA_MODES, mode))
    out = []
    for role in ("sim", "real"):
        path = (media or {}).get(role)
        if not path:
            continue
        entry = {"role": "simulation" if role == "sim" else "real", "name": os.path.basename(path)}
        if mode == "path":
            entry["path"] = os.path.abspath(path)
        else:
            with open(path, "rb") as f:
                entry["encoding"] = "base64"
                entry["data"] = base64.b64encode(f.read()).decode("ascii")
        out.append(entry)
    return out

class VLMRecommender(Recommender):
    """
    Recommendations from a vision-language model behind an HTTP endpoint

    Malformed replies get one re-prompt with the schema appended; a second malformed reply raises ResponseParseError.
    """
    name = "vlm"
    tunes_control = True

    def __init__(self, bounds, client:VLMClient, setting:str, seed:int=0, media_mode:str="path"):
        super().__init__(bounds, seed)
        self.client = client
        self.setting = setting
        self.media_mode = media_mode

    def recommend(self, req:RecommendationRequest) -> RecommendationResponse:
        prompt = build_prompt(req, self.setting, media_descriptors(req.media, self.media_mode) if req.flags.include_video else [])
        reply = self.client.complete(prompt)
        try:
            return parse_response(reply, req)
        except ResponseParseError as e:
            logger.warning("Unparseable recommendation (%s); re-prompting once", e)
        return parse_response(self.client.complete(reprompt(prompt)), req)
