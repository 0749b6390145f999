import collections
import json
import logging
import math
import re
from ..Ablations import RequestFlags
from ..CalibError import ResponseParseError
from ..Control import ControlProfile
from ..ParameterSpace import ParameterVector
from ..Platforms import Platforms
from .Recommender import RecommendationRequest, RecommendationResponse

from typing import Dict, List, Union

logger = logging.getLogger(__name__)

PromptPayload = collections.namedtuple('PromptPayload', 'system user_sections media')
"""
NamedTuple of an assembled recommendation prompt

**Properties:**
- `system` - System instruction
- `user_sections` - Delimited user sections in order
- `media` - Attachment descriptors (`role` plus `path` or base64 `data`)
"""

class Sections:
    """Section delimiters of the user prompt"""
    PROFILE = "--- CANDIDATE PROFILE (JSON) ---"
    METRICS = "--- METRICS (JSON) ---"
    BOUNDS = "--- PARAMETER BOUNDS ---"
    HISTORY = "--- PARAMETER HISTORY ---"
    TASK = "--- TASK ---"
    SCHEMA = "--- OUTPUT JSON SCHEMA (strict) ---"

CHAIN_OF_THOUGHT = "Let's think step by step."

OUTPUT_SCHEMA = {
    "analysis": "Brief summary of mismatch",
    "parameter_recommendations": [
        {"name": "<parameter name>", "current_value": 0.0, "suggested_value": 0.0, "reason": "..."}
    ],
    "confidence": 0.75,
    "additional_notes": "...",
}

SIMULATORS = {
    Platforms.RIG_FINGER: "articulated finger simulation",
    Platforms.RIG_TENTACLE: "elastic rod simulation",
}

def system_prompt(setting:str, names:List[str], control_names:List[str], flags:RequestFlags) -> str:
    """
    System instruction for a setting

    Parameters:
        setting (str): Setting name
        names (list[str]): Tuned parameters
        control_names (list[str]): Control amplitudes the recommender may change (empty when control is locked)
        flags (RequestFlags): Request switches
    """
    parts = [
        "You calibrate the dynamics of a {} so that it reproduces a hardware recording.".format(SIMULATORS[Platforms.rig(setting)]),
        "The recording is the reference; the simulation is what you adjust.",
    ]
    if flags.include_video:
        parts.append("Compare the two attached recordings and reason from visible differences in speed, overshoot and settling.")
    if flags.include_history:
        parts.append("Use the history table to see which changes helped and which did not.")
    if control_names:
        parts.append("You may also change {} within bounds to excite motion that separates the effects of {}; do not use it only to make one clip look similar.".format(
            ", ".join(control_names), ", ".join(names)))
    if flags.chain_of_thought:
        parts.append(CHAIN_OF_THOUGHT)
    return " ".join(parts)

def _number(value:float) -> float:
    return float("{:.6g}".format(value))

def build_prompt(req:RecommendationRequest, setting:str, media:List[Dict]=None) -> PromptPayload:
    """
    Assemble the prompt of one recommendation request

    Sections: candidate profile, metrics, bounds, history (unless `include_history` is off), task and output schema.
    Media are attached only with `include_video` on.

    Parameters:
        req (RecommendationRequest): The request
        setting (str): Setting name
        media (list[dict]): Attachment descriptors
    """
    flags = req.flags
    control_names = req.cbounds.names if flags.tune_control else []
    profile = {name: _number(value) for name, value in req.params.items()}
    for name, amplitude in zip(req.cbounds.names, req.control.amplitudes):
        if flags.tune_control:
            profile[name] = _number(amplitude)
    error = req.error if math.isfinite(req.error) else None
    bounds = ["{}: [{:g}, {:g}]".format(e.name, e.min, e.max) for e in req.bounds]
    bounds += ["{}: [{:g}, {:g}]".format(n, lo, hi) for n, lo, hi in zip(control_names, req.cbounds.lower, req.cbounds.upper)]
    sections = [
        "{}\n{}".format(Sections.PROFILE, json.dumps(profile)),
        "{}\n{}".format(Sections.METRICS, json.dumps({"mean_abs_px": None if error is None else round(error, 3)})),
        "{}\n{}".format(Sections.BOUNDS, "\n".join(bounds)),
    ]
    if flags.include_history and req.history is not None and len(req.history):
        sections.append("{}\n{}".format(Sections.HISTORY, req.history.table()))
    sections.append("{}\n1. Describe key discrepancies between sim and real.\n2. Propose updated values for all parameters.".format(Sections.TASK))
    sections.append("{}\n{}".format(Sections.SCHEMA, json.dumps(OUTPUT_SCHEMA, indent=2)))
    return PromptPayload(
        system_prompt(setting, req.bounds.names, control_names, flags),
        sections,
        list(media or []) if flags.include_video else [],
    )

def reprompt(prompt:PromptPayload) -> PromptPayload:
    """Same prompt with a closing reminder to answer with schema-conforming JSON only"""
    note = "{}\nYour previous reply could not be parsed. Reply with a single JSON object matching this schema and nothing else:\n{}".format(
        Sections.SCHEMA, json.dumps(OUTPUT_SCHEMA, indent=2))
    return prompt._replace(user_sections=prompt.user_sections + [note])

FENCE = re.compile(r"^\s*```(?:json)?\s*(.*?)\s*```\s*$", re.DOTALL)

def _decode(reply:Union[str, Dict]) -> Dict:
    if isinstance(reply, dict):
        return reply
    if not isinstance(reply, str):
        raise ResponseParseError("Reply is neither text nor a JSON object")
    match = FENCE.match(reply)
    text = match.group(1) if match else reply
    try:
        document = json.loads(text)
    except ValueError as e:
        raise ResponseParseError("Reply is not valid JSON: {}".format(e))
    if not isinstance(document, dict):
        raise ResponseParseError("Reply JSON is not an object")
    return document

def parse_response(reply:Union[str, Dict], req:RecommendationRequest, tune_control:bool=None) -> RecommendationResponse:
    """
    Read a reply in the output schema

    Parameters missing from the reply keep their current value; confidence is clamped to [0, 1]. Both with a warning.
    Control amplitudes are only read when `tune_control` is on; otherwise the current control is returned verbatim.

    Parameters:
        reply (str or dict): Model output
        req (RecommendationRequest): The request it answers
        tune_control (bool): Override of `req.flags.tune_control`

    Returns:
        (RecommendationResponse): Unclamped proposal
    """
    tune_control = req.flags.tune_control if tune_control is None else tune_control
    document = _decode(reply)
    recommendations = document.get("parameter_recommendations")
    if not isinstance(recommendations, list):
        raise ResponseParseError("Reply has no parameter_recommendations list")
    suggested = {}
    for entry in recommendations:
        if not isinstance(entry, dict) or "name" not in entry or "suggested_value" not in entry:
            raise ResponseParseError("Malformed recommendation entry {!r}".format(entry))
        try:
            suggested[str(entry["name"])] = float(entry["suggested_value"])
        except (TypeError, ValueError):
            raise ResponseParseError("Suggested value of '{}' is not a number".format(entry["name"]))

    values = req.params.as_dict()
    for name in values:
        if name in suggested:
            values[name] = suggested[name]
        else:
            logger.warning("Reply has no value for '%s'; keeping %g", name, values[name])
    control = req.control
    if tune_control:
        amplitudes = [suggested.get(name, a) for name, a in zip(req.cbounds.names, control.amplitudes)]
        control = control.with_amplitudes(amplitudes)
    unknown = set(suggested) - set(values) - set(req.cbounds.names)
    if unknown:
        logger.warning("Ignoring unknown parameters %s", sorted(unknown))

    try:
        confidence = float(document.get("confidence"))
    except (TypeError, ValueError):
        raise ResponseParseError("Confidence {!r} is not a number".format(document.get("confidence")))
    if math.isnan(confidence):
        raise ResponseParseError("Confidence is NaN")
    if not 0.0 <= confidence <= 1.0:
        logger.warning("Confidence %g outside [0, 1]; clamped", confidence)
        confidence = min(max(confidence, 0.0), 1.0)

    reasons = "; ".join("{}: {}".format(e["name"], e.get("reason", "")) for e in recommendations if e.get("reason"))
    return RecommendationResponse(ParameterVector(req.bounds, values), control, confidence, reasons, str(document.get("analysis", "")))
