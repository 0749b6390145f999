import collections
import json
import logging
import os
import threading
import time
import httpx
from ..CalibError import RecommenderUnavailableError
from .Prompt import PromptPayload

from typing import Callable, Dict, Union

logger = logging.getLogger(__name__)

API_KEY_VARIABLE = "SYSID_API_KEY"

VLMMessage = collections.namedtuple('VLMMessage', 'sn status attempts elapsed body')
"""
NamedTuple for a reply of the recommendation endpoint

**Properties:**
- `sn` - Serial number of the request it answers
- `status` - HTTP status code
- `attempts` - Attempts it took (1 = no retry)
- `elapsed` - Seconds from first attempt to reply
- `body` - Decoded JSON body (dict), or the raw text if the body is not JSON
"""

RETRY_STATUS = {408, 429, 500, 502, 503, 504}

class VLMClient:
    """
    Connection to a chat-completion-style recommendation endpoint

    One instance can be shared by parallel calibration runs: requests are numbered under a lock and the
    underlying `httpx.Client` is thread safe.
    """
    def __init__(self, url:str, model:str=None, timeout:float=120.0, retries:int=3, backoff:float=1.0, api_key:str=None,
                 decoding:Dict=None, transport:httpx.BaseTransport=None, log_messages:bool=False, sleep:Callable[[float], None]=time.sleep):
        """
        Parameters:
            url (str): Endpoint receiving the JSON request
            model (str): Model name forwarded in the request
            timeout (float): Seconds per attempt
            retries (int): Retries after the first failed attempt
            backoff (float): First retry delay; doubles every retry
            api_key (str): Credential (default: the `SYSID_API_KEY` environment variable)
            decoding (dict): Decoding settings forwarded verbatim (e.g. temperature, top_p)
            transport (httpx.BaseTransport): Custom transport (tests use `httpx.MockTransport`)
            log_messages (bool): Log every request and reply at INFO instead of DEBUG
            sleep (callable): Delay function used between retries
        """
        self.url = url
        self.model = model
        self.retries = int(retries)
        self.backoff = float(backoff)
        self.decoding = dict(decoding or {})
        self.log_messages = log_messages
        self._sleep = sleep
        api_key = api_key if api_key is not None else os.environ.get(API_KEY_VARIABLE)
        headers = {"Authorization": "Bearer {}".format(api_key)} if api_key else {}
        self._client = httpx.Client(timeout=timeout, transport=transport, headers=headers)
        self._sn_counter = 0
        self._send_lock = threading.Lock()

    def _log(self, msg, *args):
        logger.log(logging.INFO if self.log_messages else logging.DEBUG, msg, *args)

    def _next_sn(self) -> int:
        with self._send_lock:
            self._sn_counter = self._sn_counter + 1
            return self._sn_counter

    def send(self, payload:Dict) -> VLMMessage:
        """
        POST a JSON payload, retrying transport errors and retryable statuses with exponential backoff

        Returns:
            (VLMMessage): The reply

        Raises:
            RecommenderUnavailableError: After the last retry, or on a non-retryable HTTP error
        """
        sn = self._next_sn()
        body = dict(payload, sn=sn)
        self._log("VLM request %d: %s", sn, json.dumps(body)[:2000])
        start = time.monotonic()
        error = None
        for attempt in range(1, self.retries + 2):
            try:
                response = self._client.post(self.url, json=body)
                response.raise_for_status()
            except httpx.HTTPStatusError as e:
                error = e
                if e.response.status_code not in RETRY_STATUS:
                    raise RecommenderUnavailableError("Endpoint rejected request {} with HTTP {}".format(sn, e.response.status_code))
            except httpx.TransportError as e:
                error = e
            else:
                try:
                    content = response.json()
                except ValueError:
                    content = response.text
                message = VLMMessage(sn, response.status_code, attempt, time.monotonic() - start, content)
                self._log("VLM reply %d: %s", sn, message)
                return message
            if attempt <= self.retries:
                delay = self.backoff * 2 ** (attempt - 1)
                logger.warning("VLM request %d failed (%s); retry %d/%d in %.1f s", sn, error, attempt, self.retries, delay)
                self._sleep(delay)
        raise RecommenderUnavailableError("Endpoint unreachable after {} attempts: {}".format(self.retries + 1, error))

    def complete(self, prompt:PromptPayload) -> Union[str, Dict]:
        """
        Send a prompt and return the model output

        The request body is `{system, user_sections, media}` plus `model` and the decoding fields. The reply may be
        the output object itself, `{"content": ...}`, `{"text": ...}` or an OpenAI-style `choices` list.
        """
        payload = {"system": prompt.system, "user_sections": list(prompt.user_sections), "media": list(prompt.media)}
        if self.model:
            payload["model"] = self.model
        payload.update(self.decoding)
        body = self.send(payload).body
        if isinstance(body, dict):
            if "parameter_recommendations" in body:
                return body
            if "content" in body:
                return body["content"]
            if "text" in body:
                return body["text"]
            try:
                return body["choices"][0]["message"]["content"]
            except (KeyError, IndexError, TypeError):
                return json.dumps(body)
        return body

    def close(self):
        self._client.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def __repr__(self):
        return "VLMClient({!r}, model={!r})".format(self.url, self.model)
