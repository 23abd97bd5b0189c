"""Chat-completion client with record/replay cache and tolerant output parsers."""

from __future__ import annotations

import ast
import enum
import hashlib
import json
import os
import re
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional, Sequence, Union

import requests

from .dialogue import GroundingLabel, Turn
from .knowledge import GroundedKnowledge, SchemaError, canonicalize, normalize_term
from .prompts import ChatMessage

DEFAULT_MODEL = "gpt-3.5-turbo-1106"
DEFAULT_TEMPERATURE = 0.0
DEFAULT_MAX_TOKENS = 256

ENDPOINT_ENV = "GROUNDING_LLM_ENDPOINT"
API_KEY_ENV = "GROUNDING_LLM_API_KEY"

_MAX_ATTEMPTS = 3
_BACKOFF_SECONDS = 0.5


class CacheMode(enum.Enum):
    RECORD = "record"
    REPLAY = "replay"
    LIVE = "live"


class CacheMissError(KeyError):
    def __init__(self, request_hash: str):
        super().__init__(request_hash)
        self.request_hash = request_hash

    def __str__(self) -> str:
        return f"no cached response for request {self.request_hash}"


class TransportError(RuntimeError):
    """The endpoint could not be reached after retries."""


class ApiError(RuntimeError):
    def __init__(self, status: int, body: str):
        super().__init__(f"API returned status {status}: {body}")
        self.status = status
        self.body = body


class LabelParseError(ValueError):
    pass


class KnowledgeParseError(ValueError):
    pass


@dataclass(frozen=True)
class CompletionRequest:
    model_name: str = DEFAULT_MODEL
    messages: tuple[ChatMessage, ...] = ()
    temperature: float = DEFAULT_TEMPERATURE
    max_tokens: int = DEFAULT_MAX_TOKENS

    def __post_init__(self) -> None:
        if not isinstance(self.messages, tuple):
            object.__setattr__(self, "messages", tuple(self.messages))
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be positive")

    def wire_body(self) -> dict[str, Any]:
        return {
            "model": self.model_name,
            "messages": [m.to_json_dict() for m in self.messages],
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
        }


@dataclass(frozen=True)
class CompletionResult:
    text: str
    cached: bool


def request_hash(request: CompletionRequest) -> str:
    """Stable hash of the request, insensitive to incidental field ordering."""
    canonical = json.dumps(request.wire_body(), sort_keys=True, ensure_ascii=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class ResponseCache:
    """Line-delimited (hash, request, response) store for record/replay."""

    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)
        self._responses: dict[str, str] = {}
        if self.path.exists():
            with open(self.path, encoding="utf-8") as handle:
                for line in handle:
                    if line.strip():
                        record = json.loads(line)
                        self._responses[record["hash"]] = record["response"]

    def __len__(self) -> int:
        return len(self._responses)

    def get(self, key: str) -> Optional[str]:
        return self._responses.get(key)

    def put(self, key: str, request: CompletionRequest, response: str) -> None:
        self._responses[key] = response
        record = {"hash": key, "request": request.wire_body(), "response": response}
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.path, "a", encoding="utf-8") as handle:
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")


def _resolve_url(endpoint: str) -> str:
    url = endpoint.rstrip("/")
    if not url.endswith("/chat/completions"):
        url += "/chat/completions"
    return url


def _send(
    request: CompletionRequest,
    endpoint: str,
    api_key: Optional[str],
    sleep: Callable[[float], None],
) -> str:
    headers = {"Content-Type": "application/json"}
    if api_key:
        headers["Authorization"] = f"Bearer {api_key}"
    last_error: Optional[Exception] = None
    for attempt in range(_MAX_ATTEMPTS):
        try:
            response = requests.post(
                _resolve_url(endpoint),
                json=request.wire_body(),
                headers=headers,
                timeout=60,
            )
        except requests.RequestException as exc:
            last_error = exc
            if attempt + 1 < _MAX_ATTEMPTS:
                sleep(_BACKOFF_SECONDS * 2**attempt)
            continue
        if response.status_code != 200:
            raise ApiError(response.status_code, response.text)
        data = response.json()
        return data["choices"][0]["message"]["content"]
    raise TransportError(f"endpoint unreachable after {_MAX_ATTEMPTS} attempts: {last_error}")


def complete(
    request: CompletionRequest,
    mode: CacheMode,
    cache: Optional[ResponseCache] = None,
    endpoint: Optional[str] = None,
    api_key: Optional[str] = None,
    sleep: Callable[[float], None] = time.sleep,
) -> CompletionResult:
    """Resolve a chat completion through the cache or the live endpoint.

    Replay serves only from the cache; record sends the request and persists
    the response; live bypasses the cache entirely.
    """
    key = request_hash(request)
    if mode is CacheMode.REPLAY:
        if cache is None:
            raise CacheMissError(key)
        cached = cache.get(key)
        if cached is None:
            raise CacheMissError(key)
        return CompletionResult(cached, cached=True)

    endpoint = endpoint or os.environ.get(ENDPOINT_ENV)
    api_key = api_key or os.environ.get(API_KEY_ENV)
    if not endpoint:
        raise ValueError(f"{mode.value} mode requires an endpoint URL (flag or {ENDPOINT_ENV})")
    text = _send(request, endpoint, api_key, sleep)
    if mode is CacheMode.RECORD and cache is not None:
        cache.put(key, request, text)
    return CompletionResult(text, cached=False)


# ---------------------------------------------------------------------------
# Output parsing.
# ---------------------------------------------------------------------------

_LABEL_PATTERN = re.compile(r"\b(explicit|implicit|clarification)\b", re.IGNORECASE)


def parse_label(raw: str) -> GroundingLabel:
    """Scan model output for the first grounding label as a whole word."""
    match = _LABEL_PATTERN.search(raw)
    if match is None:
        raise LabelParseError(f"no grounding label found in {raw!r}")
    return GroundingLabel(match.group(1).lower())


_JSON_PREFIX = re.compile(r"^\s*output\s+json\s*:\s*", re.IGNORECASE)
_CODE_FENCE = re.compile(r"^```[a-zA-Z]*\n(.*?)\n?```\s*$", re.DOTALL)


def parse_knowledge_json(raw: str) -> GroundedKnowledge:
    """Parse model extraction output into canonical knowledge.

    Tolerates an 'Output JSON:' prefix, code fences, single-quoted keys and
    strings, and a bare comma-separated sequence of column objects.
    """
    text = _JSON_PREFIX.sub("", raw.strip()).strip()
    fenced = _CODE_FENCE.match(text)
    if fenced:
        text = fenced.group(1).strip()
    if not text:
        raise KnowledgeParseError("empty extraction output")
    tree = _parse_tree(text)
    if isinstance(tree, (list, tuple)):
        tree = _combine_objects(list(tree))
    try:
        return canonicalize(tree)
    except SchemaError as exc:
        raise KnowledgeParseError(str(exc)) from None


def _parse_tree(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        offset = exc.pos
    # The printed single-quote rendering is Python-literal-like except for
    # JSON's null; a bare "{...}, {...}" sequence parses once wrapped.
    for candidate in (text, f"[{text}]"):
        try:
            return ast.literal_eval(re.sub(r"\bnull\b", "None", candidate))
        except (ValueError, SyntaxError):
            continue
    raise KnowledgeParseError(
        f"unparseable extraction output at offset {offset}: {text!r}"
    )


def _combine_objects(objects: list) -> dict:
    """Fold a sequence of schema fragments into one tree."""
    combined: dict[str, Any] = {}
    columns: list = []
    for obj in objects:
        if not isinstance(obj, dict):
            raise KnowledgeParseError(f"expected objects, got {obj!r}")
        if "column_name" in obj:
            columns.append(obj)
        else:
            columns.extend(obj.pop("column_info", []) or [])
            combined.update(obj)
    if columns:
        combined.setdefault("column_info", [])
        combined["column_info"] = list(combined["column_info"]) + columns
    return combined


# ---------------------------------------------------------------------------
# Rule-based baseline labeler.
# ---------------------------------------------------------------------------

ACK_LEXICON = (
    "good to know", "got it", "thank you", "thanks",
    "okay", "ok", "great", "fine", "sure",
)

_ACK_PATTERN = re.compile(
    r"\b(?:" + "|".join(re.escape(p) for p in ACK_LEXICON) + r")\b"
)


def rule_based_label(history: Sequence[Turn]) -> GroundingLabel:
    """Deterministic baseline: acknowledgment lexicon plus question heuristics.

    An acknowledgment without a question mark is explicit grounding. A
    question whose content tokens overlap the previous two turns counts as
    clarification of introduced material; any other question (and anything
    else) is implicit.
    """
    last = history[-1]
    if _ACK_PATTERN.search(last.text.lower()) and "?" not in last.text:
        return GroundingLabel.EXPLICIT
    if "?" in last.text:
        context: set[str] = set()
        for turn in history[-3:-1]:
            context |= normalize_term(turn.text)
        if normalize_term(last.text) & context:
            return GroundingLabel.CLARIFICATION
        return GroundingLabel.IMPLICIT
    return GroundingLabel.IMPLICIT
