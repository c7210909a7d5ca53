"""Chat-completion client with recordable, replayable transcripts.

Every request is canonicalized and hashed; a transcript maps each hash to the
ordered list of responses observed for it, so a pipeline that issues the same
prompt several times (regeneration, augmentation) replays each occurrence in
the order it was recorded. Modes:

- live: call the transport, no recording
- record: call the transport and append (request, response) to the transcript
- replay: serve responses from the transcript only; an unseen or exhausted
  request raises ReplayMissError rather than silently going to the network
"""

from __future__ import annotations

import hashlib
import json
import logging
import random
import re
import threading
import time
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import requests

from .errors import (
    AuthError,
    EmptySampleError,
    GatewayError,
    RateLimitError,
    ReplayMissError,
)

logger = logging.getLogger(__name__)

MODES = ("live", "record", "replay")
MAX_CONCURRENT_REQUESTS = 8


def message(role: str, content: str) -> dict:
    return {"role": role, "content": content}


@dataclass
class ChatRequest:
    model: str
    messages: list[dict]
    temperature: float = 0.0
    top_p: float = 1.0
    n: int = 1
    max_tokens: int | None = None
    stop: list[str] | None = None

    def to_canonical(self) -> dict:
        return {
            "model": self.model,
            "messages": [
                {"role": m["role"], "content": m["content"]} for m in self.messages
            ],
            "temperature": self.temperature,
            "top_p": self.top_p,
            "n": self.n,
            "max_tokens": self.max_tokens,
            "stop": self.stop,
        }

    def canonical_json(self) -> str:
        return json.dumps(self.to_canonical(), sort_keys=True, separators=(",", ":"))

    def request_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()

    def to_payload(self) -> dict:
        payload = {
            "model": self.model,
            "messages": self.messages,
            "temperature": self.temperature,
            "top_p": self.top_p,
            "n": self.n,
        }
        if self.max_tokens is not None:
            payload["max_tokens"] = self.max_tokens
        if self.stop is not None:
            payload["stop"] = self.stop
        return payload

    @classmethod
    def from_record(cls, record: dict) -> "ChatRequest":
        return cls(
            model=record["model"],
            messages=record["messages"],
            temperature=record["temperature"],
            top_p=record["top_p"],
            n=record["n"],
            max_tokens=record.get("max_tokens"),
            stop=record.get("stop"),
        )


@dataclass
class ChatResponse:
    samples: list[str]
    model: str = ""

    def to_record(self) -> dict:
        return {"samples": self.samples, "model": self.model}

    @classmethod
    def from_record(cls, record: dict) -> "ChatResponse":
        return cls(samples=list(record["samples"]), model=record.get("model", ""))


Transport = Callable[[ChatRequest], ChatResponse]


class Transcript:
    """Ordered log of (request, response) pairs with FIFO replay per request.

    The on-disk form is JSON Lines; loading preserves file order, and saving
    an unmodified transcript reproduces the file byte for byte.
    """

    def __init__(self) -> None:
        self._entries: list[dict] = []
        self._queues: dict[str, deque[dict]] = {}
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._entries)

    def record(self, request: ChatRequest, response: ChatResponse, timestamp: float) -> None:
        entry = {
            "request_hash": request.request_hash(),
            "request": request.to_canonical(),
            "response": response.to_record(),
            "timestamp": timestamp,
        }
        with self._lock:
            self._entries.append(entry)
            self._queues.setdefault(entry["request_hash"], deque()).append(
                entry["response"]
            )

    def pop(self, request: ChatRequest) -> ChatResponse:
        key = request.request_hash()
        with self._lock:
            queue = self._queues.get(key)
            if not queue:
                preview = ""
                if request.messages:
                    preview = request.messages[-1]["content"][:80]
                raise ReplayMissError(
                    f"no recorded response for request {key[:12]} "
                    f"(last message starts: {preview!r})"
                )
            return ChatResponse.from_record(queue.popleft())

    def pending(self) -> int:
        with self._lock:
            return sum(len(q) for q in self._queues.values())

    def save(self, path: str | Path) -> None:
        lines = [
            json.dumps(entry, sort_keys=True, separators=(",", ":"))
            for entry in self._entries
        ]
        Path(path).write_text("".join(line + "\n" for line in lines), "utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Transcript":
        transcript = cls()
        text = Path(path).read_text("utf-8")
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                entry = json.loads(line)
            except json.JSONDecodeError as exc:
                raise GatewayError(f"{path}:{lineno}: invalid transcript line") from exc
            transcript._entries.append(entry)
            transcript._queues.setdefault(entry["request_hash"], deque()).append(
                entry["response"]
            )
        return transcript


class LlmGateway:
    """Issues chat requests through a transport with retry, bounded
    concurrency, and transcript support.

    Retries cover rate limits, transient gateway failures, and empty sample
    lists; authentication failures are raised immediately. `clock`, `sleep`,
    and `rng` are injectable so recorded transcripts and retry behavior are
    deterministic under test.
    """

    def __init__(
        self,
        transport: Transport | None = None,
        transcript: Transcript | None = None,
        mode: str = "live",
        max_retries: int = 5,
        backoff_base: float = 1.0,
        clock: Callable[[], float] = time.time,
        sleep: Callable[[float], None] = time.sleep,
        rng: random.Random | None = None,
        max_concurrent: int = MAX_CONCURRENT_REQUESTS,
    ) -> None:
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
        if mode in ("live", "record") and transport is None:
            raise ValueError(f"{mode} mode requires a transport")
        if mode in ("record", "replay") and transcript is None:
            raise ValueError(f"{mode} mode requires a transcript")
        self.mode = mode
        self.transport = transport
        self.transcript = transcript
        self.max_retries = max_retries
        self.backoff_base = backoff_base
        self._clock = clock
        self._sleep = sleep
        self._rng = rng or random.Random()
        self._semaphore = threading.BoundedSemaphore(max_concurrent)

    def complete(self, request: ChatRequest) -> ChatResponse:
        if self.mode == "replay":
            assert self.transcript is not None
            return self.transcript.pop(request)
        response = self._call_with_retry(request)
        if self.mode == "record":
            assert self.transcript is not None
            self.transcript.record(request, response, self._clock())
        return response

    def _call_with_retry(self, request: ChatRequest) -> ChatResponse:
        assert self.transport is not None
        last_error: GatewayError | None = None
        for attempt in range(self.max_retries):
            if attempt:
                delay = self.backoff_base * (2 ** (attempt - 1))
                delay += self._rng.uniform(0, 0.1 * self.backoff_base)
                self._sleep(delay)
            try:
                with self._semaphore:
                    response = self.transport(request)
                if not response.samples:
                    raise EmptySampleError("transport returned no samples")
                return response
            except AuthError:
                raise
            except (RateLimitError, EmptySampleError) as err:
                last_error = err
                logger.warning("attempt %d failed: %s", attempt + 1, err)
            except GatewayError as err:
                last_error = err
                logger.warning("attempt %d failed: %s", attempt + 1, err)
        assert last_error is not None
        raise last_error


def http_transport(
    base_url: str,
    api_key: str | None = None,
    session: requests.Session | None = None,
    timeout: float = 120.0,
) -> Transport:
    """Transport speaking the common chat-completions HTTP shape."""
    sess = session or requests.Session()
    url = base_url.rstrip("/") + "/chat/completions"

    def transport(request: ChatRequest) -> ChatResponse:
        headers = {"Content-Type": "application/json"}
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        try:
            resp = sess.post(url, json=request.to_payload(), headers=headers, timeout=timeout)
        except requests.RequestException as exc:
            raise GatewayError(f"request failed: {exc}") from exc
        if resp.status_code in (401, 403):
            raise AuthError(f"authentication rejected (HTTP {resp.status_code})")
        if resp.status_code == 429:
            raise RateLimitError("rate limited (HTTP 429)")
        if resp.status_code != 200:
            raise GatewayError(f"HTTP {resp.status_code}: {resp.text[:200]}")
        try:
            data = resp.json()
            samples = [choice["message"]["content"] for choice in data["choices"]]
        except (ValueError, KeyError, TypeError) as exc:
            raise GatewayError(f"malformed response body: {exc}") from exc
        return ChatResponse(samples=samples, model=data.get("model", request.model))

    return transport


_FENCE_RE = re.compile(r"```[^\n]*\n(.*?)```", re.DOTALL)


def extract_code_block(text: str) -> str:
    """Contents of the first fenced code block, or the text unchanged if none.

    The match stops at the earliest closing fence, so the extracted content
    never contains a complete fence pair and the function is idempotent.
    """
    found = _FENCE_RE.search(text)
    if found is None:
        return text
    return found.group(1)
