"""HTTP JSON clients for the out-of-process generator, scorer, and detector.

Protocol: POST /generate {prompt, max_sentences, temperature, top_k} -> {text};
POST /score {context, candidates} -> {probs}; POST /predict {text} ->
{label, score?}. Requests carry a client-generated id and are retried with
exponential backoff on transient failures, at most three attempts.
"""

from __future__ import annotations

import os
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import requests

from .errors import (
    BadConfigError,
    BadProbabilityError,
    MalformedResponseError,
    RequestTimeoutError,
    TransportError,
)

ENV_GENERATOR_URL = "VFORGE_GENERATOR_URL"
ENV_SCORER_URL = "VFORGE_SCORER_URL"
ENV_DETECTOR_URL = "VFORGE_DETECTOR_URL"
ENV_TOKEN = "VFORGE_TOKEN"

DEFAULT_CONCURRENCY = 8


@dataclass(frozen=True)
class HttpConfig:
    timeout: float = 60.0
    max_attempts: int = 3
    backoff_base: float = 0.1
    token: str | None = None


@dataclass(frozen=True)
class GeneratorRequest:
    prompt: str
    max_sentences: int
    temperature: float = 1.0
    top_k: int = 40

    def validate(self) -> None:
        if self.max_sentences < 1:
            raise BadConfigError(f"max_sentences must be >= 1, got {self.max_sentences}")
        if self.temperature <= 0:
            raise BadConfigError(f"temperature must be positive, got {self.temperature}")


@dataclass(frozen=True)
class DetectorResponse:
    label: str
    score: float | None = None


def env_endpoint(name: str) -> str:
    url = os.environ.get(name, "").strip()
    if not url:
        raise BadConfigError(f"environment variable {name} is not set")
    return url


def _post_json(url: str, payload: dict, cfg: HttpConfig) -> dict:
    headers = {"X-Request-Id": uuid.uuid4().hex}
    if cfg.token:
        headers["Authorization"] = f"Bearer {cfg.token}"

    last_error: Exception | None = None
    for attempt in range(cfg.max_attempts):
        if attempt:
            time.sleep(cfg.backoff_base * (2 ** (attempt - 1)))
        try:
            response = requests.post(url, json=payload, headers=headers, timeout=cfg.timeout)
        except requests.exceptions.Timeout:
            last_error = RequestTimeoutError(f"request to {url} timed out after {cfg.timeout}s")
            continue
        except requests.exceptions.RequestException as exc:
            last_error = TransportError(status=None, detail=str(exc))
            continue

        if response.status_code >= 500:
            last_error = TransportError(status=response.status_code, detail=response.reason)
            continue
        if response.status_code >= 400:
            raise TransportError(status=response.status_code, detail=response.reason)

        try:
            body = response.json()
        except ValueError as exc:
            raise MalformedResponseError(f"response from {url} is not JSON: {exc}") from exc
        if not isinstance(body, dict):
            raise MalformedResponseError(f"response from {url} is not a JSON object")
        return body

    assert last_error is not None
    raise last_error


def generate(endpoint: str, request: GeneratorRequest, cfg: HttpConfig = HttpConfig()) -> str:
    request.validate()
    body = _post_json(
        endpoint.rstrip("/") + "/generate",
        {
            "prompt": request.prompt,
            "max_sentences": request.max_sentences,
            "temperature": request.temperature,
            "top_k": request.top_k,
        },
        cfg,
    )
    if "text" not in body or not isinstance(body["text"], str):
        raise MalformedResponseError("generator response missing string field 'text'")
    return body["text"]


def score_tokens(
    endpoint: str,
    context: Sequence[str],
    candidates: Sequence[str],
    cfg: HttpConfig = HttpConfig(),
) -> list[float]:
    if not candidates:
        raise BadConfigError("candidates must be non-empty")
    body = _post_json(
        endpoint.rstrip("/") + "/score",
        {"context": list(context), "candidates": list(candidates)},
        cfg,
    )
    probs = body.get("probs")
    if not isinstance(probs, list) or len(probs) != len(candidates):
        raise MalformedResponseError(
            f"scorer response must hold {len(candidates)} probabilities"
        )
    out: list[float] = []
    for p in probs:
        if not isinstance(p, (int, float)) or isinstance(p, bool):
            raise MalformedResponseError(f"probability {p!r} is not a number")
        value = float(p)
        if not 0.0 < value <= 1.0:
            raise BadProbabilityError(f"probability {value} outside (0, 1]")
        out.append(value)
    return out


def detect(endpoint: str, text: str, cfg: HttpConfig = HttpConfig()) -> DetectorResponse:
    body = _post_json(endpoint.rstrip("/") + "/predict", {"text": text}, cfg)
    label = body.get("label")
    if label not in ("real", "fake"):
        raise MalformedResponseError(f"detector label must be real or fake, got {label!r}")
    score = body.get("score")
    if score is not None:
        if not isinstance(score, (int, float)) or isinstance(score, bool):
            raise MalformedResponseError(f"detector score {score!r} is not a number")
        score = float(score)
        if not 0.0 <= score <= 1.0:
            raise MalformedResponseError(f"detector score {score} outside [0, 1]")
    return DetectorResponse(label=label, score=score)


def detect_many(
    endpoint: str,
    texts: Sequence[str],
    cfg: HttpConfig = HttpConfig(),
    concurrency: int = DEFAULT_CONCURRENCY,
) -> list[DetectorResponse]:
    if not texts:
        return []
    with ThreadPoolExecutor(max_workers=max(1, concurrency)) as pool:
        return list(pool.map(lambda t: detect(endpoint, t, cfg), texts))


class GeneratorClient:
    """Remote continuation source satisfying the extension module's protocol."""

    def __init__(self, endpoint: str, cfg: HttpConfig = HttpConfig()):
        self.endpoint = endpoint
        self.cfg = cfg

    def generate(self, prompt: str, max_sentences: int, temperature: float, top_k: int) -> str:
        request = GeneratorRequest(
            prompt=prompt, max_sentences=max_sentences, temperature=temperature, top_k=top_k
        )
        return generate(self.endpoint, request, self.cfg)


class ScorerClient:
    """Remote next-token probability source satisfying the Scorer protocol."""

    def __init__(self, endpoint: str, cfg: HttpConfig = HttpConfig()):
        self.endpoint = endpoint
        self.cfg = cfg

    def next_token_prob(self, context: Sequence[str], candidate: str) -> float:
        return score_tokens(self.endpoint, context, [candidate], self.cfg)[0]


class DetectorClient:
    def __init__(self, endpoint: str, cfg: HttpConfig = HttpConfig()):
        self.endpoint = endpoint
        self.cfg = cfg

    def detect(self, text: str) -> DetectorResponse:
        return detect(self.endpoint, text, self.cfg)

    def detect_many(self, texts: Sequence[str], concurrency: int = DEFAULT_CONCURRENCY) -> list[DetectorResponse]:
        return detect_many(self.endpoint, texts, self.cfg, concurrency)
