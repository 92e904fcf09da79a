"""Candidate generators: a scripted mock and an HTTP chat-completion client.

Both expose the same two calls: ``generate`` (a batch of candidate
dicts for an iteration) and ``repair`` (one corrected candidate for a
failing DSL text, or None).
"""

from __future__ import annotations

import json
import logging
import os
import re
import time
from dataclasses import dataclass
from pathlib import Path

import requests

from .prompts import (
    FORMAT_REPAIR_TEMPLATE,
    GENERATE_TEMPLATE,
    REPAIR_TEMPLATE,
    SYSTEM_PROMPT,
)

logger = logging.getLogger(__name__)

KIND_HTTP = "http"
KIND_MOCK = "mock"


class GeneratorError(RuntimeError):
    pass


class GeneratorUnreachable(GeneratorError):
    """Transport-level failure that survived all retries."""


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    # http
    endpoint: str | None = None
    model: str | None = None
    max_output_tokens: int = 16384
    temperature: float = 0.2
    timeout: float = 120.0
    api_key_env: str = "EAFD_API_KEY"
    # mock
    script_path: str | None = None

    def __post_init__(self):
        if self.kind == KIND_HTTP:
            if not self.endpoint or not self.model:
                raise ValueError("http generator needs endpoint and model")
            if self.script_path is not None:
                raise ValueError("http generator takes no script_path")
        elif self.kind == KIND_MOCK:
            if not self.script_path:
                raise ValueError("mock generator needs script_path")
            if self.endpoint is not None or self.model is not None:
                raise ValueError("mock generator takes no endpoint/model")
        else:
            raise ValueError(f"unknown generator kind {self.kind!r}")

    def to_json(self) -> dict:
        out = {"kind": self.kind}
        if self.kind == KIND_HTTP:
            out.update(
                endpoint=self.endpoint,
                model=self.model,
                max_output_tokens=self.max_output_tokens,
                temperature=self.temperature,
                timeout=self.timeout,
                api_key_env=self.api_key_env,
            )
        else:
            out["script_path"] = self.script_path
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "GeneratorSpec":
        return cls(**obj)


_FENCE_RE = re.compile(r"```(?:[a-zA-Z0-9_-]+)?\s*\n(.*?)```", re.DOTALL)


def _normalize_items(items, batch_size: int) -> list[dict]:
    out = []
    for item in items:
        if isinstance(item, str):
            out.append({"name": None, "dsl": item, "rationale": None})
        elif isinstance(item, dict) and isinstance(item.get("dsl"), str):
            out.append(
                {
                    "name": item.get("name"),
                    "dsl": item["dsl"],
                    "rationale": item.get("rationale"),
                }
            )
        if len(out) >= batch_size:
            break
    return out


def extract_candidates(text: str, batch_size: int) -> list[dict]:
    """Pull a JSON array of candidates out of a model response.

    Tries fenced code blocks first, then the first parseable array
    anywhere in the text. Raises GeneratorError when nothing parses.
    """
    for block in _FENCE_RE.findall(text):
        try:
            data = json.loads(block)
        except json.JSONDecodeError:
            continue
        if isinstance(data, list):
            items = _normalize_items(data, batch_size)
            if items:
                return items
    decoder = json.JSONDecoder()
    for match in re.finditer(r"\[", text):
        try:
            data, _ = decoder.raw_decode(text, match.start())
        except json.JSONDecodeError:
            continue
        if isinstance(data, list):
            items = _normalize_items(data, batch_size)
            if items:
                return items
    raise GeneratorError("no JSON candidate array found in response")


class MockGenerator:
    """Deterministic generator driven by a JSON script.

    Script schema: ``{"iterations": [[dsl, ...], ...],
    "repairs": {bad_dsl: fixed_dsl}}``. Iteration i (1-based) serves the
    (i-1)-th entry; iterations beyond the script yield no candidates.
    """

    def __init__(self, spec: GeneratorSpec):
        self.spec = spec
        doc = json.loads(Path(spec.script_path).read_text())
        self.iterations: list = doc.get("iterations", [])
        self.repairs: dict = doc.get("repairs", {})

    def generate(self, reflection_text: str, batch_size: int, iteration: int) -> list[dict]:
        if iteration < 1 or iteration > len(self.iterations):
            return []
        return _normalize_items(self.iterations[iteration - 1], batch_size)

    def repair(self, candidate_dsl: str, diagnostic: str) -> str | None:
        return self.repairs.get(candidate_dsl)


class HttpGenerator:
    """Chat-completion client for widely deployed LLM serving endpoints.

    POSTs ``{model, messages, temperature, max_tokens}`` with a bearer
    token taken from the environment; transport failures are retried
    with exponential backoff before giving up.
    """

    MAX_TRANSPORT_RETRIES = 3

    def __init__(self, spec: GeneratorSpec, session: requests.Session | None = None,
                 backoff: float = 1.0):
        self.spec = spec
        self.session = session or requests.Session()
        self.backoff = backoff

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.spec.api_key_env, "")
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def _chat(self, messages: list[dict]) -> str:
        payload = {
            "model": self.spec.model,
            "messages": messages,
            "temperature": self.spec.temperature,
            "max_tokens": self.spec.max_output_tokens,
        }
        last_error = None
        for attempt in range(self.MAX_TRANSPORT_RETRIES):
            try:
                resp = self.session.post(
                    self.spec.endpoint,
                    json=payload,
                    headers=self._headers(),
                    timeout=self.spec.timeout,
                )
                if resp.status_code >= 500:
                    raise requests.RequestException(f"server error {resp.status_code}")
                resp.raise_for_status()
                data = resp.json()
                return data["choices"][0]["message"]["content"]
            except (requests.RequestException, KeyError, IndexError, ValueError) as exc:
                last_error = exc
                if attempt < self.MAX_TRANSPORT_RETRIES - 1:
                    delay = self.backoff * (2**attempt)
                    logger.warning("generator request failed (%s); retrying in %.1fs", exc, delay)
                    time.sleep(delay)
        raise GeneratorUnreachable(f"generator unreachable after retries: {last_error}")

    def generate(self, reflection_text: str, batch_size: int, iteration: int) -> list[dict]:
        messages = [
            {"role": "system", "content": SYSTEM_PROMPT},
            {
                "role": "user",
                "content": GENERATE_TEMPLATE.format(
                    iteration=iteration, reflection=reflection_text, batch_size=batch_size
                ),
            },
        ]
        content = self._chat(messages)
        try:
            return extract_candidates(content, batch_size)
        except GeneratorError as exc:
            # one format-repair round: re-prompt with the parse diagnostic
            logger.warning("unparseable generator response (%s); issuing repair prompt", exc)
            messages.append({"role": "assistant", "content": content})
            messages.append(
                {"role": "user", "content": FORMAT_REPAIR_TEMPLATE.format(diagnostic=exc)}
            )
            content = self._chat(messages)
            try:
                return extract_candidates(content, batch_size)
            except GeneratorError:
                logger.warning("generator response unparseable after repair; skipping batch")
                return []

    def repair(self, candidate_dsl: str, diagnostic: str) -> str | None:
        messages = [
            {"role": "system", "content": SYSTEM_PROMPT},
            {
                "role": "user",
                "content": REPAIR_TEMPLATE.format(candidate=candidate_dsl, diagnostic=diagnostic),
            },
        ]
        content = self._chat(messages)
        try:
            items = extract_candidates(content, 1)
        except GeneratorError:
            return None
        return items[0]["dsl"] if items else None


def make_generator(spec: GeneratorSpec, **kwargs):
    if spec.kind == KIND_MOCK:
        return MockGenerator(spec)
    return HttpGenerator(spec, **kwargs)
