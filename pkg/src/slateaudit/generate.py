"""Abstractive slate generation and best-of-n selection.

A language model is prompted with all proposed questions (shuffled
independently per sample) and asked for k new summary questions, one per
line. Each generated question is embedded through the same pipeline as the
participant questions so the resulting slates are auditable against the
proposal pool. Samples whose completions do not parse to exactly k lines
after retries are reported as failures, never silently dropped.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import random
import re
from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np

from .audit import audit_fast
from .embedding import EmbeddingCache, EmbeddingMatrix, EmbeddingProvider, ProviderError, embed_questions
from .inference import utility_columns
from .model import Session, Slate, SlateMember, UtilityMatrix, slate_from_ids

DEFAULT_PROMPT_TEMPLATE = (
    "Given these questions : \n"
    "{questions} \n"
    "Generate {k} specific concise questions that exhaustively summarize these given questions \n"
    "as much as possible. Avoid long and generic high-level questions. Retain the same style, \n"
    "specificity  and length as the given questions. Return only the questions, one per line, \n"
    "without any additional text."
)


@dataclass(frozen=True)
class GenerationConfig:
    model_id: str = "mock"
    temperature: float = 1.0
    num_samples: int = 100
    shuffle_seed: int = 0
    prompt_template: str = DEFAULT_PROMPT_TEMPLATE
    max_retries: int = 2

    def __post_init__(self) -> None:
        if self.num_samples < 1:
            raise ValueError("num_samples must be >= 1")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if "{questions}" not in self.prompt_template or "{k}" not in self.prompt_template:
            raise ValueError("prompt template must contain {questions} and {k}")


class LlmClient(Protocol):
    def complete(self, prompt: str, temperature: float) -> str: ...


class TranscriptClient:
    """Replays a fixed list of completions; used by tests and replay runs."""

    def __init__(self, completions: Sequence[str]):
        self._completions = list(completions)
        self.calls: list[str] = []

    def complete(self, prompt: str, temperature: float) -> str:
        self.calls.append(prompt)
        if not self._completions:
            raise ProviderError("transcript exhausted")
        return self._completions.pop(0)


class MockSlateClient:
    """Offline generator: answers with k of the prompt's own questions,
    selected pseudo-randomly per prompt. Gives best-of-n something real to
    rank without any provider access."""

    def __init__(self, seed: int = 0):
        self.seed = seed

    def complete(self, prompt: str, temperature: float) -> str:
        lines = [l.strip() for l in prompt.splitlines()]
        try:
            k = int(re.search(r"Generate (\d+) ", prompt).group(1))  # type: ignore[union-attr]
        except AttributeError:
            raise ProviderError("mock client could not find the slate size in the prompt")
        stop = next(
            (i for i, l in enumerate(lines) if l.startswith("Generate ")), len(lines)
        )
        questions = [l for l in lines[1:stop] if l]
        if len(questions) < k:
            raise ProviderError("mock client found fewer questions than requested")
        digest = hashlib.sha256(f"{self.seed}\x00{prompt}".encode()).digest()
        rng = random.Random(int.from_bytes(digest[:8], "big"))
        return "\n".join(rng.sample(questions, k))


class HttpChatClient:
    """OpenAI-style chat completions endpoint; credentials from the
    environment (LLM_ENDPOINT / LLM_API_KEY)."""

    def __init__(self, model_id: str, endpoint: str | None = None, api_key_env: str = "LLM_API_KEY"):
        self.model_id = model_id
        self.endpoint = endpoint or os.environ.get("LLM_ENDPOINT")
        self.api_key_env = api_key_env
        if not self.endpoint:
            raise ProviderError("no LLM endpoint configured (set LLM_ENDPOINT)")

    def complete(self, prompt: str, temperature: float) -> str:  # pragma: no cover
        import requests

        headers = {}
        key = os.environ.get(self.api_key_env)
        if key:
            headers["Authorization"] = f"Bearer {key}"
        resp = requests.post(
            self.endpoint,
            json={
                "model": self.model_id,
                "messages": [{"role": "user", "content": prompt}],
                "temperature": temperature,
            },
            headers=headers,
            timeout=120,
        )
        if resp.status_code != 200:
            raise ProviderError(f"LLM endpoint returned {resp.status_code}: {resp.text[:200]}")
        return resp.json()["choices"][0]["message"]["content"]


_LINE_PREFIX = re.compile(r"^\s*(?:\d+\s*[.)]\s*|[-*•]\s+)")


def parse_slate_lines(completion: str) -> list[str]:
    """Non-empty completion lines with numbering and bullet prefixes removed."""
    out = []
    for line in completion.splitlines():
        stripped = _LINE_PREFIX.sub("", line).strip()
        if stripped:
            out.append(stripped)
    return out


@dataclass(frozen=True)
class FailedSample:
    index: int
    attempts: int
    reason: str


@dataclass(frozen=True)
class GeneratedSample:
    index: int
    slate: Slate
    jr_value: float
    attempts: int


@dataclass(frozen=True)
class GenerationResult:
    samples: tuple[GeneratedSample, ...]
    failures: tuple[FailedSample, ...]
    config: GenerationConfig

    @property
    def jr_values(self) -> tuple[float, ...]:
        return tuple(s.jr_value for s in self.samples)


def generate_slates(
    session: Session,
    embeddings: EmbeddingMatrix,
    matrix: UtilityMatrix,
    config: GenerationConfig,
    client: LlmClient,
    provider: EmbeddingProvider,
    cache: EmbeddingCache | None = None,
    transcript_path=None,
) -> GenerationResult:
    """Sample ``config.num_samples`` candidate slates from the client.

    The prompt lists the proposed questions in a fresh shuffle per sample
    (derived from ``shuffle_seed``). Generated questions are embedded and
    given clamped-cosine utility columns, and every parsed slate is audited
    immediately. The transcript (prompt, completion, attempt) is written as
    JSONL when a path is given so live runs can be replayed.
    """
    texts = [q.text for q in session.questions]
    samples: list[GeneratedSample] = []
    failures: list[FailedSample] = []
    transcript = open(transcript_path, "w", encoding="utf-8") if transcript_path else None
    try:
        for s in range(config.num_samples):
            rng = random.Random(config.shuffle_seed * 1_000_003 + s)
            shuffled = list(texts)
            rng.shuffle(shuffled)
            prompt = config.prompt_template.format(
                questions="\n".join(shuffled), k=session.k
            )
            lines: list[str] | None = None
            attempts = 0
            reason = ""
            for attempt in range(1 + config.max_retries):
                attempts = attempt + 1
                try:
                    completion = client.complete(prompt, temperature=config.temperature)
                except ProviderError as exc:
                    raise ProviderError(f"sample {s}: {exc}") from exc
                if transcript is not None:
                    transcript.write(
                        json.dumps(
                            {
                                "sample": s,
                                "attempt": attempts,
                                "prompt": prompt,
                                "completion": completion,
                            }
                        )
                        + "\n"
                    )
                parsed = parse_slate_lines(completion)
                if len(parsed) == session.k:
                    lines = parsed
                    break
                reason = f"parsed {len(parsed)} lines, expected {session.k}"
            if lines is None:
                failures.append(FailedSample(index=s, attempts=attempts, reason=reason))
                continue
            generated = embed_questions(
                lines,
                provider,
                ids=[f"llm:{s}:{i}" for i in range(len(lines))],
                cache=cache,
            )
            columns = utility_columns(embeddings, session, generated.vectors)
            members = []
            seen: set[str] = set()
            for i, text in enumerate(lines):
                qid = f"llm:{s}:{i}"
                if text in seen:
                    qid = f"{qid}:dup"  # keep k members even on repeated text
                seen.add(text)
                members.append(
                    SlateMember(
                        question_id=qid,
                        utilities=tuple(columns[:, i].tolist()),
                        text=text,
                    )
                )
            slate = Slate(members=tuple(members), provenance="llm")
            samples.append(
                GeneratedSample(
                    index=s,
                    slate=slate,
                    jr_value=audit_fast(matrix, slate, session.k).jr_value,
                    attempts=attempts,
                )
            )
    finally:
        if transcript is not None:
            transcript.close()
    return GenerationResult(
        samples=tuple(samples), failures=tuple(failures), config=config
    )


def best_of(samples: Sequence[GeneratedSample]) -> GeneratedSample:
    """The sample with the most representative slate: minimum JR value,
    earliest sample index on ties."""
    if not samples:
        raise ValueError("no successful samples to select from")
    best = samples[0]
    for s in samples[1:]:
        if s.jr_value < best.jr_value:
            best = s
    return best


def best_of_slates(
    slates: Sequence[Slate], matrix: UtilityMatrix, k: int
) -> tuple[Slate, float]:
    """best_of over plain slates audited under the given matrix."""
    if not slates:
        raise ValueError("no slates to select from")
    wrapped = [
        GeneratedSample(
            index=i, slate=s, jr_value=audit_fast(matrix, s, k).jr_value, attempts=1
        )
        for i, s in enumerate(slates)
    ]
    chosen = best_of(wrapped)
    return chosen.slate, chosen.jr_value


@dataclass(frozen=True)
class SiblingExpansion:
    slates: tuple[Slate, ...]
    jr_values: tuple[float, ...]
    mean_jr_value: float


def expand_siblings(session: Session, matrix: UtilityMatrix) -> SiblingExpansion:
    """Audit a human slate whose sibling groups were posed jointly.

    Every way of keeping one representative per sibling group (other members
    fixed) yields one expansion; each is audited and the arithmetic mean is
    reported. Without groups this is a single plain audit.
    """
    if session.human_slate is None:
        raise ValueError("session has no human slate")
    slate_ids = list(session.human_slate)
    id_set = set(slate_ids)
    groups = [sorted(g) for g in session.sibling_groups]
    for g in groups:
        outside = [qid for qid in g if qid not in id_set]
        if outside:
            raise ValueError(
                f"sibling group {g} is not contained in the human slate "
                f"(missing {outside})"
            )
    grouped = {qid for g in groups for qid in g}
    fixed = [qid for qid in slate_ids if qid not in grouped]
    expected = len(fixed) + len(groups)
    if expected != session.k:
        raise ValueError(
            f"human slate expands to {expected} members per expansion, "
            f"but k={session.k}"
        )
    # one representative per group, inserted where its group first appears
    positions = []
    used: set[frozenset] = set()
    for qid in slate_ids:
        if qid in grouped:
            owner = next(frozenset(g) for g in groups if qid in g)
            if owner not in used:
                used.add(owner)
                positions.append(sorted(owner))
        else:
            positions.append([qid])
    slates = []
    values = []
    for combo in _product(positions):
        slate = slate_from_ids(matrix, combo, provenance="human")
        slates.append(slate)
        values.append(audit_fast(matrix, slate, session.k).jr_value)
    return SiblingExpansion(
        slates=tuple(slates),
        jr_values=tuple(values),
        mean_jr_value=float(np.mean(values)),
    )


def _product(choice_lists: list[list[str]]):
    import itertools

    yield from itertools.product(*choice_lists)


def mean_ci95(values: Sequence[float]) -> tuple[float, float]:
    """Sample mean and half-width of the normal-approximation 95% interval."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("no values")
    if arr.size == 1:
        return float(arr[0]), 0.0
    half = 1.96 * float(arr.std(ddof=1)) / math.sqrt(arr.size)
    return float(arr.mean()), half
