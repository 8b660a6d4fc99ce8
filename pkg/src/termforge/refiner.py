"""Prompt construction, chat-completion client, and candidate selection.

Prompts are rendered from versioned template files shipped with the package
(templates/*.txt), never from inline strings. The client talks to any
OpenAI-style chat-completion endpoint: JSON body {model, messages} with
bearer-token auth; the key comes from the TERMFORGE_LLM_API_KEY environment
variable and is never logged.

Candidate selection supports two strategies over the 11 candidates collected
per term (10 annotator outputs plus one machine translation): "llm_only" asks
the judge model to pick, "vote_then_llm" first accepts any candidate occurring
in more than 5 of the 11 entries and only consults the judge when no such
majority exists.
"""

from __future__ import annotations

import logging
import os
import re
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from importlib import resources

import requests

from . import errors
from .normalize import vote_key

log = logging.getLogger("termforge.refiner")

ENV_API_KEY = "TERMFORGE_LLM_API_KEY"
TEMPLATE_IDS = (
    "refine",
    "repair",
    "select_best",
    "extract_terms",
    "filter_non_ai",
    "classify_domain",
    "needs_translation",
)
N_CANDIDATES = 11
MAJORITY_THRESHOLD = 5  # a candidate wins with strictly more occurrences

TERM_ARROW = " ⇒ "  # the "source ⇒ target" separator in dictionary blocks

_PLACEHOLDER_RE = re.compile(r"\{([a-z_]+)\}")


@dataclass(frozen=True, eq=False)
class PromptSpec:
    """A rendered prompt plus the values that filled it."""

    template_id: str
    rendered_text: str
    fields: dict[str, str]


def template_text(template_id: str) -> str:
    if template_id not in TEMPLATE_IDS:
        raise ValueError(f"unknown template {template_id!r}")
    return (
        resources.files("termforge")
        .joinpath(f"templates/{template_id}.txt")
        .read_text(encoding="utf-8")
    )


def render_template(template_id: str, fields: dict[str, str]) -> PromptSpec:
    """Fill every placeholder of a template; placeholders may not remain."""
    text = template_text(template_id)
    names = set(_PLACEHOLDER_RE.findall(text))
    missing = names - fields.keys()
    if missing:
        raise ValueError(f"template {template_id!r} missing fields: {sorted(missing)}")
    rendered = _PLACEHOLDER_RE.sub(lambda m: str(fields[m.group(1)]), text)
    return PromptSpec(template_id=template_id, rendered_text=rendered, fields=dict(fields))


def format_term_block(terms: list[tuple[str, str]] | tuple[tuple[str, str], ...]) -> str:
    """One "source ⇒ target" line per term, input order preserved."""
    return "\n".join(f"{source}{TERM_ARROW}{target}" for source, target in terms)


def parse_term_block(block: str) -> list[tuple[str, str]]:
    """Inverse of format_term_block (used to audit rendered prompts)."""
    pairs: list[tuple[str, str]] = []
    for line in block.splitlines():
        line = line.strip()
        if not line:
            continue
        if TERM_ARROW not in line:
            raise ValueError(f"not a term line: {line!r}")
        source, target = line.split(TERM_ARROW, 1)
        pairs.append((source, target))
    return pairs


def build_refine_prompt(
    src_text: str,
    initial_translation: str,
    terms: list[tuple[str, str]],
    source_lang: str = "en",
    target_lang: str = "fr",
) -> PromptSpec:
    """Prompt asking the model to enforce term translations in an MT output."""
    return render_template(
        "refine",
        {
            "source_lang": source_lang,
            "target_lang": target_lang,
            "term_block": format_term_block(terms),
            "source_text": src_text,
            "initial_translation": initial_translation,
        },
    )


@dataclass(frozen=True)
class CandidateSet:
    """Exactly 11 candidate translations for one term, order preserved."""

    term: str
    language: str
    candidates: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "candidates", tuple(self.candidates))
        if len(self.candidates) != N_CANDIDATES:
            raise ValueError(
                f"a candidate set holds exactly {N_CANDIDATES} entries, "
                f"got {len(self.candidates)}"
            )
        if any(not c.strip() for c in self.candidates):
            raise ValueError("candidates must be nonempty after trimming")


def majority_vote(candidate_set: CandidateSet) -> str | None:
    """Return the candidate occurring in more than 5 of the 11 entries, if any.

    Occurrences are counted under exact-match equality after NFC
    normalization, trimming, and casefolding. The returned surface is the most
    frequent original spelling inside the winning group (ties broken
    lexicographically), which keeps the result permutation-invariant.
    """
    counts = Counter(vote_key(c) for c in candidate_set.candidates)
    key, count = max(counts.items(), key=lambda kv: (kv[1], kv[0]))
    if count <= MAJORITY_THRESHOLD:
        return None
    surfaces = Counter(c for c in candidate_set.candidates if vote_key(c) == key)
    return min(surfaces.items(), key=lambda kv: (-kv[1], kv[0]))[0]


def build_select_prompt(candidate_set: CandidateSet, contexts: list[str]) -> PromptSpec:
    """Prompt enumerating the 11 candidates with stable labels 1-11.

    Duplicate candidates are NOT collapsed: labels must stay aligned with the
    input order so the parsed answer indexes the original list.
    """
    if len(contexts) > 3:
        raise ValueError(f"at most 3 contexts allowed, got {len(contexts)}")
    context_block = "\n".join(f"- {c}" for c in contexts) or "(no context provided)"
    candidate_block = "\n".join(
        f"{i + 1}. {c}" for i, c in enumerate(candidate_set.candidates)
    )
    return render_template(
        "select_best",
        {
            "term": candidate_set.term,
            "language": candidate_set.language,
            "context_block": context_block,
            "candidate_block": candidate_block,
        },
    )


_LABEL_RE = re.compile(r"\s*(\d{1,2})\s*\.?\s*")


def parse_select_response(text: str) -> int:
    """Parse a bare 1-11 label; returns the 0-based candidate index."""
    match = _LABEL_RE.fullmatch(text)
    if not match:
        raise errors.InvalidLabelError(f"expected a bare label 1-{N_CANDIDATES}, got {text!r}")
    label = int(match.group(1))
    if not (1 <= label <= N_CANDIDATES):
        raise errors.InvalidLabelError(f"label {label} outside 1-{N_CANDIDATES}")
    return label - 1


@dataclass(frozen=True)
class ClientConfig:
    """Connection settings; the API key itself stays in the environment."""

    base_url: str
    model_name: str
    timeout: float = 30.0
    max_retries: int = 3
    max_concurrency: int = 4
    backoff_base: float = 0.5
    api_key_env: str = ENV_API_KEY

    def __post_init__(self) -> None:
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.max_concurrency < 1:
            raise ValueError("max_concurrency must be >= 1")


def _redacted(headers: dict[str, str]) -> dict[str, str]:
    return {k: ("Bearer ***" if k.lower() == "authorization" else v) for k, v in headers.items()}


def chat_complete(cfg: ClientConfig, prompt: PromptSpec) -> str:
    """POST the prompt to the chat-completion endpoint and return the text.

    Transient failures (timeouts, connection errors, HTTP 429 and 5xx) are
    retried with exponential backoff up to cfg.max_retries extra attempts.
    401/403 raise AuthError immediately; a missing key raises AuthError before
    any network traffic. Requests and responses are logged with the key
    redacted.
    """
    key = os.environ.get(cfg.api_key_env)
    if not key:
        raise errors.AuthError(
            f"environment variable {cfg.api_key_env} is not set; refusing to call the endpoint"
        )
    body = {
        "model": cfg.model_name,
        "messages": [{"role": "user", "content": prompt.rendered_text}],
    }
    headers = {"Authorization": f"Bearer {key}"}
    log.debug("POST %s headers=%s template=%s", cfg.base_url, _redacted(headers), prompt.template_id)

    last_status: int | None = None
    for attempt in range(cfg.max_retries + 1):
        if attempt:
            time.sleep(cfg.backoff_base * (2 ** (attempt - 1)))
        try:
            response = requests.post(cfg.base_url, json=body, headers=headers, timeout=cfg.timeout)
        except requests.Timeout:
            last_status = None
            continue
        except requests.ConnectionError:
            last_status = None
            continue
        if response.status_code in (401, 403):
            raise errors.AuthError(f"endpoint rejected the key (HTTP {response.status_code})")
        if response.status_code == 429 or response.status_code >= 500:
            last_status = response.status_code
            continue
        if response.status_code != 200:
            raise errors.MalformedResponseError(
                f"unexpected HTTP {response.status_code} from {cfg.base_url}"
            )
        try:
            payload = response.json()
            text = payload["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise errors.MalformedResponseError(
                f"reply is not a chat completion: {exc}"
            ) from exc
        if not isinstance(text, str):
            raise errors.MalformedResponseError("completion content is not a string")
        log.debug("completion received (%d chars)", len(text))
        return text
    if last_status == 429:
        raise errors.RateLimitError(f"still rate-limited after {cfg.max_retries} retries")
    if last_status is not None:
        raise errors.MalformedResponseError(
            f"endpoint kept failing with HTTP {last_status} after {cfg.max_retries} retries"
        )
    raise errors.TimeoutError(
        f"no response from {cfg.base_url} after {cfg.max_retries} retries"
    )


def chat_complete_many(cfg: ClientConfig, prompts: list[PromptSpec]) -> list[str]:
    """Run several completions with at most cfg.max_concurrency in flight."""
    with ThreadPoolExecutor(max_workers=cfg.max_concurrency) as pool:
        return list(pool.map(lambda p: chat_complete(cfg, p), prompts))


def select_best(
    candidate_set: CandidateSet,
    contexts: list[str],
    cfg: ClientConfig,
    strategy: str = "vote_then_llm",
) -> tuple[str, str]:
    """Pick the best of the 11 candidates; returns (candidate, provenance).

    "llm_only" always asks the judge once per term. "vote_then_llm" first
    tries the majority rule and performs no network call when it decides.
    A judge answer violating the label grammar is reprompted once, then the
    error propagates. Provenance is "vote" or "llm".
    """
    if strategy not in ("llm_only", "vote_then_llm"):
        raise ValueError(f"unknown strategy {strategy!r}")
    if strategy == "vote_then_llm":
        winner = majority_vote(candidate_set)
        if winner is not None:
            return winner, "vote"
    prompt = build_select_prompt(candidate_set, contexts)
    answer = chat_complete(cfg, prompt)
    try:
        index = parse_select_response(answer)
    except errors.InvalidLabelError:
        log.warning("judge answer %r violates the label grammar; reprompting once", answer)
        answer = chat_complete(cfg, prompt)
        index = parse_select_response(answer)
    return candidate_set.candidates[index], "llm"
