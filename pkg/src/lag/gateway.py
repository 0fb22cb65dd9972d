"""Prompt assembly, completion providers, and candidate-triple parsing.

Prompts are built by a fixed template so the same bundle always yields the
same string. Providers share one call shape: the scripted one answers from a
directory of canned completions keyed by prompt fingerprint, the HTTP one
speaks the common chat-completion wire format. Completions are mined for
N-Triples lines, with a bounded repair loop for lines that fail to parse.
"""

from __future__ import annotations

import json
import os
import re
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import httpx

from .errors import BudgetExceeded, EmptyCompletion, MockMiss, ProviderError
from .rdf import IRIError, RdfSyntaxError, Triple, parse_ntriples_line

Audit = Optional[Callable[[dict], None]]


# ---------------------------------------------------------------------------
# Prompt assembly
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PromptBundle:
    """Everything one completion call needs, as pre-serialized text slices."""

    task_instruction: str
    ontology_excerpt: str
    context_facts: str
    amodal_kg: str
    output_contract: str
    heuristic_stages: tuple = ()
    token_budget: int = 8000


def _slices(bundle: PromptBundle) -> list[tuple[str, str]]:
    return [
        ("task_instruction", bundle.task_instruction),
        ("heuristic_stages", "\n".join(bundle.heuristic_stages)),
        ("ontology_excerpt", bundle.ontology_excerpt),
        ("context_facts", bundle.context_facts),
        ("amodal_kg", bundle.amodal_kg),
        ("output_contract", bundle.output_contract),
    ]


def build_prompt(bundle: PromptBundle) -> str:
    """Render the bundle with the fixed section template.

    Pure: identical bundles give identical strings. Token cost is estimated
    at one token per four characters.
    """
    parts = [bundle.task_instruction.rstrip()]
    for i, stage in enumerate(bundle.heuristic_stages, start=1):
        parts.append(f"## Stage {i}\n{stage.rstrip()}")
    parts.append(f"## Ontology\n{bundle.ontology_excerpt.rstrip()}")
    facts = bundle.context_facts.rstrip()
    parts.append("## Known facts\n" + (facts if facts else "(no prior facts)"))
    parts.append(f"## Case graph\n{bundle.amodal_kg.rstrip()}")
    parts.append(f"## Output contract\n{bundle.output_contract.rstrip()}")
    prompt = "\n\n".join(parts) + "\n"

    estimated = len(prompt) // 4
    if estimated > bundle.token_budget:
        name, text = max(_slices(bundle), key=lambda kv: (len(kv[1]), kv[0]))
        raise BudgetExceeded(
            f"prompt needs ~{estimated} tokens but the budget is "
            f"{bundle.token_budget}; shrink {name} ({len(text)} chars)",
            largest_slice=name,
        )
    return prompt


# ---------------------------------------------------------------------------
# Providers
# ---------------------------------------------------------------------------


def fingerprint(prompt: str) -> str:
    """64-bit FNV-1a over the normalized prompt, as 16 hex digits.

    Normalization strips trailing whitespace per line and blank lines at
    either end, so cosmetic drift does not break scripted matches.
    """
    lines = [line.rstrip() for line in prompt.split("\n")]
    text = "\n".join(lines).strip("\n")
    h = 0xCBF29CE484222325
    for byte in text.encode("utf-8"):
        h ^= byte
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return f"{h:016x}"


class MockProvider:
    """Deterministic provider scripted by files in one directory.

    <stem>.fingerprint.txt next to <stem>.completion.txt answers the prompt
    whose fingerprint matches exactly; <stem>.contains.txt matches any prompt
    containing its text. Fingerprints win over contains rules, and stems are
    tried in sorted order. An unmatched prompt is a test-setup bug and fails
    loudly rather than falling back.
    """

    kind = "mock"

    def __init__(self, script_dir):
        self.script_dir = Path(script_dir)
        self._by_fingerprint: dict[str, str] = {}
        self._contains: list[tuple[str, str]] = []
        for fp_file in sorted(self.script_dir.glob("*.fingerprint.txt")):
            stem = fp_file.name[: -len(".fingerprint.txt")]
            completion = self._completion_for(stem)
            fp = fp_file.read_text().strip()
            self._by_fingerprint.setdefault(fp, completion)
        for rule_file in sorted(self.script_dir.glob("*.contains.txt")):
            stem = rule_file.name[: -len(".contains.txt")]
            needle = rule_file.read_text().strip()
            self._contains.append((needle, self._completion_for(stem)))

    def _completion_for(self, stem: str) -> str:
        path = self.script_dir / f"{stem}.completion.txt"
        if not path.exists():
            raise ProviderError(f"mock script {stem!r} has no completion file")
        return path.read_text()

    def complete(
        self,
        prompt: str,
        temperature: float = 0.0,
        max_tokens: int = 1024,
        seed: Optional[int] = None,
        audit: Audit = None,
    ) -> str:
        fp = fingerprint(prompt)
        if audit:
            audit({"event": "llm-request", "provider": "mock", "fingerprint": fp})
        text = self._by_fingerprint.get(fp)
        if text is None:
            for needle, completion in self._contains:
                if needle in prompt:
                    text = completion
                    break
        if text is None:
            head = prompt[:120].replace("\n", " ")
            raise MockMiss(
                f"no scripted completion for fingerprint {fp} (prompt starts: {head!r})"
            )
        if audit:
            audit({"event": "llm-response", "provider": "mock", "chars": len(text)})
        return text


class HttpProvider:
    """Chat-completion endpoint client with bounded retry.

    Transient failures (transport errors, 429, 5xx) are retried with
    exponential backoff up to the retry budget; other statuses fail at once.
    The bearer token is read from the environment variable named at
    construction, never stored in config files.
    """

    kind = "http"

    def __init__(
        self,
        base_url: str,
        model: str,
        auth_env: str = "",
        timeout: float = 30.0,
        retries: int = 2,
        backoff: float = 0.5,
    ):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.auth_env = auth_env
        self.timeout = timeout
        self.retries = retries
        self.backoff = backoff

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self.auth_env:
            token = os.environ.get(self.auth_env)
            if not token:
                raise ProviderError(
                    f"auth environment variable {self.auth_env!r} is not set"
                )
            headers["Authorization"] = f"Bearer {token}"
        return headers

    def complete(
        self,
        prompt: str,
        temperature: float = 0.0,
        max_tokens: int = 1024,
        seed: Optional[int] = None,
        audit: Audit = None,
    ) -> str:
        body: dict = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": temperature,
            "max_tokens": max_tokens,
        }
        if seed is not None:
            body["seed"] = seed
        url = f"{self.base_url}/chat/completions"
        headers = self._headers()
        last_error = ""
        for attempt in range(self.retries + 1):
            if attempt:
                time.sleep(self.backoff * 2 ** (attempt - 1))
            if audit:
                audit({"event": "llm-request", "provider": "http", "attempt": attempt})
            try:
                response = httpx.post(url, json=body, headers=headers, timeout=self.timeout)
            except httpx.TimeoutException as e:
                last_error = f"timeout: {e}"
                continue
            except httpx.TransportError as e:
                last_error = f"transport: {e}"
                continue
            if response.status_code == 429 or response.status_code >= 500:
                last_error = f"status {response.status_code}"
                continue
            if response.status_code != 200:
                raise ProviderError(f"completion endpoint returned {response.status_code}")
            try:
                text = response.json()["choices"][0]["message"]["content"]
            except (KeyError, IndexError, TypeError, ValueError) as e:
                raise ProviderError(f"malformed completion payload: {e}")
            if not isinstance(text, str):
                raise ProviderError("completion content is not a string")
            if audit:
                audit(
                    {
                        "event": "llm-response",
                        "provider": "http",
                        "chars": len(text),
                        "retries": attempt,
                    }
                )
            return text
        raise ProviderError(
            f"gave up after {self.retries + 1} attempts, last failure: {last_error}"
        )


def complete(
    provider,
    prompt: str,
    temperature: float = 0.0,
    max_tokens: int = 1024,
    seed: Optional[int] = None,
    audit: Audit = None,
) -> str:
    """Ask the provider for one completion."""
    return provider.complete(
        prompt, temperature=temperature, max_tokens=max_tokens, seed=seed, audit=audit
    )


# ---------------------------------------------------------------------------
# Candidate parsing and the repair loop
# ---------------------------------------------------------------------------


@dataclass
class CandidateTriples:
    accepted_syntax: list = field(default_factory=list)  # list[Triple]
    rejected_lines: list = field(default_factory=list)  # list[(line, reason)]
    raw_completion: str = ""
    repair_rounds_used: int = 0


_FENCE = re.compile(r"```[^\n]*\n(.*?)(?:```|\Z)", re.DOTALL)


def _completion_body(text: str) -> str:
    """First fenced code block if present, else the whole text."""
    m = _FENCE.search(text)
    return m.group(1) if m else text


def _parse_round(text: str) -> tuple[list[Triple], list[tuple[str, str]]]:
    accepted: list[Triple] = []
    rejected: list[tuple[str, str]] = []
    for line in text.split("\n"):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            triple = parse_ntriples_line(line)
        except (RdfSyntaxError, IRIError, ValueError, TypeError) as e:
            rejected.append((line, str(e)))
            continue
        if triple is not None:
            accepted.append(triple)
    return accepted, rejected


def _repair_prompt(prompt: str, rejects: list[tuple[str, str]]) -> str:
    lines = [prompt.rstrip(), "", "Your previous reply contained lines that are not valid N-Triples:"]
    for line, reason in rejects:
        lines.append(f"  {line.strip()}")
        lines.append(f"    problem: {reason}")
    lines.append("Re-emit only the corrected statements, one N-Triples line each, nothing else.")
    return "\n".join(lines) + "\n"


def parse_candidate_triples(
    completion: str,
    provider=None,
    prompt: str = "",
    max_repairs: int = 0,
    temperature: float = 0.0,
    max_tokens: int = 1024,
    seed: Optional[int] = None,
    audit: Audit = None,
) -> CandidateTriples:
    """Mine N-Triples statements out of a completion.

    Parses line by line (first fenced code block when there is one). While
    any line fails and repair rounds remain, the provider is re-prompted with
    an error report and the new statements are merged in. Every accepted
    triple comes verbatim from some completion round; nothing is synthesized.
    """
    accepted: list[Triple] = []
    seen: set[Triple] = set()
    rejected: dict[str, str] = {}
    rounds: list[str] = []
    rounds_used = 0
    current = completion

    while True:
        rounds.append(current)
        acc, rej = _parse_round(_completion_body(current))
        for triple in acc:
            if triple not in seen:
                seen.add(triple)
                accepted.append(triple)
        for line, reason in rej:
            rejected.setdefault(line, reason)
        if not rej or rounds_used >= max_repairs or provider is None:
            break
        rounds_used += 1
        current = provider.complete(
            _repair_prompt(prompt, rej),
            temperature=temperature,
            max_tokens=max_tokens,
            seed=seed,
            audit=audit,
        )

    if not accepted:
        raise EmptyCompletion(
            f"no parseable triples after {rounds_used} repair round(s)"
        )
    return CandidateTriples(
        accepted_syntax=accepted,
        rejected_lines=list(rejected.items()),
        raw_completion="\n".join(rounds),
        repair_rounds_used=rounds_used,
    )
