"""Multiple-choice evaluation harness for the demo language.

Tasks are six-option questions written in the object language.  The runner
assembles a fixed context prompt (grammar text plus vocabulary table ahead
of the question), sends it through a pluggable transport, pulls the final
answer letter out of the response, and scores exact match.  A replay
transport reads canned responses from disk so the whole path runs without
a network.
"""

from __future__ import annotations

import json
import re
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

from ._fileio import atomic_write_text
from .errors import DataError, TransportError

OPTION_LABELS = ("A", "B", "C", "D", "E", "F")

_CONTEXT_PROMPT = (
    "You are given the Camlang grammar book (Camlang.md) and English-Camlang "
    "vocabulary (Vocab.xlsx) for the Camlang language. You are asked to use these "
    "two resources to understand and answer the question in Camlang.\n"
    "\n"
    "=== Camlang Grammar ===\n"
    "\n"
    "{grammar_text}\n"
    "\n"
    "=== English-Camlang Vocabulary ===\n"
    "\n"
    "{vocab_tsv}\n"
    "\n"
    "Below is a multiple-choice question written in Camlang. You are allowed to "
    "generate reasoning steps and an explanation to demonstrate your choice. "
    "However, the final line of your response must be exactly in this format, "
    "where {{your_answer}} is the option letter (A, B, C, D, E, or F): "
    "The final answer is {{your_answer}}.\n"
    "\n"
    "{question}\n"
    "\n"
    "{option_lines}"
)

# The letter may arrive wrapped in quotes or bold markers and followed by
# punctuation, but never run into a longer word ("... is Everything").
_ANSWER_RE = re.compile(
    r"the\s+final\s+answer\s+is\s*:?\s*[\"'“‘*_(\[]*([A-Fa-f])"
    r"[\"'”’*_)\]]*(?![0-9A-Za-z])",
    re.IGNORECASE,
)


@dataclass(frozen=True)
class TaskInstance:
    """One question with exactly six labelled options and a gold label."""

    id: str
    question: str
    options: Mapping[str, str]
    gold: str
    english_source: str = ""
    gloss: str = ""

    def __post_init__(self) -> None:
        if not self.id:
            raise DataError("task instance needs an id")
        opts = dict(self.options)
        if tuple(sorted(opts)) != OPTION_LABELS:
            raise DataError(
                f"task {self.id!r}: options must be labelled A-F exactly, "
                f"got {sorted(opts)}"
            )
        if any(not text.strip() for text in opts.values()):
            raise DataError(f"task {self.id!r}: empty option text")
        if self.gold not in OPTION_LABELS:
            raise DataError(f"task {self.id!r}: gold label {self.gold!r} not in A-F")
        if not self.question.strip():
            raise DataError(f"task {self.id!r}: empty question")
        object.__setattr__(self, "options", opts)


@dataclass(frozen=True)
class ResourceBundle:
    """Grammar text and the model-facing vocabulary table."""

    grammar_text: str
    vocab_tsv: str

    def __post_init__(self) -> None:
        if not self.grammar_text.strip():
            raise DataError("missing resource: grammar text is empty")
        if not self.vocab_tsv.strip():
            raise DataError("missing resource: vocabulary table is empty")
        header = self.vocab_tsv.splitlines()[0].lower()
        if "etymology" in header.split("\t"):
            raise DataError("vocabulary table must not carry the etymology column")


@dataclass(frozen=True)
class ModelEndpointConfig:
    """Where and how to reach a chat-completion endpoint."""

    base_url: str
    model_name: str
    api_key: str = ""
    timeout_s: float = 600.0
    retries: int = 2
    temperature: float | None = None

    def __post_init__(self) -> None:
        if not self.base_url:
            raise DataError("endpoint config needs a base URL")
        if self.timeout_s <= 0:
            raise DataError(f"timeout must be positive, got {self.timeout_s}")
        if self.retries < 0:
            raise DataError(f"retry budget must be non-negative, got {self.retries}")

    @classmethod
    def from_env(cls, model_name: str, **overrides) -> "ModelEndpointConfig":
        import os

        base = os.environ.get("FORGE_API_BASE", "")
        if not base:
            raise DataError("FORGE_API_BASE is not set; no endpoint to talk to")
        key = os.environ.get("FORGE_API_KEY", "")
        return cls(base_url=base, model_name=model_name, api_key=key, **overrides)


@dataclass(frozen=True)
class InstanceResult:
    instance_id: str
    gold: str
    response: str
    extracted: str | None
    correct: bool
    latency_s: float
    transport_error: bool = False


@dataclass(frozen=True)
class RunReport:
    results: tuple[InstanceResult, ...]
    em: float
    mean_latency_s: float

    def render(self) -> str:
        lines = ["instance_id\tgold\textracted\tcorrect\ttransport_error\tlatency_s\tresponse"]
        for r in self.results:
            lines.append(
                "\t".join(
                    (
                        r.instance_id,
                        r.gold,
                        r.extracted or "-",
                        "true" if r.correct else "false",
                        "true" if r.transport_error else "false",
                        f"{r.latency_s:.6f}",
                        json.dumps(r.response, ensure_ascii=False),
                    )
                )
            )
        lines.append("")
        lines.append(f"em\t{self.em:.6f}")
        lines.append(f"mean_latency_s\t{self.mean_latency_s:.6f}")
        lines.append(f"n_instances\t{len(self.results)}")
        return "\n".join(lines) + "\n"


def load_tasks(source) -> list[TaskInstance]:
    """Read task instances from a JSON-lines file (one object per line)."""

    if hasattr(source, "read"):
        lines = source.read().splitlines()
    else:
        lines = Path(source).read_text(encoding="utf-8").splitlines()

    tasks: list[TaskInstance] = []
    seen: set[str] = set()
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as err:
            raise DataError(f"line {lineno}: not valid JSON ({err.msg})")
        known = {"id", "question", "options", "gold", "english_source", "gloss"}
        unknown = set(raw) - known
        if unknown:
            raise DataError(f"line {lineno}: unknown fields {sorted(unknown)}")
        try:
            task = TaskInstance(
                id=str(raw.get("id", "")),
                question=raw.get("question", ""),
                options=raw.get("options", {}),
                gold=raw.get("gold", ""),
                english_source=raw.get("english_source", ""),
                gloss=raw.get("gloss", ""),
            )
        except TypeError:
            raise DataError(f"line {lineno}: malformed task object")
        if task.id in seen:
            raise DataError(f"line {lineno}: duplicate task id {task.id!r}")
        seen.add(task.id)
        tasks.append(task)
    return tasks


def load_resources(directory, grammar_name: str = "grammar.md", vocab_name: str = "vocab.tsv") -> ResourceBundle:
    directory = Path(directory)
    grammar = directory / grammar_name
    vocab = directory / vocab_name
    for p in (grammar, vocab):
        if not p.is_file():
            raise DataError(f"missing resource: {p}")
    return ResourceBundle(
        grammar_text=grammar.read_text(encoding="utf-8"),
        vocab_tsv=vocab.read_text(encoding="utf-8"),
    )


def build_prompt(instance: TaskInstance, resources: ResourceBundle, mode: str = "context") -> str:
    """Assemble the full evaluation prompt. Deterministic for fixed inputs."""

    if mode != "context":
        raise DataError(f"unsupported mode {mode!r}; only 'context' is implemented")
    option_lines = "\n".join(
        f"{label}. {instance.options[label]}" for label in OPTION_LABELS
    )
    return _CONTEXT_PROMPT.format(
        grammar_text=resources.grammar_text,
        vocab_tsv=resources.vocab_tsv,
        question=instance.question,
        option_lines=option_lines,
    )


def extract_answer(response: str) -> str | None:
    """The option letter from the LAST "The final answer is X" in the text."""

    matches = _ANSWER_RE.findall(response)
    return matches[-1].upper() if matches else None


def replay_transport(directory) -> Callable[[TaskInstance, str], str]:
    """A transport that reads ``<instance id>.txt`` instead of calling out."""

    directory = Path(directory)
    if not directory.is_dir():
        raise DataError(f"replay directory {directory} does not exist")

    def transport(instance: TaskInstance, prompt: str) -> str:
        path = directory / f"{instance.id}.txt"
        if not path.is_file():
            raise DataError(f"no replay transcript for instance {instance.id!r} at {path}")
        return path.read_text(encoding="utf-8")

    return transport


def http_transport(config: ModelEndpointConfig) -> Callable[[TaskInstance, str], str]:
    """A chat-completion transport with the configured retry budget."""

    import httpx

    url = config.base_url.rstrip("/") + "/chat/completions"
    headers = {"Content-Type": "application/json"}
    if config.api_key:
        headers["Authorization"] = f"Bearer {config.api_key}"

    def transport(instance: TaskInstance, prompt: str) -> str:
        payload = {
            "model": config.model_name,
            "messages": [{"role": "user", "content": prompt}],
        }
        if config.temperature is not None:
            payload["temperature"] = config.temperature
        last: Exception | None = None
        for _ in range(config.retries + 1):
            try:
                reply = httpx.post(url, json=payload, headers=headers, timeout=config.timeout_s)
                reply.raise_for_status()
                return reply.json()["choices"][0]["message"]["content"]
            except (httpx.HTTPError, KeyError, IndexError, ValueError) as err:
                last = err
        raise TransportError(f"instance {instance.id!r}: {last}")

    return transport


def run_eval(
    tasks: Sequence[TaskInstance],
    resources: ResourceBundle,
    transport: Callable[[TaskInstance, str], str],
    *,
    mode: str = "context",
    parallelism: int = 1,
    out_path=None,
) -> RunReport:
    """Evaluate every task once and score exact match.

    Unextractable answers and transport failures count as incorrect; nothing
    leaves the denominator.  The report is ordered by instance id no matter
    how requests interleave.
    """

    if not tasks:
        raise DataError("no tasks to evaluate")
    if parallelism < 1:
        raise DataError(f"parallelism must be at least 1, got {parallelism}")

    def one(instance: TaskInstance) -> InstanceResult:
        prompt = build_prompt(instance, resources, mode)
        started = time.perf_counter()
        try:
            response = transport(instance, prompt)
            failed = False
        except TransportError as err:
            response = f"[transport error] {err.message}"
            failed = True
        latency = time.perf_counter() - started
        extracted = None if failed else extract_answer(response)
        return InstanceResult(
            instance_id=instance.id,
            gold=instance.gold,
            response=response,
            extracted=extracted,
            correct=extracted == instance.gold,
            latency_s=latency,
            transport_error=failed,
        )

    if parallelism == 1:
        results = [one(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            results = list(pool.map(one, tasks))

    results.sort(key=lambda r: r.instance_id)
    report = RunReport(
        results=tuple(results),
        em=sum(r.correct for r in results) / len(results),
        mean_latency_s=statistics.fmean(r.latency_s for r in results),
    )
    if out_path is not None:
        atomic_write_text(out_path, report.render())
    return report


@dataclass(frozen=True)
class LengthStats:
    """Question-length distribution: whitespace tokens, 5-wide bins."""

    language: str
    count: int
    mean_tokens: float
    bins: tuple[tuple[int, int, int], ...]  # (low, high, count), e.g. (1, 5, 12)


def length_stats(tasks: Sequence[TaskInstance], language: str) -> LengthStats:
    if language not in ("camlang", "english_source"):
        raise DataError(f"language must be 'camlang' or 'english_source', got {language!r}")
    if not tasks:
        raise DataError("no tasks to measure")
    counts = []
    for task in tasks:
        text = task.question if language == "camlang" else task.english_source
        if not text.strip():
            raise DataError(f"task {task.id!r} has no {language} text")
        counts.append(len(text.split()))
    top = max(counts)
    bins = []
    low = 1
    while low <= top:
        high = low + 4
        bins.append((low, high, sum(1 for c in counts if low <= c <= high)))
        low = high + 1
    return LengthStats(
        language=language,
        count=len(counts),
        mean_tokens=statistics.fmean(counts),
        bins=tuple(bins),
    )
