"""Cross-annotator translation consistency via ROUGE.

Annotators translate the same sentences; agreement between their token
sequences is measured with ROUGE-1/2/L F-scores on a 0-100 scale, averaged
over sentences and then over unordered annotator pairs.  Tokens are
whatever the corpus row says they are -- whole words or hand-segmented
morphs -- so the same machinery scores both granularities.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .errors import DataError

GRANULARITIES = ("word", "morpheme")


@dataclass(frozen=True)
class PrfScore:
    """Precision / recall / F for one candidate-reference pair, 0-100.

    ``empty_reference`` marks the degenerate case where the reference side
    had nothing to match against (no tokens, or too short for the n-gram
    order) while the candidate did.
    """

    precision: float
    recall: float
    f: float
    empty_reference: bool = False


@dataclass(frozen=True)
class RougeScores:
    """Averaged ROUGE-1/2/L F-scores, 0-100."""

    r1: float
    r2: float
    rl: float


@dataclass(frozen=True)
class TranslationSet:
    """One annotator's translations for one round, keyed by sentence id."""

    round: int
    annotator_id: str
    sentences: Mapping[str, tuple[str, ...]]
    granularity: str

    def __post_init__(self) -> None:
        if self.granularity not in GRANULARITIES:
            raise DataError(
                f"granularity must be one of {', '.join(GRANULARITIES)}, "
                f"got {self.granularity!r}"
            )
        if not self.annotator_id:
            raise DataError("annotator id must be non-empty")
        object.__setattr__(
            self,
            "sentences",
            {sid: tuple(tokens) for sid, tokens in dict(self.sentences).items()},
        )


def _prf(match: float, cand_total: int, ref_total: int) -> PrfScore:
    if cand_total == 0 and ref_total == 0:
        # nothing on either side: the sequences are (vacuously) identical
        return PrfScore(100.0, 100.0, 100.0)
    if ref_total == 0:
        return PrfScore(0.0, 0.0, 0.0, empty_reference=True)
    if cand_total == 0:
        return PrfScore(0.0, 0.0, 0.0)
    p = match / cand_total
    r = match / ref_total
    f = 2 * p * r / (p + r) if p + r else 0.0
    return PrfScore(100 * p, 100 * r, 100 * f)


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def rouge_n(candidate: Sequence[str], reference: Sequence[str], n: int) -> PrfScore:
    """Clipped n-gram overlap between two token sequences."""

    if n < 1:
        raise DataError(f"n-gram order must be at least 1, got {n}")
    cand = _ngrams(candidate, n)
    ref = _ngrams(reference, n)
    match = sum(min(count, ref[gram]) for gram, count in cand.items())
    return _prf(match, sum(cand.values()), sum(ref.values()))


def _lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for tok_a in a:
        cur = [0]
        for j, tok_b in enumerate(b, start=1):
            cur.append(prev[j - 1] + 1 if tok_a == tok_b else max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def rouge_l(candidate: Sequence[str], reference: Sequence[str]) -> PrfScore:
    """Longest-common-subsequence overlap between two token sequences."""

    return _prf(_lcs_length(candidate, reference), len(candidate), len(reference))


def _sentence_scores(a: Sequence[str], b: Sequence[str]) -> tuple[float, float, float]:
    return rouge_n(a, b, 1).f, rouge_n(a, b, 2).f, rouge_l(a, b).f


def consistency_report(sets: Iterable[TranslationSet]) -> dict[str, RougeScores]:
    """Average pairwise agreement for one round, keyed by granularity.

    For every unordered annotator pair, each shared sentence is scored with
    ROUGE-1/2/L F; scores are averaged over sentences first, then over
    pairs.  All sets must belong to the same round and, per granularity,
    cover identical sentence ids.
    """

    sets = list(sets)
    if not sets:
        raise DataError("consistency report needs at least one translation set")
    rounds = {s.round for s in sets}
    if len(rounds) > 1:
        raise DataError(f"mixed rounds in one report: {sorted(rounds)}")

    report: dict[str, RougeScores] = {}
    for gran in GRANULARITIES:
        group = [s for s in sets if s.granularity == gran]
        if not group:
            continue
        seen = set()
        for s in group:
            if s.annotator_id in seen:
                raise DataError(
                    f"annotator {s.annotator_id!r} appears twice at {gran} granularity"
                )
            seen.add(s.annotator_id)
        if len(group) < 2:
            raise DataError(
                f"consistency at {gran} granularity needs at least two annotators"
            )
        all_ids = set().union(*(s.sentences.keys() for s in group))
        for s in group:
            missing = sorted(all_ids - s.sentences.keys())
            if missing:
                raise DataError(
                    f"annotator {s.annotator_id!r} is missing sentence ids: "
                    + ", ".join(missing)
                )
        ordered_ids = sorted(all_ids)
        if not ordered_ids:
            raise DataError(f"no sentences at {gran} granularity")

        pair_means: list[tuple[float, float, float]] = []
        for left, right in combinations(sorted(group, key=lambda s: s.annotator_id), 2):
            per_sentence = [
                _sentence_scores(left.sentences[sid], right.sentences[sid])
                for sid in ordered_ids
            ]
            pair_means.append(
                tuple(sum(vals) / len(vals) for vals in zip(*per_sentence))
            )
        r1, r2, rl = (sum(vals) / len(vals) for vals in zip(*pair_means))
        report[gran] = RougeScores(r1=r1, r2=r2, rl=rl)
    return report


def load_translations(source) -> list[TranslationSet]:
    """Read annotator translations from a five-column TSV.

    Row format: ``sentence_id  annotator_id  round  granularity  tokens``
    with tokens space-separated.  Blank lines and ``#`` comments are
    skipped.  Rows sharing (round, annotator, granularity) form one set.
    """

    if hasattr(source, "read"):
        lines = source.read().splitlines()
    else:
        with open(source, "r", encoding="utf-8") as handle:
            lines = handle.read().splitlines()

    grouped: dict[tuple[int, str, str], dict[str, tuple[str, ...]]] = {}
    for lineno, line in enumerate(lines, start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 5:
            raise DataError(f"line {lineno}: expected 5 tab-separated fields, got {len(parts)}")
        sid, annotator, round_text, gran, tokens_text = (p.strip() for p in parts)
        try:
            round_no = int(round_text)
        except ValueError:
            raise DataError(f"line {lineno}: round must be an integer, got {round_text!r}")
        key = (round_no, annotator, gran)
        bucket = grouped.setdefault(key, {})
        if sid in bucket:
            raise DataError(
                f"line {lineno}: duplicate sentence {sid!r} for annotator "
                f"{annotator!r}, round {round_no}, {gran}"
            )
        bucket[sid] = tuple(tokens_text.split())

    return [
        TranslationSet(round=round_no, annotator_id=annotator, sentences=sentences, granularity=gran)
        for (round_no, annotator, gran), sentences in grouped.items()
    ]
