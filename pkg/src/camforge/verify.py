"""Human-verification labels and the tiered accuracy family built on them.

Reviewers label each EM-correct model output on three aspects -- question
parsing, question meaning, option meaning -- with a correctness/completeness
pair.  Three nested accuracies follow: strict (everything correct and
complete), moderate (parsing flawless, meanings at worst incomplete) and
lenient (meanings at worst incomplete, parsing free).  All three divide by
the full instance count, not by the labelled subset.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import DataError

LABEL_VALUES = ("Crt+Com+", "Crt+Com-", "Crt-Com+", "Crt-Com-")
ASPECTS = ("parsing", "q_meaning", "o_meaning")

_FULL_MARKS = "Crt+Com+"
_AT_WORST_INCOMPLETE = ("Crt+Com+", "Crt+Com-")


def normalize_label(text: str) -> str:
    """Canonicalize a label: unicode minus and ampersand variants accepted."""

    cleaned = text.strip().replace("−", "-").replace(" ", "").replace("&", "")
    if cleaned not in LABEL_VALUES:
        raise DataError(
            f"unknown verification label {text!r}; expected one of {', '.join(LABEL_VALUES)}"
        )
    return cleaned


@dataclass(frozen=True)
class VerificationRecord:
    """One labelled model output (labels exist only for EM-correct answers)."""

    instance_id: str
    system_id: str
    em_correct: bool
    parsing: str
    q_meaning: str
    o_meaning: str

    def __post_init__(self) -> None:
        if not self.instance_id or not self.system_id:
            raise DataError("verification record needs instance and system ids")
        for aspect in ASPECTS:
            object.__setattr__(self, aspect, normalize_label(getattr(self, aspect)))


@dataclass(frozen=True)
class VerifiedMetrics:
    shv: float
    mhv: float
    lhv: float
    em: float
    n_total: int


def load_labels(source, allow_em_incorrect: bool = False) -> list[VerificationRecord]:
    """Read records from a six-column TSV.

    Header: ``instance_id system_id em_correct parsing q_meaning o_meaning``.
    A row with ``em_correct`` false is a protocol violation (labels are only
    assigned to EM-correct outputs) and is rejected unless
    ``allow_em_incorrect`` is set for exploratory full labellings; such rows
    are still excluded from metrics by compute_metrics.
    """

    if hasattr(source, "read"):
        lines = source.read().splitlines()
    else:
        lines = Path(source).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise DataError("empty label file")
    header = [h.strip() for h in lines[0].split("\t")]
    expected = ["instance_id", "system_id", "em_correct", "parsing", "q_meaning", "o_meaning"]
    if header != expected:
        raise DataError(f"label header must be {expected}, got {header}")

    records: list[VerificationRecord] = []
    seen: set[tuple[str, str]] = set()
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = [p.strip() for p in line.split("\t")]
        if len(parts) != 6:
            raise DataError(f"line {lineno}: expected 6 fields, got {len(parts)}")
        instance_id, system_id, em_text, parsing, q_meaning, o_meaning = parts
        if em_text.lower() not in ("true", "false"):
            raise DataError(f"line {lineno}: em_correct must be true or false, got {em_text!r}")
        em_correct = em_text.lower() == "true"
        if not em_correct and not allow_em_incorrect:
            raise DataError(
                f"line {lineno}: instance {instance_id!r} is labelled but not EM-correct; "
                "labels are only defined for EM-correct outputs"
            )
        key = (instance_id, system_id)
        if key in seen:
            raise DataError(f"line {lineno}: duplicate record for {key}")
        seen.add(key)
        records.append(
            VerificationRecord(
                instance_id=instance_id,
                system_id=system_id,
                em_correct=em_correct,
                parsing=parsing,
                q_meaning=q_meaning,
                o_meaning=o_meaning,
            )
        )
    return records


def split_by_system(records: Iterable[VerificationRecord]) -> dict[str, list[VerificationRecord]]:
    out: dict[str, list[VerificationRecord]] = {}
    for record in records:
        out.setdefault(record.system_id, []).append(record)
    return out


def _one_system(records: Sequence[VerificationRecord], what: str) -> None:
    systems = {r.system_id for r in records}
    if len(systems) > 1:
        raise DataError(
            f"{what} covers one system at a time; got {sorted(systems)} "
            "(split_by_system first)"
        )


def satisfies_strict(record: VerificationRecord) -> bool:
    return all(getattr(record, aspect) == _FULL_MARKS for aspect in ASPECTS)


def satisfies_moderate(record: VerificationRecord) -> bool:
    return record.parsing == _FULL_MARKS and satisfies_lenient(record)


def satisfies_lenient(record: VerificationRecord) -> bool:
    return (
        record.q_meaning in _AT_WORST_INCOMPLETE
        and record.o_meaning in _AT_WORST_INCOMPLETE
    )


def compute_metrics(records: Sequence[VerificationRecord], n_total: int) -> VerifiedMetrics:
    """Strict / moderate / lenient accuracy plus EM, all over ``n_total``."""

    records = list(records)
    if n_total < 1:
        raise DataError(f"n_total must be positive, got {n_total}")
    if n_total < len(records):
        raise DataError(f"n_total {n_total} is smaller than the record count {len(records)}")
    _one_system(records, "compute_metrics")
    bad = [r.instance_id for r in records if not r.em_correct]
    if bad:
        raise DataError(
            "records for EM-incorrect instances cannot enter the metrics: "
            + ", ".join(bad)
        )
    return VerifiedMetrics(
        shv=sum(map(satisfies_strict, records)) / n_total,
        mhv=sum(map(satisfies_moderate, records)) / n_total,
        lhv=sum(map(satisfies_lenient, records)) / n_total,
        em=len(records) / n_total,
        n_total=n_total,
    )


@dataclass(frozen=True)
class DistributionRow:
    aspect: str
    label: str
    count: int
    percent: float


def distribution_report(records: Sequence[VerificationRecord]) -> list[DistributionRow]:
    """Per-aspect label counts and percentages over the labelled records."""

    records = list(records)
    if not records:
        raise DataError("distribution report needs at least one record")
    _one_system(records, "distribution_report")
    rows = []
    for aspect in ASPECTS:
        for label in LABEL_VALUES:
            count = sum(1 for r in records if getattr(r, aspect) == label)
            rows.append(
                DistributionRow(
                    aspect=aspect,
                    label=label,
                    count=count,
                    percent=round(100 * count / len(records), 2),
                )
            )
    return rows
