"""WALS-style typological profiles and the comparisons built on them.

A profile is a bag of categorical features (``"81A" -> 1``).  Similarity
between two languages is the fraction of matching values over the features
they *both* document; pairs documenting too little in common are reported
as below-threshold rather than as a misleading number.  Richness is a
simple strictly-below percentile on feature counts.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Mapping

from .errors import DataError

_CODE_COLUMNS = {"language_code", "wals_code", "language_id", "code"}
_FEATURE_COLUMNS = {"feature_id", "parameter_id", "feature"}
_VALUE_COLUMNS = {"value"}
_NAME_COLUMNS = {"name", "language_name", "language"}

_LEADING_INT = re.compile(r"\s*(\d+)")


@dataclass(frozen=True)
class WalsProfile:
    """One language's documented feature values plus light metadata."""

    language_code: str
    features: Mapping[str, int]
    name: str = ""
    genus: str = ""
    family: str = ""

    def __post_init__(self) -> None:
        if not self.language_code:
            raise DataError("profile needs a language code")
        feats = dict(self.features)
        for fid, value in feats.items():
            if not fid:
                raise DataError(f"profile {self.language_code!r} has an empty feature id")
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise DataError(
                    f"profile {self.language_code!r}, feature {fid!r}: "
                    f"value must be a positive integer, got {value!r}"
                )
        object.__setattr__(self, "features", feats)

    def __len__(self) -> int:
        return len(self.features)


@dataclass(frozen=True)
class SimilarityResult:
    """Match statistics for one language pair over their shared features."""

    pair: tuple[str, str]
    overlap: int
    matches: int
    similarity: float = field(init=False)

    def __post_init__(self) -> None:
        if self.overlap < 1:
            raise DataError("similarity is undefined over an empty feature intersection")
        if not 0 <= self.matches <= self.overlap:
            raise DataError(f"matches {self.matches} outside [0, {self.overlap}]")
        object.__setattr__(self, "similarity", self.matches / self.overlap)


@dataclass(frozen=True)
class Corpus:
    """An immutable set of profiles, indexable by language code."""

    profiles: tuple[WalsProfile, ...]
    duplicate_count: int = 0

    def __post_init__(self) -> None:
        by_code: dict[str, WalsProfile] = {}
        for prof in self.profiles:
            if prof.language_code in by_code:
                raise DataError(f"duplicate profile for language {prof.language_code!r}")
            by_code[prof.language_code] = prof
        object.__setattr__(self, "_by_code", by_code)

    def __iter__(self) -> Iterator[WalsProfile]:
        return iter(self.profiles)

    def __len__(self) -> int:
        return len(self.profiles)

    def get(self, code: str) -> WalsProfile | None:
        return self._by_code.get(code)

    def profile(self, code: str) -> WalsProfile:
        prof = self._by_code.get(code)
        if prof is None:
            raise DataError(f"no language {code!r} in the corpus")
        return prof


def _open_rows(source):
    if hasattr(source, "read"):
        return source, False
    if hasattr(source, "open"):
        return source.open("r", encoding="utf-8"), True
    return open(source, "r", encoding="utf-8"), True


def _parse_value(text: str) -> int | None:
    m = _LEADING_INT.match(text)
    if m is None:
        return None
    value = int(m.group(1))
    return value if value >= 1 else None


def load_corpus(source) -> Corpus:
    """Read long-format feature rows (one ``language, feature, value`` per line).

    The first line is a header; column names are matched case-insensitively
    against the common spellings (``language_code``/``wals_code``/``language_id``,
    ``feature_id``/``parameter_id``, ``value``), so both plain exports and
    CLDF ``values.csv`` load unchanged.  Extra columns are ignored.  Values
    may carry a trailing label ("5 No dominant order"); the leading integer
    is kept.  A repeated (language, feature) pair is replaced, last wins,
    and counted in ``Corpus.duplicate_count``.
    """

    import csv

    handle, owned = _open_rows(source)
    try:
        first = handle.readline()
        if not first.strip():
            raise DataError("empty corpus file")
        delim = "\t" if "\t" in first else ","
        header = [h.strip().lower().replace(" ", "_") for h in next(csv.reader([first], delimiter=delim))]

        def col(names: set[str]) -> int | None:
            for i, h in enumerate(header):
                if h in names:
                    return i
            return None

        i_code, i_feat, i_val = col(_CODE_COLUMNS), col(_FEATURE_COLUMNS), col(_VALUE_COLUMNS)
        if i_code is None or i_feat is None or i_val is None:
            raise DataError(
                "corpus header must name a language code, feature id and value column; "
                f"got {', '.join(header)}"
            )
        i_name, i_genus, i_family = col(_NAME_COLUMNS), col({"genus"}), col({"family"})

        features: dict[str, dict[str, int]] = {}
        meta: dict[str, dict[str, str]] = {}
        duplicates = 0
        reader = csv.reader(handle, delimiter=delim)
        for row in reader:
            lineno = reader.line_num + 1  # header was consumed before the reader
            if not row or not any(cell.strip() for cell in row):
                continue
            if len(row) <= max(i_code, i_feat, i_val):
                raise DataError(f"line {lineno}: too few columns")
            code = row[i_code].strip()
            feat = row[i_feat].strip()
            value = _parse_value(row[i_val])
            if not code or not feat or value is None:
                raise DataError(
                    f"line {lineno}: need a language code, a feature id and a "
                    f"positive integer value, got {row!r}"
                )
            bucket = features.setdefault(code, {})
            if feat in bucket:
                duplicates += 1
            bucket[feat] = value
            info = meta.setdefault(code, {"name": "", "genus": "", "family": ""})
            for key, idx in (("name", i_name), ("genus", i_genus), ("family", i_family)):
                if idx is not None and len(row) > idx and row[idx].strip():
                    info[key] = row[idx].strip()
    finally:
        if owned:
            handle.close()

    profiles = tuple(
        WalsProfile(language_code=code, features=feats, **meta[code])
        for code, feats in features.items()
    )
    return Corpus(profiles=profiles, duplicate_count=duplicates)


def camlang_profile() -> WalsProfile:
    """The shipped profile for the toolkit's demo language (code ``cam``)."""

    from importlib import resources

    path = resources.files("camforge.data").joinpath("camlang.wals")
    return load_corpus(path).profile("cam")


def similarity(x: WalsProfile, y: WalsProfile, min_overlap: int = 1) -> SimilarityResult | None:
    """Fraction of agreeing values over the features both profiles document.

    Returns None when the two profiles share fewer than ``min_overlap``
    features; a ratio over a tiny intersection says nothing.
    """

    if min_overlap < 1:
        raise DataError(f"min_overlap must be at least 1, got {min_overlap}")
    shared = x.features.keys() & y.features.keys()
    if len(shared) < min_overlap:
        return None
    matches = sum(1 for fid in shared if x.features[fid] == y.features[fid])
    return SimilarityResult(
        pair=(x.language_code, y.language_code), overlap=len(shared), matches=matches
    )


def neighbours(
    target: WalsProfile, corpus: Corpus, min_overlap: int = 1, k: int = 1
) -> list[SimilarityResult]:
    """The k most similar corpus languages, best first.

    Ties go to the pair with more shared features, then to the smaller
    language code.  The target itself never appears in its own ranking.
    """

    if k < 1:
        raise DataError(f"k must be at least 1, got {k}")
    results = [
        r
        for prof in corpus
        if prof.language_code != target.language_code
        and (r := similarity(target, prof, min_overlap)) is not None
    ]
    results.sort(key=lambda r: (-r.similarity, -r.overlap, r.pair[1]))
    return results[:k]


def richness_percentile(target: WalsProfile, corpus: Corpus) -> float:
    """Fraction of corpus languages documenting strictly fewer features."""

    if len(corpus) == 0:
        raise DataError("richness percentile needs a non-empty corpus")
    below = sum(1 for prof in corpus if len(prof.features) < len(target.features))
    return below / len(corpus)
