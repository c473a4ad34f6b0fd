"""Dictionary entries keyed by underlying form: lookup, word formation,
and the sourcing-distribution report.

The lexicon file is TSV with a header row (underlying, citation, gloss,
pos, honorific, sourcing, etymology, and an optional trailing flags
column). A sibling ``.morph`` file supplies the functional-morpheme
inventory used for analysis, derivation, and glossing. Loaded lexica are
immutable snapshots; ``with_entry`` returns a new one.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

from ._fileio import atomic_write_text
from .errors import DataError, RefusedError
from .morphology.analyze import FunctionalAffix, analyze, load_morph_table
from .morphology.engine import generate
from .morphology.notation import Morpheme, UnderlyingForm, parse_underlying, serialize
from .morphology.rules import RuleCascade

HONORIFIC_LEVELS = ("ordinary", "honorific")
SOURCING_CATEGORIES = (
    "native",
    "derived",
    "compound",
    "opaque_loan",
    "transparent_loan",
)
ENTRY_FLAGS = ("homonym", "no_citation_check")
_COLUMNS = ("underlying", "citation", "gloss", "pos", "honorific", "sourcing", "etymology")


@dataclass(frozen=True)
class LexEntry:
    underlying: str  # normalized notation; the lemma key
    citation: str
    gloss: str
    pos: str
    honorific: str = "ordinary"
    sourcing: str = "native"
    etymology: str = ""  # internal-only; stripped from model-facing exports
    flags: frozenset[str] = frozenset()

    def __post_init__(self):
        if self.honorific not in HONORIFIC_LEVELS:
            raise DataError(f"unknown honorific level {self.honorific!r}")
        if self.sourcing not in SOURCING_CATEGORIES:
            raise DataError(f"unknown sourcing category {self.sourcing!r}")
        bad = set(self.flags) - set(ENTRY_FLAGS)
        if bad:
            raise DataError(f"unknown entry flag(s) {sorted(bad)!r}")
        uform = parse_underlying(self.underlying)
        if serialize(uform) != self.underlying:
            raise DataError(
                f"underlying form {self.underlying!r} is not in normalized notation"
            )
        if not self.citation:
            raise DataError(f"entry {self.underlying!r} lacks a citation form")

    @property
    def parsed(self) -> UnderlyingForm:
        return parse_underlying(self.underlying)

    @property
    def is_root(self) -> bool:
        u = self.parsed
        return len(u.morphemes) == 1 and u.morphemes[0].is_root


@dataclass(frozen=True)
class Lexicon:
    entries: tuple[LexEntry, ...]
    functional_morphemes: tuple[FunctionalAffix, ...] = ()
    _by_underlying: dict = field(init=False, repr=False, compare=False)
    _by_citation: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        by_u: dict[str, list[LexEntry]] = {}
        by_c: dict[str, list[LexEntry]] = {}
        for e in self.entries:
            bucket = by_u.setdefault(e.underlying, [])
            if bucket and not all("homonym" in x.flags for x in (*bucket, e)):
                raise DataError(
                    f"duplicate underlying form {e.underlying!r} (flag both entries "
                    f"'homonym' if the collision is deliberate)"
                )
            bucket.append(e)
            by_c.setdefault(e.citation, []).append(e)
        object.__setattr__(self, "_by_underlying", by_u)
        object.__setattr__(self, "_by_citation", by_c)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    # --- loading ----------------------------------------------------------

    @classmethod
    def load(
        cls,
        path: str | Path,
        cascade: RuleCascade | None = None,
        morph_path: str | Path | None = None,
    ) -> "Lexicon":
        """Load a lexicon file, plus the sibling ``.morph`` functional
        morphemes when present. With a cascade, every entry's citation is
        checked against generate(underlying) unless the entry carries the
        no_citation_check flag."""
        path = Path(path)
        rows = _read_rows(path)
        affixes: tuple[FunctionalAffix, ...] = ()
        mp = Path(morph_path) if morph_path is not None else path.with_suffix(".morph")
        if mp.exists():
            inv = cascade.inventory if cascade is not None else None
            affixes = load_morph_table(mp, inv)
        lex = cls(entries=tuple(sorted(rows, key=lambda e: e.underlying)), functional_morphemes=affixes)
        if cascade is not None:
            for e in lex.entries:
                if "no_citation_check" in e.flags:
                    continue
                got = generate(e.underlying, cascade).text
                if got != e.citation:
                    raise DataError(
                        f"{path}: citation mismatch for {e.underlying!r}: "
                        f"file says {e.citation!r}, cascade derives {got!r}"
                    )
        return lex

    # --- queries -----------------------------------------------------------

    def lookup(
        self,
        key: str,
        mode: str = "by_underlying",
        cascade: RuleCascade | None = None,
        max_affixes: int = 6,
        max_candidates: int = 10,
    ) -> list[LexEntry]:
        """Exact lookup by underlying or citation form, or lemmatizing
        lookup by surface form (requires a cascade; delegates to analyze).
        Misses return an empty list."""
        if mode == "by_underlying":
            return list(self._by_underlying.get(key, []))
        if mode == "by_citation":
            return list(self._by_citation.get(key, []))
        if mode != "by_surface":
            raise DataError(f"unknown lookup mode {mode!r}")
        if cascade is None:
            raise DataError("by_surface lookup needs a cascade for analysis")
        hits: list[LexEntry] = []
        seen: set[str] = set()
        for parse in analyze(key, cascade, self, max_affixes, max_candidates):
            shape = [(m.form, m.boundary) for m in parse.morphemes]
            for entry in self.entries:
                if entry.underlying in seen:
                    continue
                needle = [(m.form, m.boundary) for m in entry.parsed.morphemes]
                n = len(needle)
                if any(shape[i : i + n] == needle for i in range(len(shape) - n + 1)):
                    seen.add(entry.underlying)
                    hits.append(entry)
        return hits

    def analysis_roots(self) -> list[tuple[str, str]]:
        """(form, pos) pairs for every single-root entry; analyzer fodder."""
        out: list[tuple[str, str]] = []
        seen: set[tuple[str, str]] = set()
        for e in self.entries:
            if e.is_root:
                pair = (e.underlying, e.pos)
                if pair not in seen:
                    seen.add(pair)
                    out.append(pair)
        return out

    def headword(self, root_form: str) -> str | None:
        """English headword for a bare root: the gloss up to the first
        comma or parenthesis."""
        entries = self._by_underlying.get(root_form)
        if not entries:
            return None
        gloss = entries[0].gloss
        return gloss.split(",")[0].split("(")[0].strip()

    def affix(self, notation: str) -> FunctionalAffix:
        for a in self.functional_morphemes:
            if a.notation() == notation:
                return a
        raise DataError(f"no functional morpheme {notation!r} in the inventory")

    # --- word formation -----------------------------------------------------

    def derive(
        self, stem: LexEntry, affix: FunctionalAffix | str, cascade: RuleCascade
    ) -> LexEntry:
        """Build a derived-entry candidate from stem + one derivational
        affix. The gloss is left blank for curation. Raises RefusedError
        when the affix is inflectional or rejects the stem's part of
        speech."""
        if isinstance(affix, str):
            affix = self.affix(affix)
        if not affix.result_pos:
            raise RefusedError(
                f"affix {affix.notation()!r} is inflectional; it does not form new lexemes"
            )
        if not affix.accepts(stem.pos):
            raise RefusedError(
                f"affix {affix.notation()!r} attaches to {sorted(affix.attaches or ())}, "
                f"not to {stem.pos!r} stems"
            )
        if affix.pre:
            notation = f"{affix.notation()} {stem.underlying}"
        else:
            notation = f"{stem.underlying} {affix.notation()}"
        notation = serialize(parse_underlying(notation))
        citation = generate(notation, cascade).text
        return LexEntry(
            underlying=notation,
            citation=citation,
            gloss="",
            pos=affix.result_pos,
            honorific=stem.honorific,
            sourcing="derived",
        )

    def compound(self, parts: list[LexEntry], cascade: RuleCascade) -> LexEntry:
        """Build a compound-entry candidate from ≥2 part lemmas. The head
        part (per the cascade's compound configuration) supplies the part
        of speech."""
        if len(parts) < 2:
            raise DataError(f"a compound needs at least 2 parts, got {len(parts)}")
        notation = " + ".join(p.underlying for p in parts)
        notation = serialize(parse_underlying(notation))
        citation = generate(notation, cascade).text
        head = parts[-1] if cascade.compound_head == "last" else parts[0]
        return LexEntry(
            underlying=notation,
            citation=citation,
            gloss="",
            pos=head.pos,
            honorific=head.honorific,
            sourcing="compound",
        )

    def with_entry(self, entry: LexEntry) -> "Lexicon":
        """A new snapshot with one more entry (kept sorted)."""
        merged = sorted((*self.entries, entry), key=lambda e: e.underlying)
        return Lexicon(tuple(merged), self.functional_morphemes)

    # --- export -------------------------------------------------------------

    def export(self, path: str | Path, model_facing: bool = False) -> None:
        """Write the lexicon as TSV, alphabetical by underlying form. The
        model-facing variant drops the etymology column (and the flags
        column, which only drives loader behaviour)."""
        any_flags = any(e.flags for e in self.entries)
        cols = list(_COLUMNS)
        if model_facing:
            cols.remove("etymology")
        elif any_flags:
            cols.append("flags")
        lines = ["\t".join(cols)]
        for e in sorted(self.entries, key=lambda x: x.underlying):
            row = {
                "underlying": e.underlying,
                "citation": e.citation,
                "gloss": e.gloss,
                "pos": e.pos,
                "honorific": e.honorific,
                "sourcing": e.sourcing,
                "etymology": e.etymology,
                "flags": ",".join(sorted(e.flags)),
            }
            lines.append("\t".join(row[c] for c in cols))
        atomic_write_text(Path(path), "\n".join(lines) + "\n")


def _read_rows(path: Path) -> list[LexEntry]:
    header: list[str] | None = None
    rows: list[LexEntry] = []
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        cols = raw.split("\t")
        if header is None:
            header = [c.strip() for c in cols]
            missing = [c for c in _COLUMNS[:6] if c not in header]
            if missing:
                raise DataError(f"{path}:{lineno}: header lacks column(s) {missing}")
            continue
        if len(cols) < len([c for c in header if c != "flags"]) - 1:
            raise DataError(f"{path}:{lineno}: too few columns")
        row = {name: (cols[i].strip() if i < len(cols) else "") for i, name in enumerate(header)}
        flags = frozenset(f for f in row.get("flags", "").split(",") if f)
        try:
            rows.append(
                LexEntry(
                    underlying=row["underlying"],
                    citation=row["citation"],
                    gloss=row["gloss"],
                    pos=row["pos"],
                    honorific=row["honorific"] or "ordinary",
                    sourcing=row["sourcing"],
                    etymology=row.get("etymology", ""),
                    flags=flags,
                )
            )
        except DataError as e:
            raise DataError(f"{path}:{lineno}: {e}") from None
    if header is None:
        raise DataError(f"{path}: empty lexicon file")
    return rows


@dataclass(frozen=True)
class SourcingRow:
    category: str
    count: int
    percent: float


def sourcing_report(lexicon: Lexicon) -> list[SourcingRow]:
    """Counts and percentages per sourcing category, in canonical order.

    Percentages are rounded to 2 decimals and sum to 100 within rounding.
    Raises DataError on an empty lexicon.
    """
    if len(lexicon) == 0:
        raise DataError("cannot report sourcing of an empty lexicon")
    counts = {c: 0 for c in SOURCING_CATEGORIES}
    for e in lexicon:
        counts[e.sourcing] += 1
    total = len(lexicon)
    return [
        SourcingRow(c, counts[c], round(100.0 * counts[c] / total, 2))
        for c in SOURCING_CATEGORIES
    ]
