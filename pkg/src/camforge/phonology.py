"""Phoneme inventory, phonotactic validation, and the weighted root generator.

The inventory file is line-oriented TSV: ``<symbol>\t<class>\t<features>``
with ``#`` comments. Class is one of ``consonant``, ``vowel``,
``archiphoneme``; features is a comma-separated tag set. Slot frequency
tables use ``[slot <id>]`` section headers followed by ``<symbol> <weight>``
entries.
"""

from __future__ import annotations

import random
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path

from .errors import BudgetError, DataError, NotationError

CONSONANT = "consonant"
VOWEL = "vowel"
ARCHIPHONEME = "archiphoneme"

# Slot ids drawn for each root shape. Bisyllabic roots use the alternative
# medial-coda table (c3a) and so come out CVC.CVC.
SHAPE_SLOTS = {
    "monosyllabic": ("c1", "c2", "c3"),
    "bisyllabic": ("c1", "c2", "c3a", "c4", "c5", "c6"),
}
SHAPE_ALIASES = {"mono": "monosyllabic", "bi": "bisyllabic"}


@dataclass(frozen=True)
class Segment:
    symbol: str
    cls: str
    features: frozenset[str] = field(default_factory=frozenset)

    def has(self, tag: str) -> bool:
        return tag in self.features

    @property
    def vowel_like(self) -> bool:
        """Archiphonemes count as vowels when tagged vocalic."""
        if self.cls == VOWEL:
            return True
        return self.cls == ARCHIPHONEME and "vocalic" in self.features


@dataclass(frozen=True)
class PhonotacticViolation:
    kind: str  # adjacent-vowels | illegal-cluster | unknown-symbol | no-vowel
    position: int
    detail: str

    def __str__(self) -> str:
        return f"{self.kind} at {self.position}: {self.detail}"


class PhonemeInventory:
    def __init__(self, segments: list[Segment]):
        self.segments: dict[str, Segment] = {}
        for seg in segments:
            if seg.symbol in self.segments:
                raise DataError(f"duplicate inventory symbol {seg.symbol!r}")
            if not seg.symbol:
                raise DataError("empty inventory symbol")
            if seg.cls not in (CONSONANT, VOWEL, ARCHIPHONEME):
                raise DataError(f"unknown segment class {seg.cls!r} for {seg.symbol!r}")
            if seg.cls == ARCHIPHONEME and "underspecified" not in seg.features:
                raise DataError(
                    f"archiphoneme {seg.symbol!r} must carry an 'underspecified' feature tag"
                )
            self.segments[seg.symbol] = seg
        self._by_length = sorted(self.segments, key=len, reverse=True)
        self._max_len = max((len(s) for s in self.segments), default=1)

    @property
    def consonants(self) -> set[str]:
        return {s for s, seg in self.segments.items() if seg.cls == CONSONANT}

    @property
    def vowels(self) -> set[str]:
        return {s for s, seg in self.segments.items() if seg.cls == VOWEL}

    @property
    def archiphonemes(self) -> set[str]:
        return {s for s, seg in self.segments.items() if seg.cls == ARCHIPHONEME}

    @property
    def native_citation_subset(self) -> set[str]:
        """Symbols that may appear in native citation forms."""
        return {
            s
            for s, seg in self.segments.items()
            if seg.cls != ARCHIPHONEME and "non_citation" not in seg.features
        }

    def __contains__(self, symbol: str) -> bool:
        return symbol in self.segments

    def __getitem__(self, symbol: str) -> Segment:
        return self.segments[symbol]

    def classify(self, symbol: str) -> str:
        return self.segments[symbol].cls

    def tokenize(self, text: str, *, strict: bool = True) -> list[str]:
        """Split a string into inventory symbols, longest match first.

        With strict=False unknown characters come through as single-char
        tokens (the validator reports them as violations instead of dying).
        """
        text = unicodedata.normalize("NFC", text)
        out: list[str] = []
        i = 0
        n = len(text)
        while i < n:
            for width in range(min(self._max_len, n - i), 0, -1):
                cand = text[i : i + width]
                if cand in self.segments:
                    out.append(cand)
                    i += width
                    break
            else:
                if strict:
                    raise NotationError(
                        f"unknown symbol {text[i]!r} at offset {i} in {text!r}"
                    )
                out.append(text[i])
                i += 1
        return out

    @classmethod
    def from_file(cls, path: str | Path) -> "PhonemeInventory":
        segs = []
        for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) < 2:
                raise DataError(f"{path}:{lineno}: expected symbol<TAB>class[<TAB>features]")
            sym = unicodedata.normalize("NFC", parts[0].strip())
            kls = parts[1].strip()
            feats = frozenset(
                t.strip() for t in (parts[2].split(",") if len(parts) > 2 else []) if t.strip()
            )
            segs.append(Segment(sym, kls, feats))
        if not segs:
            raise DataError(f"{path}: empty inventory")
        return cls(segs)


def validate_phonotactics(
    word: str | list[str], inventory: PhonemeInventory
) -> list[PhonotacticViolation]:
    """Check a word against strict (C)V(C) syllable structure.

    Flags adjacent vowels, clusters that cannot be split into one coda plus
    one onset, unknown symbols, and vowel-less words. Positions are
    0-based segment indices. Returns an empty list for well-formed words.
    """
    if isinstance(word, str):
        if not word:
            raise NotationError("cannot validate an empty word")
        tokens = inventory.tokenize(word, strict=False)
    else:
        tokens = list(word)
        if not tokens:
            raise NotationError("cannot validate an empty word")

    violations: list[PhonotacticViolation] = []
    classes: list[str] = []
    for i, tok in enumerate(tokens):
        seg = inventory.segments.get(tok)
        if seg is None:
            violations.append(PhonotacticViolation("unknown-symbol", i, tok))
            classes.append("?")
        elif seg.vowel_like:
            classes.append("V")
        else:
            classes.append("C")

    if "V" not in classes:
        violations.append(PhonotacticViolation("no-vowel", 0, "".join(tokens)))
        return violations

    prev_v = -2
    for i, c in enumerate(classes):
        if c == "V" and classes[i - 1] == "V" and i > 0:
            violations.append(
                PhonotacticViolation("adjacent-vowels", i, f"{tokens[i - 1]} {tokens[i]}")
            )
        prev_v = i if c == "V" else prev_v

    # consonant runs: word-initial and word-final allow one consonant,
    # between vowels at most two (coda + onset)
    run_start = None
    for i in range(len(classes) + 1):
        at_end = i == len(classes)
        c = None if at_end else classes[i]
        if c == "C" and run_start is None:
            run_start = i
        if (at_end or c != "C") and run_start is not None:
            run_len = i - run_start
            initial = run_start == 0
            final = at_end
            limit = 1 if (initial or final) else 2
            if run_len > limit:
                violations.append(
                    PhonotacticViolation(
                        "illegal-cluster",
                        run_start,
                        "".join(tokens[run_start:i]),
                    )
                )
            run_start = None
    return violations


@dataclass
class SlotFrequencyTable:
    slot_id: str
    entries: dict[str, float]

    def __post_init__(self):
        if not self.entries:
            raise DataError(f"slot {self.slot_id}: empty frequency table")
        total = 0.0
        for sym, w in self.entries.items():
            if w <= 0:
                raise DataError(f"slot {self.slot_id}: non-positive weight for {sym!r}")
            total += w
        self._symbols = list(self.entries)
        self._cumulative = []
        acc = 0.0
        for sym in self._symbols:
            acc += self.entries[sym]
            self._cumulative.append(acc)
        self._total = acc

    def check_against(self, inventory: PhonemeInventory) -> None:
        for sym in self.entries:
            if sym not in inventory:
                raise DataError(f"slot {self.slot_id}: symbol {sym!r} not in inventory")


def weighted_choice(rng: random.Random, table: SlotFrequencyTable) -> str:
    """Draw one symbol from a slot table, proportionally to its weight."""
    x = rng.random() * table._total
    for sym, cum in zip(table._symbols, table._cumulative):
        if x < cum:
            return sym
    return table._symbols[-1]  # x landed on the absolute top edge


def load_slot_tables(path: str | Path) -> dict[str, SlotFrequencyTable]:
    tables: dict[str, dict[str, float]] = {}
    current: str | None = None
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[slot") and line.endswith("]"):
            current = line[5:-1].strip()
            if not current:
                raise DataError(f"{path}:{lineno}: empty slot id")
            if current in tables:
                raise DataError(f"{path}:{lineno}: duplicate slot {current!r}")
            tables[current] = {}
            continue
        if current is None:
            raise DataError(f"{path}:{lineno}: entry before any [slot ...] header")
        parts = line.split()
        if len(parts) != 2:
            raise DataError(f"{path}:{lineno}: expected '<symbol> <weight>'")
        sym = unicodedata.normalize("NFC", parts[0])
        try:
            weight = float(parts[1])
        except ValueError:
            raise DataError(f"{path}:{lineno}: bad weight {parts[1]!r}") from None
        if sym in tables[current]:
            raise DataError(f"{path}:{lineno}: duplicate symbol {sym!r} in slot {current}")
        tables[current][sym] = weight
    if not tables:
        raise DataError(f"{path}: no slot tables found")
    return {sid: SlotFrequencyTable(sid, entries) for sid, entries in tables.items()}


@dataclass(frozen=True)
class Root:
    symbols: tuple[str, ...]
    shape: str

    @property
    def text(self) -> str:
        return "".join(self.symbols)


def tables_for_shape(
    shape: str, tables: dict[str, SlotFrequencyTable]
) -> list[SlotFrequencyTable]:
    shape = SHAPE_ALIASES.get(shape, shape)
    if shape not in SHAPE_SLOTS:
        raise DataError(f"unknown root shape {shape!r}")
    picked = []
    for sid in SHAPE_SLOTS[shape]:
        if sid not in tables:
            raise DataError(f"tables file lacks slot {sid!r} needed for {shape} roots")
        picked.append(tables[sid])
    return picked


def generate_root(
    rng: random.Random,
    slot_tables: list[SlotFrequencyTable],
    inventory: PhonemeInventory,
    shape: str = "monosyllabic",
) -> Root:
    shape = SHAPE_ALIASES.get(shape, shape)
    expected = len(SHAPE_SLOTS.get(shape, ()))
    if expected and len(slot_tables) != expected:
        raise DataError(
            f"{shape} roots need {expected} slot tables, got {len(slot_tables)}"
        )
    symbols = tuple(weighted_choice(rng, t) for t in slot_tables)
    root = Root(symbols, shape)
    bad = validate_phonotactics(list(symbols), inventory)
    if bad:
        raise DataError(
            f"slot tables produced ill-formed root {root.text!r}: {bad[0]}"
        )
    return root


def generate_root_batch(
    rng: random.Random,
    slot_tables: list[SlotFrequencyTable],
    inventory: PhonemeInventory,
    n: int,
    shape: str = "monosyllabic",
    dedup: bool = False,
    known: set[str] | None = None,
) -> list[Root]:
    """Sample n roots. With dedup, duplicates (and anything in `known`)
    are discarded and redrawn, up to a budget of 1000*n attempts."""
    if n < 0:
        raise DataError("n must be non-negative")
    roots: list[Root] = []
    seen = set(known or ())
    budget = 1000 * max(n, 1)
    attempts = 0
    while len(roots) < n:
        if attempts >= budget:
            raise BudgetError(
                f"root sampling exhausted {attempts} attempts for {n} unique roots"
            )
        attempts += 1
        root = generate_root(rng, slot_tables, inventory, shape)
        if dedup:
            if root.text in seen:
                continue
            seen.add(root.text)
        roots.append(root)
    return roots
