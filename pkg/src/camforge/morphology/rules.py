"""Rewrite rules, directives, and the cascade file loader.

File format (line-oriented, ``#`` comments):

    PHASES: redup, harmony, mutation, ...
    HARMONY A4 fu=y fr=y bu=a br=a
    STRESS map a=á,e=é,i=í,o=ó,u=ú
    COMPOUND ezafe=x= head=last joiner=-
    RULE <id> <phase> <mode> : <target> -> <replacement> [/ <left> _ <right>]

Modes are ``single`` (one left-to-right sweep) or ``fixpoint:<measure>``
(sweeps repeated until stable; the measure — ``length`` or ``vv`` — must
strictly decrease on every changing sweep or application aborts).

Pattern tokens: a literal inventory symbol; ``C``/``V`` optionally
restricted by features (``C:nasal,voiced``); ``@red`` after either form
restricts to segments contributed by the reduplicant; ``+`` matches any
morpheme boundary and ``=`` only a cliticisation boundary; ``#`` anchors a
context at the word edge. Replacements are literal symbols, ``$k``
captures of the k-th target segment, ``ROOT.C1``/``ROOT.V1`` (first root
consonant/vowel of the word), or a lone ``0`` for deletion.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import DataError
from ..phonology import ARCHIPHONEME, CONSONANT, VOWEL, PhonemeInventory
from .notation import PROCLITIC, Morpheme, parse_underlying

MEASURES = ("length", "vv")
HARMONY_CLASSES = ("front", "back", "fu", "fr", "bu", "br")


@dataclass(frozen=True)
class PatternToken:
    kind: str  # segment | boundary | edge
    symbol: str = ""  # literal symbol ("" for a class token)
    seg_class: str = ""  # "C" or "V" for class tokens
    features: frozenset[str] = frozenset()
    tag: str = ""  # @tag morpheme restriction (currently: red)
    clitic_only: bool = False  # boundary "=" as opposed to "+"

    def describe(self) -> str:
        if self.kind == "boundary":
            return "=" if self.clitic_only else "+"
        if self.kind == "edge":
            return "#"
        base = self.symbol or (
            self.seg_class + (":" + ",".join(sorted(self.features)) if self.features else "")
        )
        return base + ("@" + self.tag if self.tag else "")


@dataclass(frozen=True)
class ReplacementToken:
    kind: str  # literal | capture | root_c1 | root_v1
    symbol: str = ""
    index: int = 0  # capture index, 0-based


@dataclass(frozen=True)
class RewriteRule:
    id: str
    phase: str
    mode: str  # "single" | "fixpoint"
    measure: str
    target: tuple[PatternToken, ...]
    replacement: tuple[ReplacementToken, ...]
    left: tuple[PatternToken, ...] = ()
    right: tuple[PatternToken, ...] = ()


def _parse_pattern_token(text: str, inventory: PhonemeInventory, where: str) -> PatternToken:
    if text == "+":
        return PatternToken("boundary")
    if text == "=":
        return PatternToken("boundary", clitic_only=True)
    if text == "#":
        return PatternToken("edge")
    base, _, tag = text.partition("@")
    if not base:
        raise DataError(f"{where}: bare @tag {text!r}")
    if base == "C" or base == "V" or base.startswith(("C:", "V:")):
        cls = base[0]
        feats = frozenset(f for f in base[2:].split(",") if f) if ":" in base else frozenset()
        return PatternToken("segment", seg_class=cls, features=feats, tag=tag)
    sym = unicodedata.normalize("NFC", base)
    if sym not in inventory:
        raise DataError(f"{where}: pattern symbol {sym!r} not in inventory")
    return PatternToken("segment", symbol=sym, tag=tag)


def _parse_pattern(text: str, inventory: PhonemeInventory, where: str, context: bool) -> tuple[PatternToken, ...]:
    tokens = tuple(_parse_pattern_token(t, inventory, where) for t in text.split())
    n_seg = sum(1 for t in tokens if t.kind == "segment")
    if not context:
        if n_seg == 0:
            raise DataError(f"{where}: target needs at least one segment token")
        if tokens and (tokens[0].kind != "segment" or tokens[-1].kind != "segment"):
            raise DataError(f"{where}: target may not start or end on a boundary")
        if any(t.kind == "edge" for t in tokens):
            raise DataError(f"{where}: '#' belongs in a context, not the target")
    for i, t in enumerate(tokens):
        if t.kind == "edge" and 0 < i < len(tokens) - 1:
            raise DataError(f"{where}: '#' must sit at the outer edge of a context")
    return tokens


def _parse_replacement(text: str, inventory: PhonemeInventory, n_captures: int, where: str) -> tuple[ReplacementToken, ...]:
    parts = text.split()
    if parts == ["0"]:
        return ()
    out: list[ReplacementToken] = []
    for p in parts:
        if p.startswith("$"):
            try:
                k = int(p[1:])
            except ValueError:
                raise DataError(f"{where}: bad capture reference {p!r}") from None
            if not 1 <= k <= n_captures:
                raise DataError(f"{where}: capture {p} out of range (target has {n_captures})")
            out.append(ReplacementToken("capture", index=k - 1))
        elif p == "ROOT.C1":
            out.append(ReplacementToken("root_c1"))
        elif p == "ROOT.V1":
            out.append(ReplacementToken("root_v1"))
        else:
            sym = unicodedata.normalize("NFC", p)
            if sym not in inventory:
                raise DataError(f"{where}: replacement symbol {sym!r} not in inventory")
            out.append(ReplacementToken("literal", symbol=sym))
    return tuple(out)


_RULE_RE = re.compile(r"^RULE\s+(\S+)\s+(\S+)\s+([A-Za-z]+(?::[A-Za-z]+)?)\s*:\s*(.+)$")


def _parse_rule(line: str, inventory: PhonemeInventory, where: str) -> RewriteRule:
    m = _RULE_RE.match(line)
    if not m:
        raise DataError(f"{where}: malformed RULE line")
    rid, phase, mode_text, body = m.groups()
    if mode_text == "single":
        mode, measure = "single", ""
    elif mode_text.startswith("fixpoint"):
        _, _, measure = mode_text.partition(":")
        if measure not in MEASURES:
            raise DataError(
                f"{where}: rule {rid!r} refused: fixpoint mode must declare a measure "
                f"from {MEASURES}"
            )
        mode = "fixpoint"
    else:
        raise DataError(f"{where}: unknown mode {mode_text!r}")

    if "->" not in body:
        raise DataError(f"{where}: rule {rid!r} lacks '->'")
    target_text, _, rest = body.partition("->")
    if "/" in rest:
        repl_text, _, ctx = rest.partition("/")
        if ctx.count("_") != 1:
            raise DataError(f"{where}: rule {rid!r} context needs exactly one '_'")
        left_text, _, right_text = ctx.partition("_")
    else:
        repl_text, left_text, right_text = rest, "", ""

    target = _parse_pattern(target_text.strip(), inventory, f"{where} rule {rid}", context=False)
    left = _parse_pattern(left_text.strip(), inventory, f"{where} rule {rid}", context=True)
    right = _parse_pattern(right_text.strip(), inventory, f"{where} rule {rid}", context=True)
    if any(t.kind == "edge" for t in left[1:]):
        raise DataError(f"{where}: rule {rid!r}: '#' in a left context goes first")
    if any(t.kind == "edge" for t in right[:-1]):
        raise DataError(f"{where}: rule {rid!r}: '#' in a right context goes last")
    n_captures = sum(1 for t in target if t.kind == "segment")
    replacement = _parse_replacement(repl_text.strip(), inventory, n_captures, f"{where} rule {rid}")
    return RewriteRule(rid, phase, mode, measure, target, replacement, left, right)


@dataclass(eq=False)
class RuleCascade:
    phases: tuple[str, ...]
    rules: tuple[RewriteRule, ...]
    harmony: dict[str, dict[str, str]]
    stress_map: dict[str, str]
    inventory: PhonemeInventory
    compound_ezafe: Morpheme | None = None
    compound_head: str = "last"
    compound_joiner: str = "-"
    _by_phase: dict[str, list[RewriteRule]] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.phases:
            raise DataError("cascade declares no phases")
        seen = set()
        for p in self.phases:
            if p in seen:
                raise DataError(f"duplicate phase {p!r}")
            seen.add(p)
        for r in self.rules:
            if r.phase not in seen:
                raise DataError(f"rule {r.id!r} names undeclared phase {r.phase!r}")
            self._by_phase.setdefault(r.phase, []).append(r)
        ids = [r.id for r in self.rules]
        if len(ids) != len(set(ids)):
            raise DataError("duplicate rule ids in cascade")

    def rules_for(self, phase: str) -> list[RewriteRule]:
        return self._by_phase.get(phase, [])

    def rule(self, rid: str) -> RewriteRule:
        for r in self.rules:
            if r.id == rid:
                return r
        raise DataError(f"no rule {rid!r} in cascade")


def _parse_harmony(line: str, inventory: PhonemeInventory, where: str) -> tuple[str, dict[str, str]]:
    parts = line.split()
    if len(parts) < 3:
        raise DataError(f"{where}: HARMONY needs a symbol and class=vowel pairs")
    sym = unicodedata.normalize("NFC", parts[1])
    if sym not in inventory or inventory.classify(sym) != ARCHIPHONEME:
        raise DataError(f"{where}: HARMONY target {sym!r} is not an archiphoneme")
    table: dict[str, str] = {}
    for pair in parts[2:]:
        klass, _, vowel = pair.partition("=")
        if klass not in HARMONY_CLASSES:
            raise DataError(f"{where}: unknown harmony class {klass!r}")
        vowel = unicodedata.normalize("NFC", vowel)
        if vowel not in inventory or inventory.classify(vowel) != VOWEL:
            raise DataError(f"{where}: harmony alternant {vowel!r} is not an inventory vowel")
        table[klass] = vowel
    return sym, table


def _parse_stress(line: str, inventory: PhonemeInventory, where: str) -> dict[str, str]:
    rest = line[len("STRESS"):].strip()
    if not rest.startswith("map"):
        raise DataError(f"{where}: STRESS line must read 'STRESS map a=á,...'")
    mapping: dict[str, str] = {}
    for pair in rest[3:].strip().split(","):
        plain, _, marked = pair.partition("=")
        plain = unicodedata.normalize("NFC", plain.strip())
        marked = unicodedata.normalize("NFC", marked.strip())
        for v in (plain, marked):
            if v not in inventory or inventory.classify(v) != VOWEL:
                raise DataError(f"{where}: stress map entry {v!r} is not an inventory vowel")
        mapping[plain] = marked
    return mapping


def _parse_compound(line: str, where: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for pair in line.split()[1:]:
        key, _, val = pair.partition("=")
        # the ezafe value itself ends in '=' ("ezafe=x="), so re-join
        if key == "ezafe":
            val = pair[len("ezafe="):]
        if key not in ("ezafe", "head", "joiner") or not val:
            raise DataError(f"{where}: bad COMPOUND setting {pair!r}")
        out[key] = val
    if out.get("head", "last") not in ("first", "last"):
        raise DataError(f"{where}: COMPOUND head must be 'first' or 'last'")
    return out


def load_cascade(path: str | Path, inventory: PhonemeInventory) -> RuleCascade:
    phases: tuple[str, ...] = ()
    rules: list[RewriteRule] = []
    harmony: dict[str, dict[str, str]] = {}
    stress: dict[str, str] = {}
    compound: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        where = f"{path}:{lineno}"
        if not line or line.startswith("#"):
            continue
        if line.startswith("PHASES:"):
            phases = tuple(p.strip() for p in line[len("PHASES:"):].split(",") if p.strip())
        elif line.startswith("HARMONY"):
            sym, table = _parse_harmony(line, inventory, where)
            harmony[sym] = table
        elif line.startswith("STRESS"):
            stress = _parse_stress(line, inventory, where)
        elif line.startswith("COMPOUND"):
            compound = _parse_compound(line, where)
        elif line.startswith("RULE"):
            rules.append(_parse_rule(line, inventory, where))
        else:
            raise DataError(f"{where}: unrecognized directive")
    ezafe = None
    if "ezafe" in compound:
        uform = parse_underlying(compound["ezafe"] + " host")
        first = uform.morphemes[0]
        if first.boundary != PROCLITIC:
            raise DataError(f"{path}: COMPOUND ezafe must be proclitic notation like 'x='")
        ezafe = Morpheme(first.form, PROCLITIC, gloss_tag="EZ")
    return RuleCascade(
        phases=phases,
        rules=tuple(rules),
        harmony=harmony,
        stress_map=stress,
        inventory=inventory,
        compound_ezafe=ezafe,
        compound_head=compound.get("head", "last"),
        compound_joiner=compound.get("joiner", "-"),
    )
