"""Forward derivation: assemble a word, run the cascade, keep a trace.

A working word is a list of segments, each remembering which morpheme it
came from; morpheme boundaries are recovered from those indices rather
than stored as pseudo-segments, so rules may freely insert and delete
material without bookkeeping. Harmony resolution and accent placement are
directive-driven and run inside their declared phases ("harmony",
"orthography"); everything else is ordinary rewrite rules.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import DataError, DerivationError, ResolutionError
from ..phonology import ARCHIPHONEME, VOWEL, PhonemeInventory, validate_phonotactics
from .notation import (
    ENCLITIC,
    PROCLITIC,
    ROOT,
    Morpheme,
    UnderlyingForm,
    parse_underlying,
)
from .rules import PatternToken, RewriteRule, RuleCascade

_MAX_FIXPOINT_SWEEPS = 10_000


@dataclass(frozen=True)
class Seg:
    symbol: str
    morph: int  # index into the word's morpheme tuple


class WordState:
    """One phonological word mid-derivation."""

    def __init__(self, morphemes: tuple[Morpheme, ...], segs: list[Seg], inventory: PhonemeInventory):
        self.morphemes = morphemes
        self.segs = segs
        self.inventory = inventory

    @property
    def text(self) -> str:
        return "".join(s.symbol for s in self.segs)

    def boundary_at(self, i: int) -> bool:
        """Is there a morpheme boundary between segs[i-1] and segs[i]?"""
        if not 0 < i < len(self.segs):
            return False
        return self.segs[i - 1].morph != self.segs[i].morph

    def clitic_boundary_at(self, i: int) -> bool:
        if not self.boundary_at(i):
            return False
        kinds = (
            self.morphemes[self.segs[i - 1].morph].boundary,
            self.morphemes[self.segs[i].morph].boundary,
        )
        return PROCLITIC in kinds or ENCLITIC in kinds

    def copy(self) -> "WordState":
        return WordState(self.morphemes, list(self.segs), self.inventory)


def assemble(word: tuple[Morpheme, ...], inventory: PhonemeInventory) -> WordState:
    segs: list[Seg] = []
    for mi, m in enumerate(word):
        for sym in inventory.tokenize(m.form):
            segs.append(Seg(sym, mi))
    return WordState(word, segs, inventory)


def _segment_matches(state: WordState, idx: int, tok: PatternToken) -> bool:
    seg = state.segs[idx]
    entry = state.inventory.segments.get(seg.symbol)
    if entry is None:
        return False
    if tok.symbol:
        if seg.symbol != tok.symbol:
            return False
    else:
        if tok.seg_class == "V":
            if not entry.vowel_like:
                return False
        else:  # "C"
            if entry.vowel_like:
                return False
        if not tok.features <= entry.features:
            return False
    if tok.tag:
        morpheme = state.morphemes[seg.morph]
        if tok.tag == "red":
            if morpheme.boundary != "reduplicant":
                return False
        elif morpheme.gloss_tag.lower() != tok.tag.lower():
            return False
    return True


def _boundary_matches(state: WordState, i: int, tok: PatternToken) -> bool:
    return state.clitic_boundary_at(i) if tok.clitic_only else state.boundary_at(i)


def _match_target(state: WordState, pos: int, rule: RewriteRule):
    """Try the target at pos; return (end, captured indices) or None."""
    i = pos
    captured: list[int] = []
    for tok in rule.target:
        if tok.kind == "boundary":
            if not _boundary_matches(state, i, tok):
                return None
        else:
            if i >= len(state.segs) or not _segment_matches(state, i, tok):
                return None
            captured.append(i)
            i += 1
    return i, captured


def _match_left(state: WordState, pos: int, tokens: tuple[PatternToken, ...]) -> bool:
    j = pos
    for tok in reversed(tokens):
        if tok.kind == "edge":
            return j == 0
        if tok.kind == "boundary":
            if not _boundary_matches(state, j, tok):
                return False
        else:
            if j == 0 or not _segment_matches(state, j - 1, tok):
                return False
            j -= 1
    return True


def _match_right(state: WordState, end: int, tokens: tuple[PatternToken, ...]) -> bool:
    j = end
    for tok in tokens:
        if tok.kind == "edge":
            return j == len(state.segs)
        if tok.kind == "boundary":
            if not _boundary_matches(state, j, tok):
                return False
        else:
            if j >= len(state.segs) or not _segment_matches(state, j, tok):
                return False
            j += 1
    return True


def _root_anchor(state: WordState, want_vowel: bool, rule_id: str) -> str:
    for seg in state.segs:
        if state.morphemes[seg.morph].boundary != ROOT:
            continue
        entry = state.inventory.segments.get(seg.symbol)
        if entry is None or entry.cls == ARCHIPHONEME:
            continue
        if entry.vowel_like == want_vowel:
            return seg.symbol
    kind = "vowel" if want_vowel else "consonant"
    raise DerivationError(f"rule {rule_id!r} needs a root {kind} and the word has none")


def _sweep(state: WordState, rule: RewriteRule) -> bool:
    changed = False
    pos = 0
    while pos < len(state.segs):
        hit = _match_target(state, pos, rule)
        if hit is None:
            pos += 1
            continue
        end, captured = hit
        if not (_match_left(state, pos, rule.left) and _match_right(state, end, rule.right)):
            pos += 1
            continue
        host = state.segs[captured[-1]].morph
        new: list[Seg] = []
        for tok in rule.replacement:
            if tok.kind == "capture":
                new.append(state.segs[captured[tok.index]])
            elif tok.kind == "literal":
                new.append(Seg(tok.symbol, host))
            elif tok.kind == "root_c1":
                new.append(Seg(_root_anchor(state, False, rule.id), host))
            else:  # root_v1
                new.append(Seg(_root_anchor(state, True, rule.id), host))
        state.segs[pos:end] = new
        changed = True
        # continue scanning right after the replacement; after a deletion
        # the next unseen segment has shifted into pos itself
        pos += len(new)
    return changed


def _measure(state: WordState, name: str) -> int:
    if name == "length":
        return len(state.segs)
    vv = 0
    for i in range(1, len(state.segs)):
        a = state.inventory.segments.get(state.segs[i - 1].symbol)
        b = state.inventory.segments.get(state.segs[i].symbol)
        if a is not None and b is not None and a.vowel_like and b.vowel_like:
            vv += 1
    return vv


def _apply_inplace(rule: RewriteRule, state: WordState) -> None:
    if rule.mode == "single":
        _sweep(state, rule)
        return
    sweeps = 0
    while True:
        before = _measure(state, rule.measure)
        if not _sweep(state, rule):
            return
        after = _measure(state, rule.measure)
        if after >= before:
            raise DerivationError(
                f"non-termination: rule {rule.id!r} did not reduce {rule.measure} "
                f"({before} -> {after})"
            )
        sweeps += 1
        if sweeps > _MAX_FIXPOINT_SWEEPS:
            raise DerivationError(f"non-termination: rule {rule.id!r} exceeded sweep budget")


def apply_rule(rule: RewriteRule, word: WordState) -> WordState:
    """Apply one rule to a word state, returning a new state.

    Single mode does one non-overlapping left-to-right sweep. Fixpoint
    mode repeats sweeps until nothing changes, demanding that the rule's
    declared measure strictly decrease on every changing sweep.
    """
    state = word.copy()
    _apply_inplace(rule, state)
    return state


@dataclass(frozen=True)
class TraceStep:
    unit: int  # derivation unit (one per word, or per compound part)
    phase: str
    rule: str
    before: str
    after: str


@dataclass(frozen=True)
class SurfaceForm:
    text: str
    unit_texts: tuple[str, ...]
    separators: tuple[str, ...]  # between consecutive units: " " or the compound joiner
    trace: tuple[TraceStep, ...] | None = None

    def replay(self) -> str:
        """Re-run the recorded trace and return the reconstructed text.

        Raises DataError if the trace chain is broken or disagrees with
        the stored surface text.
        """
        if self.trace is None:
            raise DataError("surface form carries no trace")
        finals: dict[int, str] = {}
        current: dict[int, str] = {}
        for step in self.trace:
            if step.unit in current and current[step.unit] != step.before:
                raise DataError(
                    f"broken trace for unit {step.unit}: {current[step.unit]!r} != {step.before!r}"
                )
            current[step.unit] = step.after
            finals[step.unit] = step.after
        parts = [finals.get(i, t) for i, t in enumerate(self.unit_texts)]
        if tuple(parts) != self.unit_texts:
            raise DataError("trace replay disagrees with the recorded unit texts")
        out = parts[0]
        for sep, part in zip(self.separators, parts[1:]):
            out += sep + part
        if out != self.text:
            raise DataError("trace replay disagrees with the surface text")
        return out


def _resolve_harmony(state: WordState, cascade: RuleCascade, record) -> None:
    inv = state.inventory
    for idx in range(len(state.segs)):
        seg = state.segs[idx]
        entry = inv.segments.get(seg.symbol)
        if entry is None or entry.cls != ARCHIPHONEME or not entry.vowel_like:
            continue
        table = cascade.harmony.get(seg.symbol)
        if table is None:
            continue  # left for later phases; the final check will complain
        trigger = None
        best = None
        for j, other in enumerate(state.segs):
            if state.morphemes[other.morph].boundary != ROOT:
                continue
            o_entry = inv.segments.get(other.symbol)
            if o_entry is None or o_entry.cls != VOWEL:
                continue
            d = abs(j - idx)
            if best is None or d < best:
                best, trigger = d, o_entry
        if trigger is None:
            raise ResolutionError(
                f"cannot resolve {seg.symbol!r}: no concrete root vowel to harmonise with"
            )
        key4 = ("f" if "front" in trigger.features else "b") + (
            "r" if "round" in trigger.features else "u"
        )
        key2 = "front" if "front" in trigger.features else "back"
        vowel = table.get(key4) or table.get(key2)
        if vowel is None:
            raise ResolutionError(
                f"harmony table for {seg.symbol!r} lacks class {key4}/{key2}"
            )
        before = state.text
        state.segs[idx] = Seg(vowel, seg.morph)
        record("harmony", f"harmony:{seg.symbol}", before, state.text)


def _apply_stress(state: WordState, cascade: RuleCascade, record) -> None:
    if not cascade.stress_map:
        return
    inv = state.inventory
    first_root_vowel = None
    for j, seg in enumerate(state.segs):
        entry = inv.segments.get(seg.symbol)
        if (
            entry is not None
            and entry.cls == VOWEL
            and state.morphemes[seg.morph].boundary == ROOT
        ):
            first_root_vowel = j
            break
    if first_root_vowel is None:
        return
    preceded = any(
        (e := inv.segments.get(s.symbol)) is not None and e.vowel_like
        for s in state.segs[:first_root_vowel]
    )
    if not preceded:
        return
    marked = cascade.stress_map.get(state.segs[first_root_vowel].symbol)
    if marked is None:
        return
    before = state.text
    state.segs[first_root_vowel] = Seg(marked, state.segs[first_root_vowel].morph)
    record("orthography", "stress", before, state.text)


def _derive_unit(
    word: tuple[Morpheme, ...],
    cascade: RuleCascade,
    unit: int,
    steps: list[TraceStep] | None,
) -> str:
    state = assemble(word, cascade.inventory)

    def record(phase: str, rule: str, before: str, after: str) -> None:
        if steps is not None and before != after:
            steps.append(TraceStep(unit, phase, rule, before, after))

    trace_on = steps is not None
    if trace_on:
        steps.append(TraceStep(unit, "assemble", "-", state.text, state.text))
    for phase in cascade.phases:
        if phase == "harmony":
            _resolve_harmony(state, cascade, record)
        for rule in cascade.rules_for(phase):
            if trace_on:
                before = state.text
                _apply_inplace(rule, state)
                record(phase, rule.id, before, state.text)
            else:
                _apply_inplace(rule, state)
        if phase == "orthography":
            _apply_stress(state, cascade, record)

    for i, seg in enumerate(state.segs):
        entry = cascade.inventory.segments.get(seg.symbol)
        if entry is not None and entry.cls == ARCHIPHONEME:
            err = ResolutionError(
                f"unresolved archiphoneme {seg.symbol!r} survives in {state.text!r}"
            )
            # whole-word check: more material might have let a rule fire
            err.final_validation = True
            err.violation_pos = i
            err.word_len = len(state.segs)
            raise err
    violations = validate_phonotactics([s.symbol for s in state.segs], cascade.inventory)
    if violations:
        err = DerivationError(
            f"derivation produced ill-formed {state.text!r}: {violations[0]}"
        )
        err.final_validation = True
        err.violation_pos = violations[0].position
        err.word_len = len(state.segs)
        raise err
    return state.text


def _split_compound(
    word: tuple[Morpheme, ...], cascade: RuleCascade
) -> list[tuple[Morpheme, ...]]:
    root_idx = [i for i, m in enumerate(word) if m.is_root]
    first, last = root_idx[0], root_idx[-1]
    pre, post = word[:first], word[last + 1 :]
    parts: list[list[Morpheme]] = []
    for k, ri in enumerate(root_idx):
        plain = Morpheme(word[ri].form, ROOT, gloss_tag=word[ri].gloss_tag)
        part: list[Morpheme] = [plain]
        if k == 0:
            part = list(pre) + part
        if k == len(root_idx) - 1:
            part = part + list(post)
        parts.append(part)
    head = len(parts) - 1 if cascade.compound_head == "last" else 0
    if cascade.compound_ezafe is not None:
        parts[head].insert(0, cascade.compound_ezafe)
    return [tuple(p) for p in parts]


def generate(
    uform: UnderlyingForm | str, cascade: RuleCascade, trace: bool = False
) -> SurfaceForm:
    """Derive the surface form of an underlying form (or notation string).

    Deterministic; raises ResolutionError when an archiphoneme or the RED
    placeholder survives the cascade, DerivationError when the output
    breaks phonotactics or a fixpoint rule fails to terminate.
    """
    if isinstance(uform, str):
        uform = parse_underlying(uform)
    steps: list[TraceStep] | None = [] if trace else None
    unit_texts: list[str] = []
    separators: list[str] = []
    unit = 0
    for wi, word in enumerate(uform.words):
        if wi > 0:
            separators.append(" ")
        if any(m.joined for m in word):
            parts = _split_compound(word, cascade)
            for pi, part in enumerate(parts):
                if pi > 0:
                    separators.append(cascade.compound_joiner)
                unit_texts.append(_derive_unit(part, cascade, unit, steps))
                unit += 1
        else:
            unit_texts.append(_derive_unit(word, cascade, unit, steps))
            unit += 1
    text = unit_texts[0]
    for sep, part in zip(separators, unit_texts[1:]):
        text += sep + part
    return SurfaceForm(
        text=text,
        unit_texts=tuple(unit_texts),
        separators=tuple(separators),
        trace=tuple(steps) if steps is not None else None,
    )
