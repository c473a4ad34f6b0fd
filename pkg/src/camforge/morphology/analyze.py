"""Surface analysis (generate-and-test) and interlinear glossing.

The analyzer enumerates candidate underlying forms from a lexicon's roots
and its functional-morpheme inventory, derives each candidate forward
through the cascade, and keeps the ones whose surface output equals the
input. Inverting contextual rewrite rules is not generally well defined,
so forward verification is the only soundness argument needed: anything
returned really does derive to the queried surface.

Two prunes keep the search tractable. A root is only tried when its
interior segments (everything after the first, which boundary mutations
may rewrite) survive as a subsequence of the de-accented surface, and a
partial stem is abandoned once its derivation stops being a prefix of the
target, ignoring the last two segments where juncture rules may still
rewrite material. Both assume rules touch only material near morpheme
boundaries, which holds for cascades in this rule language (targets and
contexts are finitely bounded around the rewrite site).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from pathlib import Path
from weakref import WeakKeyDictionary

from ..errors import DataError, DerivationError, ForgeError, ResolutionError
from ..phonology import PhonemeInventory
from .engine import generate
from .notation import (
    ENCLITIC,
    PREFIX,
    PROCLITIC,
    REDUPLICANT,
    ROOT,
    SUFFIX,
    Morpheme,
    UnderlyingForm,
    _classify,
    parse_underlying,
    serialize,
)
from .rules import RuleCascade

_PRE = (PROCLITIC, PREFIX)
_POST = (SUFFIX, ENCLITIC, REDUPLICANT)
_JUNCTURE_SLACK = 2  # trailing segments a later affix may still rewrite

# derivation results shared across analyze() calls on the same cascade
_GEN_MEMO: WeakKeyDictionary = WeakKeyDictionary()


@dataclass(frozen=True)
class FunctionalAffix:
    """One affix or clitic from the functional-morpheme inventory."""

    morpheme: Morpheme
    order: int  # slot: < 100 before the root, >= 100 after, ascending outward
    attaches: frozenset[str] | None  # parts of speech accepted; None = any
    result_pos: str = ""  # derived part of speech; "" = category-preserving

    @property
    def pre(self) -> bool:
        return self.morpheme.boundary in _PRE

    def accepts(self, pos: str) -> bool:
        return self.attaches is None or pos in self.attaches

    def notation(self) -> str:
        return self.morpheme.token()


def load_morph_table(
    path: str | Path, inventory: PhonemeInventory | None = None
) -> tuple[FunctionalAffix, ...]:
    """Load the functional-morpheme TSV (notation, gloss, order, attaches,
    result_pos). With an inventory, every form must tokenize against it."""
    rows: list[FunctionalAffix] = []
    seen: set[str] = set()
    header_skipped = False
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        cols = line.split("\t")
        if not header_skipped:
            header_skipped = True
            if cols[0].strip() == "notation":
                continue
        if len(cols) < 4:
            raise DataError(f"{path}:{lineno}: expected at least 4 tab-separated columns")
        notation, gloss, order_text, attaches_text = (c.strip() for c in cols[:4])
        result_pos = cols[4].strip() if len(cols) > 4 else ""
        if notation in seen:
            raise DataError(f"{path}:{lineno}: duplicate morpheme {notation!r}")
        seen.add(notation)
        base = _classify(notation, lineno)
        if base.boundary == ROOT:
            raise DataError(f"{path}:{lineno}: {notation!r} is a bare root, not an affix")
        if not gloss:
            raise DataError(f"{path}:{lineno}: missing gloss tag for {notation!r}")
        if inventory is not None and base.boundary != REDUPLICANT:
            inventory.tokenize(base.form)  # raises on unknown symbols
        try:
            order = int(order_text)
        except ValueError:
            raise DataError(f"{path}:{lineno}: bad slot order {order_text!r}") from None
        if order <= 0:
            raise DataError(f"{path}:{lineno}: slot order must be positive")
        attaches = (
            None
            if attaches_text == "*"
            else frozenset(t.strip() for t in attaches_text.split(",") if t.strip())
        )
        if attaches is not None and not attaches:
            raise DataError(f"{path}:{lineno}: empty attaches set for {notation!r}")
        morpheme = Morpheme(
            base.form, base.boundary, gloss_tag=gloss, linked=base.linked
        )
        rows.append(FunctionalAffix(morpheme, order, attaches, result_pos))
    if not rows:
        raise DataError(f"{path}: no functional morphemes found")
    return tuple(rows)


def _extendable_error(err: ForgeError) -> bool:
    """True when attaching more material at the right edge could still fix
    the failure: the word failed its whole-word check and the offending
    position sits inside the juncture window."""
    if not getattr(err, "final_validation", False):
        return False
    pos = getattr(err, "violation_pos", 0)
    return pos >= getattr(err, "word_len", 0) - _JUNCTURE_SLACK


def _slots(affixes, pre: bool) -> list[list[FunctionalAffix]]:
    """Group one side's affixes into slot buckets, ascending by order."""
    buckets: dict[int, list[FunctionalAffix]] = {}
    for a in affixes:
        if a.pre == pre:
            buckets.setdefault(a.order, []).append(a)
    return [sorted(buckets[o], key=lambda a: a.notation()) for o in sorted(buckets)]


class _WordSearch:
    def __init__(self, cascade: RuleCascade, lexicon, max_affixes: int):
        self.cascade = cascade
        self.inv = cascade.inventory
        self.max_affixes = max_affixes
        self.roots = list(lexicon.analysis_roots())
        affixes = lexicon.functional_morphemes
        self.pre_slots = _slots(affixes, pre=True)
        self.post_slots = _slots(affixes, pre=False)
        self.unaccent = {v: k for k, v in cascade.stress_map.items()}
        self._memo: dict[str, str | ForgeError] = _GEN_MEMO.setdefault(cascade, {})
        self._chains_by_pos: dict[str, list] = {}
        self._seg_counts: dict[str, int] = {}

    def _derive(self, morphemes: list[Morpheme]) -> str | ForgeError:
        key = serialize(UnderlyingForm(tuple(morphemes)))
        hit = self._memo.get(key)
        if hit is None:
            try:
                hit = generate(key, self.cascade).text
            except (DerivationError, ResolutionError) as e:
                hit = e
            self._memo[key] = hit
        return hit

    def _seg_count(self, form: str) -> int:
        n = self._seg_counts.get(form)
        if n is None:
            n = len(self.inv.tokenize(form))
            self._seg_counts[form] = n
        return n

    def _min_len(self, morphemes: list[Morpheme]) -> int:
        """Lower bound on the derived length: rules rewrite only around
        morpheme junctures, and no juncture loses more than two segments."""
        segs = sum(self._seg_count(m.form) for m in morphemes)
        return segs - 2 * (len(morphemes) - 1)

    def _plain_tokens(self, text: str) -> list[str]:
        return [self.unaccent.get(t, t) for t in self.inv.tokenize(text)]

    def _root_plausible(self, root_form: str, plain_target: list[str]) -> bool:
        interior = self.inv.tokenize(root_form)[1:]
        it = iter(plain_target)
        return all(tok in it for tok in interior)

    def _prefix_compatible(self, derived: str, target: list[str]) -> bool:
        tokens = self.inv.tokenize(derived)
        head = tokens[: max(len(tokens) - _JUNCTURE_SLACK, 0)]
        return head == target[: len(head)]

    def word(self, surface: str) -> list[str]:
        """All underlying notations (serialized) deriving to this word."""
        target = self.inv.tokenize(surface)  # strict: unknown symbols raise
        plain = [self.unaccent.get(t, t) for t in target]
        found: set[str] = set()
        for form, pos in self.roots:
            if not self._root_plausible(form, plain):
                continue
            root = Morpheme(form, ROOT)
            for chain, chain_pos in self._pre_chains(pos):
                stem = chain + [root]
                # a chain can only get longer than the bound allows if later
                # affixes never recover it, so drop the whole branch
                if self._min_len(stem) - (self.max_affixes - len(chain)) > len(target):
                    continue
                if self._min_len(stem) <= len(target):
                    got = self._derive(stem)
                    if isinstance(got, str):
                        if got == surface:
                            found.add(serialize(UnderlyingForm(tuple(stem))))
                        if not self._prefix_compatible(got, target):
                            continue
                    elif not _extendable_error(got):
                        # either the rules themselves rejected the stem (e.g.
                        # no root consonant to copy) or the flaw sits too far
                        # from the right edge for any suffix to repair
                        continue
                self._post_dfs(stem, chain_pos, len(chain), 0, surface, target, found)
        return sorted(found)

    def _pre_chains(self, root_pos: str):
        """Every slot-ordered pre-root chain compatible with the root."""
        cached = self._chains_by_pos.get(root_pos)
        if cached is not None:
            return cached
        chains = [([], root_pos)]
        for slot in self.pre_slots:
            extended = []
            for chain, pos in chains:
                extended.append((chain, pos))
                if len(chain) >= self.max_affixes:
                    continue
                for affix in slot:
                    if affix.accepts(pos):
                        extended.append(
                            (chain + [affix.morpheme], affix.result_pos or pos)
                        )
            chains = extended
        self._chains_by_pos[root_pos] = chains
        return chains

    def _post_dfs(self, stem, pos, n_affixes, slot_idx, surface, target, found):
        if n_affixes >= self.max_affixes:
            return
        for si in range(slot_idx, len(self.post_slots)):
            for affix in self.post_slots[si]:
                if not affix.accepts(pos):
                    continue
                cand = stem + [affix.morpheme]
                if self._min_len(cand) - (self.max_affixes - n_affixes - 1) > len(target):
                    continue
                if self._min_len(cand) <= len(target):
                    got = self._derive(cand)
                    if isinstance(got, str):
                        if got == surface:
                            found.add(serialize(UnderlyingForm(tuple(cand))))
                        if not self._prefix_compatible(got, target):
                            continue
                    elif not _extendable_error(got):
                        continue
                self._post_dfs(
                    cand,
                    affix.result_pos or pos,
                    n_affixes + 1,
                    si + 1,
                    surface,
                    target,
                    found,
                )

    def compound(self, surface: str) -> list[str]:
        """Underlying notations for a joiner-marked compound word."""
        parts = surface.split(self.cascade.compound_joiner)
        if any(not p for p in parts):
            return []
        per_part: list[list[str]] = []
        for i, part in enumerate(parts):
            last = i == len(parts) - 1
            options: list[str] = []
            for form, pos in self.roots:
                root = Morpheme(form, ROOT)
                if i == 0 and not last:
                    for chain, _ in self._pre_chains(pos):
                        cand = chain + [root]
                        if self._derive(cand) == part:
                            options.append(serialize(UnderlyingForm(tuple(cand))))
                elif not last:
                    if self._derive([root]) == part:
                        options.append(form)
                else:
                    target = self.inv.tokenize(part)
                    head = [self.cascade.compound_ezafe, root] if self.cascade.compound_ezafe else [root]
                    got = self._derive(head)
                    if isinstance(got, str):
                        if got == part:
                            options.append(form)
                        if not self._prefix_compatible(got, target):
                            continue
                    tail_found: set[str] = set()
                    self._post_dfs(head, pos, 0, 0, part, target, tail_found)
                    for notation in tail_found:
                        ez = self.cascade.compound_ezafe
                        prefix_len = len(ez.token()) + 1 if ez else 0
                        options.append(notation[prefix_len:])
            per_part.append(options)
        results = []
        for combo in product(*per_part):
            notation = combo[0]
            for piece in combo[1:]:
                notation += " + " + piece
            try:
                if generate(notation, self.cascade).text == surface:
                    results.append(notation)
            except ForgeError:
                continue
        return sorted(set(results))


def analyze(
    surface: str,
    cascade: RuleCascade,
    lexicon,
    max_affixes: int = 6,
    max_candidates: int = 10,
) -> list[UnderlyingForm]:
    """Recover underlying-form parses whose derivation equals `surface`.

    Multi-word input is analyzed word by word and recombined. Results are
    ranked by morpheme count, then by serialized notation; at most
    `max_candidates` are returned, and an unanalyzable surface yields an
    empty list. Symbols outside the inventory raise NotationError.
    """
    if max_affixes < 1 or max_candidates < 1:
        raise DataError("analysis limits must be positive")
    words = surface.split()
    if not words:
        raise DataError("empty surface string")
    search = _WordSearch(cascade, lexicon, max_affixes)
    per_word: list[list[str]] = []
    for w in words:
        if cascade.compound_joiner in w:
            options = search.compound(w)
        else:
            options = search.word(w)
        if not options:
            return []
        per_word.append(options)
    parses = [parse_underlying(" ".join(combo)) for combo in product(*per_word)]
    parses.sort(key=lambda u: (len(u.morphemes), serialize(u)))
    return parses[:max_candidates]


def _headword(gloss: str) -> str:
    return gloss.split(",")[0].split("(")[0].strip()


def gloss(parse: UnderlyingForm | str, lexicon) -> str:
    """Interlinear gloss: roots by their English headword, functional
    morphemes by gloss tag decorated with their boundary markers, joined
    with spaces (compound members joined with '+')."""
    if isinstance(parse, str):
        parse = parse_underlying(parse)
    by_notation = {a.notation(): a for a in lexicon.functional_morphemes}
    out: list[str] = []
    for m in parse.morphemes:
        if m.is_root:
            head = lexicon.headword(m.form)
            if head is None:
                raise DataError(f"no lexicon entry for root {m.form!r}")
            if m.joined:
                out.append("+")
            out.append(head)
            continue
        tag = m.gloss_tag
        if not tag:
            affix = by_notation.get(m.token())
            tag = affix.morpheme.gloss_tag if affix else ""
        if not tag:
            raise DataError(f"no gloss tag for functional morpheme {m.token()!r}")
        if m.boundary == PREFIX:
            out.append(tag + "-")
        elif m.boundary in (SUFFIX, REDUPLICANT):
            out.append("-" + tag)
        elif m.boundary == PROCLITIC:
            out.append(("-" if m.linked else "") + tag + "=")
        else:  # enclitic
            out.append("=" + tag)
    return " ".join(out)
