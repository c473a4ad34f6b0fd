"""Underlying-form notation: space-separated morphemes with boundary markers.

Marker conventions: ``X=`` proclitic, ``=X`` enclitic, ``X-`` prefix,
``-X`` suffix, ``-RED`` reduplicant, bare token root, ``+`` joins two
roots into a compound, and ``-X=`` is a proclitic written with a leading
hyphen because it belongs morphologically to the preceding word (the
infinitive linker in "müś -m= jer").

A notation string may cover several phonological words; word grouping is
derived from the morpheme sequence (a new word starts at any bare root or
pre-attaching morpheme once the current word already has its core).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import NotationError

ROOT = "root"
PREFIX = "prefix"
SUFFIX = "suffix"
PROCLITIC = "proclitic"
ENCLITIC = "enclitic"
REDUPLICANT = "reduplicant"

BOUNDARIES = (ROOT, PREFIX, SUFFIX, PROCLITIC, ENCLITIC, REDUPLICANT)
_PRE = (PROCLITIC, PREFIX)
_POST = (SUFFIX, ENCLITIC, REDUPLICANT)
_MARKER_CHARS = set("-=+")


@dataclass(frozen=True)
class Morpheme:
    form: str
    boundary: str
    gloss_tag: str = ""
    linked: bool = False  # written -X=: leans on the previous word
    joined: bool = False  # root glued to the previous root by "+"

    def __post_init__(self):
        if self.boundary not in BOUNDARIES:
            raise NotationError(f"unknown boundary type {self.boundary!r}")
        if not self.form:
            raise NotationError("empty morpheme form")
        if _MARKER_CHARS & set(self.form):
            raise NotationError(f"marker character inside morpheme form {self.form!r}")
        if (self.boundary == REDUPLICANT) != (self.form == "RED"):
            raise NotationError(
                "the reduplicant boundary type and the RED placeholder imply each other"
            )
        if self.linked and self.boundary != PROCLITIC:
            raise NotationError("only proclitics can carry the linking hyphen")
        if self.joined and self.boundary != ROOT:
            raise NotationError("only roots can be compound-joined")

    @property
    def is_root(self) -> bool:
        return self.boundary == ROOT

    def token(self) -> str:
        """The notation token this morpheme serializes to (sans any '+')."""
        if self.boundary == ROOT:
            return self.form
        if self.boundary == PREFIX:
            return self.form + "-"
        if self.boundary == SUFFIX or self.boundary == REDUPLICANT:
            return "-" + self.form
        if self.boundary == PROCLITIC:
            return ("-" if self.linked else "") + self.form + "="
        return "=" + self.form  # enclitic


def _classify(token: str, pos: int) -> Morpheme:
    if token.startswith("-") and token.endswith("=") and len(token) > 2:
        return Morpheme(token[1:-1], PROCLITIC, linked=True)
    if token.startswith("="):
        form = token[1:]
        if not form:
            raise NotationError(f"dangling clitic marker at token {pos}")
        return Morpheme(form, ENCLITIC)
    if token.endswith("="):
        form = token[:-1]
        if not form:
            raise NotationError(f"dangling clitic marker at token {pos}")
        return Morpheme(form, PROCLITIC)
    if token.startswith("-"):
        form = token[1:]
        if not form:
            raise NotationError(f"dangling affix marker at token {pos}")
        if form == "RED":
            return Morpheme(form, REDUPLICANT)
        return Morpheme(form, SUFFIX)
    if token.endswith("-"):
        form = token[:-1]
        if not form:
            raise NotationError(f"dangling affix marker at token {pos}")
        return Morpheme(form, PREFIX)
    if token == "RED":
        raise NotationError(f"bare RED at token {pos}: the reduplicant is written -RED")
    return Morpheme(token, ROOT)


@dataclass(frozen=True)
class UnderlyingForm:
    morphemes: tuple[Morpheme, ...]
    _words: tuple[tuple[Morpheme, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.morphemes:
            raise NotationError("empty underlying form")
        object.__setattr__(self, "_words", _group_words(self.morphemes))

    @property
    def words(self) -> tuple[tuple[Morpheme, ...], ...]:
        return self._words

    def __len__(self) -> int:
        return len(self.morphemes)

    def __iter__(self):
        return iter(self.morphemes)


def _group_words(morphemes: tuple[Morpheme, ...]) -> tuple[tuple[Morpheme, ...], ...]:
    words: list[list[Morpheme]] = []
    current: list[Morpheme] = []
    has_root = False
    for m in morphemes:
        starts_new = current and has_root and (
            (m.boundary == ROOT and not m.joined) or m.boundary in _PRE
        )
        if starts_new:
            words.append(current)
            current, has_root = [], False
        current.append(m)
        has_root = has_root or m.is_root
    words.append(current)
    for w in words:
        _check_word(w)
    return tuple(tuple(w) for w in words)


def _check_word(word: list[Morpheme]) -> None:
    root_idx = [i for i, m in enumerate(word) if m.is_root]
    if not root_idx:
        raise NotationError(
            "word group %r lacks a root core" % " ".join(m.token() for m in word)
        )
    if root_idx != list(range(root_idx[0], root_idx[-1] + 1)):
        raise NotationError("two root cores in one word group")
    for i, m in enumerate(word):
        if m.boundary in _POST and i < root_idx[0]:
            raise NotationError(f"{m.token()!r} precedes the root core it attaches to")
        if m.boundary in _PRE and i > root_idx[-1]:
            raise NotationError(f"{m.token()!r} follows the root core it attaches to")
    for m in word[root_idx[0] + 1 : root_idx[-1] + 1]:
        if not m.joined:
            raise NotationError("two root cores in one word group")


def parse_underlying(notation: str) -> UnderlyingForm:
    """Parse space-separated morpheme notation into an UnderlyingForm.

    Raises NotationError (with token position) on dangling markers, empty
    morphemes, misplaced joiners, or word groups without a single
    contiguous root core.
    """
    tokens = notation.split()
    if not tokens:
        raise NotationError("empty notation")
    morphemes: list[Morpheme] = []
    pending_join = False
    for pos, tok in enumerate(tokens):
        if tok == "+":
            if pending_join or not morphemes or not morphemes[-1].is_root:
                raise NotationError(f"misplaced compound joiner at token {pos}")
            pending_join = True
            continue
        m = _classify(tok, pos)
        if pending_join:
            if not m.is_root:
                raise NotationError(
                    f"compound joiner must be followed by a root, got {tok!r} at token {pos}"
                )
            m = Morpheme(m.form, ROOT, joined=True)
            pending_join = False
        morphemes.append(m)
    if pending_join:
        raise NotationError("trailing compound joiner")
    return UnderlyingForm(tuple(morphemes))


def serialize(uform: UnderlyingForm) -> str:
    """Normalized notation: single-space-separated tokens.

    parse_underlying(serialize(u)) == u for every valid u, and
    serialize(parse_underlying(s)) == s whenever s is already normalized.
    """
    out: list[str] = []
    for m in uform.morphemes:
        if m.joined:
            out.append("+")
        out.append(m.token())
    return " ".join(out)
