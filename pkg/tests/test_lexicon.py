"""Lexicon loading, lookup, word formation, sourcing, and export."""

import itertools
import string

import pytest

from camforge import data_path
from camforge.errors import DataError, RefusedError
from camforge.lexicon import (
    SOURCING_CATEGORIES,
    LexEntry,
    Lexicon,
    sourcing_report,
)


def test_demo_lexicon_loads(lexicon):
    assert len(lexicon) == 31
    assert [e.underlying for e in lexicon] == sorted(e.underlying for e in lexicon)
    assert len(lexicon.functional_morphemes) == 17


def test_lookup_by_underlying(lexicon):
    hits = lexicon.lookup("xöt")
    assert len(hits) == 1 and hits[0].gloss.startswith("must")
    assert lexicon.lookup("nope") == []


def test_lookup_by_citation(lexicon):
    hits = lexicon.lookup("kityb-chog", mode="by_citation")
    assert [e.underlying for e in hits] == ["kityb + cog"]


def test_lookup_by_surface_lemmatizes(lexicon, cascade):
    hits = lexicon.lookup("nosṇa", mode="by_surface", cascade=cascade)
    assert [e.underlying for e in hits] == ["nos"]
    # the modal surfaces with a fused initial; surface lookup still finds it
    hits = lexicon.lookup("ghöt", mode="by_surface", cascade=cascade)
    assert "xöt" in [e.underlying for e in hits]


def test_lookup_mode_validation(lexicon):
    with pytest.raises(DataError):
        lexicon.lookup("xöt", mode="by_telepathy")
    with pytest.raises(DataError):
        lexicon.lookup("xöt", mode="by_surface")  # needs a cascade


def test_headword_truncates_at_comma_and_paren(lexicon):
    assert lexicon.headword("cew") == "answer"
    assert lexicon.headword("xöt") == "must"
    assert lexicon.headword("blix") is None


def test_citation_check_on_load(tmp_path, cascade):
    bad = tmp_path / "bad.lex"
    bad.write_text(
        "underlying\tcitation\tgloss\tpos\thonorific\tsourcing\tetymology\n"
        "cak\tkac\twork\tv\tordinary\tnative\t\n",
        encoding="utf-8",
    )
    with pytest.raises(DataError, match="citation mismatch"):
        Lexicon.load(bad, cascade=cascade)


def test_citation_check_can_be_waived(tmp_path, cascade):
    ok = tmp_path / "ok.lex"
    ok.write_text(
        "underlying\tcitation\tgloss\tpos\thonorific\tsourcing\tetymology\tflags\n"
        "cak\tkac\twork\tv\tordinary\tnative\t\tno_citation_check\n",
        encoding="utf-8",
    )
    lex = Lexicon.load(ok, cascade=cascade)
    assert lex.entries[0].citation == "kac"


def test_duplicate_underlying_needs_homonym_flag():
    a = LexEntry("ta", "ta", "stone", "n")
    b = LexEntry("ta", "ta", "shore", "n")
    with pytest.raises(DataError, match="homonym"):
        Lexicon((a, b))
    flagged = tuple(
        LexEntry("ta", "ta", g, "n", flags=frozenset({"homonym"}))
        for g in ("stone", "shore")
    )
    assert len(Lexicon(flagged)) == 2


def test_entry_validation():
    with pytest.raises(DataError):
        LexEntry("cak", "cak", "work", "v", honorific="imperial")
    with pytest.raises(DataError):
        LexEntry("cak", "cak", "work", "v", sourcing="borrowed")
    with pytest.raises(DataError):
        LexEntry("cak  -s", "caksi", "work", "v")  # not normalized notation
    with pytest.raises(DataError):
        LexEntry("cak", "", "work", "v")


def test_derive_builds_candidate(lexicon, cascade):
    stem = lexicon.lookup("jer")[0]
    entry = lexicon.derive(stem, "-mA4", cascade)
    assert entry.underlying == "jer -mA4"
    assert entry.citation == "jermy"
    assert entry.pos == "n"
    assert entry.sourcing == "derived"
    assert entry.gloss == ""


def test_derive_with_prefixing_affix(lexicon, cascade):
    stem = lexicon.lookup("cak")[0]
    entry = lexicon.derive(stem, "pI4-", cascade)
    assert entry.underlying == "pI4- cak"
    assert entry.citation == "pycák"


def test_derive_refuses_inflection(lexicon, cascade):
    stem = lexicon.lookup("cak")[0]
    with pytest.raises(RefusedError):
        lexicon.derive(stem, "-s", cascade)


def test_derive_refuses_wrong_pos(lexicon, cascade):
    noun = lexicon.lookup("cog")[0]
    with pytest.raises(RefusedError):
        lexicon.derive(noun, "-mA4", cascade)  # verb-only nominaliser


def test_derive_unknown_affix(lexicon, cascade):
    stem = lexicon.lookup("cak")[0]
    with pytest.raises(DataError):
        lexicon.derive(stem, "-zzz", cascade)


def test_compound_head_supplies_pos(lexicon, cascade):
    ta = lexicon.lookup("ta")[0]
    cog = lexicon.lookup("cog")[0]
    entry = lexicon.compound([ta, cog], cascade)
    assert entry.underlying == "ta + cog"
    assert entry.citation == "ta-chog"
    assert entry.pos == cog.pos
    assert entry.sourcing == "compound"
    with pytest.raises(DataError):
        lexicon.compound([ta], cascade)


def test_with_entry_keeps_order(lexicon, cascade):
    stem = lexicon.lookup("jer")[0]
    bigger = lexicon.with_entry(lexicon.derive(stem, "-mA4", cascade))
    assert len(bigger) == len(lexicon) + 1
    forms = [e.underlying for e in bigger]
    assert forms == sorted(forms)


# ---------------------------------------------------------------- sourcing


def test_demo_sourcing_report(lexicon):
    rows = {r.category: r for r in sourcing_report(lexicon)}
    assert [rows[c].count for c in SOURCING_CATEGORIES] == [23, 5, 1, 1, 1]
    assert rows["native"].percent == 74.19
    assert rows["derived"].percent == 16.13
    assert rows["compound"].percent == 3.23


def _letters():
    for size in itertools.count(3):
        for combo in itertools.product(string.ascii_lowercase, repeat=size):
            yield "".join(combo)


def _synthetic_lexicon(counts):
    names = _letters()
    entries = []
    for category, n in zip(SOURCING_CATEGORIES, counts):
        for _ in range(n):
            form = next(names)
            entries.append(LexEntry(form, form, "x", "n", sourcing=category))
    return Lexicon(tuple(entries))


def test_sourcing_percentages_at_reference_scale():
    # the distribution of a 1511-entry dictionary: counts are the oracle,
    # the two-decimal percentages must come out exactly
    lex = _synthetic_lexicon([698, 588, 103, 80, 42])
    assert len(lex) == 1511
    got = [(r.count, r.percent) for r in sourcing_report(lex)]
    assert got == [
        (698, 46.19),
        (588, 38.91),
        (103, 6.82),
        (80, 5.29),
        (42, 2.78),
    ]


def test_sourcing_rounding_half_case():
    lex = _synthetic_lexicon([1, 1, 0, 0, 0])
    rows = sourcing_report(lex)
    assert [r.percent for r in rows] == [50.0, 50.0, 0.0, 0.0, 0.0]


def test_sourcing_empty_lexicon_rejected():
    with pytest.raises(DataError):
        sourcing_report(Lexicon(()))


# ------------------------------------------------------------------ export


def test_export_round_trip(tmp_path, lexicon, cascade):
    out = tmp_path / "vocab.tsv"
    lexicon.export(out)
    again = Lexicon.load(out, cascade=cascade, morph_path=data_path("demo.morph"))
    assert [(e.underlying, e.citation, e.gloss, e.pos) for e in again] == [
        (e.underlying, e.citation, e.gloss, e.pos) for e in lexicon
    ]
    assert [e.etymology for e in again] == [e.etymology for e in lexicon]


def test_model_facing_export_drops_etymology(tmp_path, lexicon):
    out = tmp_path / "vocab_model.tsv"
    lexicon.export(out, model_facing=True)
    header = out.read_text(encoding="utf-8").splitlines()[0].split("\t")
    assert "etymology" not in header
    assert header == ["underlying", "citation", "gloss", "pos", "honorific", "sourcing"]
    body = out.read_text(encoding="utf-8")
    assert "loan, donor form" not in body  # no etymology text leaks


def test_export_is_atomic_about_partial_state(tmp_path, lexicon):
    # a failed write must not leave a partial file behind
    target = tmp_path / "sub" / "vocab.tsv"
    with pytest.raises(OSError):
        lexicon.export(target)  # parent dir missing
    assert not target.exists()
