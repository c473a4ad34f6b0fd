"""Surface-to-underlying analysis: recovery, ranking, and glossing."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from camforge import data_path
from camforge.errors import DataError, DerivationError, NotationError, ResolutionError
from camforge.lexicon import Lexicon
from camforge.morphology import analyze, generate, gloss, load_cascade, serialize
from camforge.phonology import PhonemeInventory

INV = PhonemeInventory.from_file(data_path("inventory.tsv"))
CAS = load_cascade(data_path("demo.rules"), INV)
LEX = Lexicon.load(data_path("demo.lex"), cascade=CAS)


def parses_of(surface, **kw):
    return [serialize(p) for p in analyze(surface, CAS, LEX, **kw)]


def test_topic_word_both_parses():
    # the bare parse and the one with the deletable linking clitic
    assert parses_of("nosṇa") == ["nos =ṇA", "x= nos =ṇA"]


def test_derived_noun_single_parse():
    assert parses_of("cakma") == ["cak -mA4"]


def test_wh_word_parses_ranked_by_morpheme_count():
    got = parses_of("meni")
    assert got[0] == "me -nI"
    assert all(len(p.split()) >= 2 for p in got)
    counts = [len(p.split()) for p in got]
    assert counts == sorted(counts)


def test_published_case_round_trip():
    target = "lI= x= cew -RED -mA4 -s =jUr"
    assert generate(target, CAS).text == "lichéwcymyśür"
    assert target in parses_of("lichéwcymyśür")


def test_multi_word_analysis_recombines():
    got = parses_of("müś ńer")
    assert "müś -m= jer" in got


def test_every_parse_regenerates_the_surface():
    for surface in ("nosṇa", "meni", "cakma", "ghöt"):
        for p in analyze(surface, CAS, LEX):
            assert generate(p, CAS).text == surface


def test_no_parse_is_empty_list():
    assert parses_of("blixblax") == []


def test_unknown_symbol_raises():
    with pytest.raises(NotationError):
        analyze("caQ", CAS, LEX)


def test_candidate_cap_respected():
    assert len(parses_of("meni", max_candidates=2)) == 2
    with pytest.raises(DataError):
        analyze("meni", CAS, LEX, max_candidates=0)
    with pytest.raises(DataError):
        analyze("meni", CAS, LEX, max_affixes=0)


def test_gloss_of_topic_word():
    assert gloss("nos =ṇA", LEX) == "child =TOP"


def test_gloss_of_published_case():
    assert gloss("lI= x= cew -RED -mA4 -s =jUr", LEX) == "2SG= EZ= answer -PROG -NMLS -GEN =at"


def test_gloss_of_compound():
    assert gloss("kityb + cog", LEX) == "book + table"


def test_gloss_unknown_root_raises():
    with pytest.raises(DataError):
        gloss("blix -s", LEX)


_ROOTS = [form for form, _ in LEX.analysis_roots()]


# universally-attaching affixes, grouped by slot: stacks drawn with at
# most one affix per slot are grammatical by construction
_PRE_SLOTS = (("lI=", "mI="), ("x=",), ("n-",))
_POST_SLOTS = (("-Ir",), ("-s", "-nI"), ("=jUr", "=ṇA"))


@st.composite
def _stacked_words(draw):
    root = draw(st.sampled_from(_ROOTS))
    pre = [draw(st.sampled_from(slot)) for slot in _PRE_SLOTS if draw(st.booleans())]
    post = [draw(st.sampled_from(slot)) for slot in _POST_SLOTS if draw(st.booleans())]
    return " ".join([*pre, root, *post])


@given(_stacked_words())
@settings(max_examples=40, deadline=None)
def test_analysis_recovers_generated_words(word):
    try:
        surface = generate(word, CAS).text
    except (ResolutionError, DerivationError):
        return
    assert word in parses_of(surface, max_candidates=64)
