"""Feature profiles, similarity, neighbours, and feature richness."""

import io
import os

import pytest

from camforge import data_path
from camforge.errors import DataError
from camforge.typology import (
    Corpus,
    WalsProfile,
    camlang_profile,
    load_corpus,
    neighbours,
    richness_percentile,
    similarity,
)

X = WalsProfile("xxx", {"f1": 1, "f2": 2, "f3": 3})
Y = WalsProfile("yyy", {"f1": 1, "f2": 5, "f3": 3, "f4": 7})
Z = WalsProfile("zzz", {"f1": 2, "f2": 2})
W = WalsProfile("www", {"f9": 1})


def test_shipped_profile():
    cam = camlang_profile()
    assert cam.language_code == "cam"
    assert cam.name == "Camlang"
    assert len(cam) == 134
    assert cam.features["1A"] == 5
    assert cam.features["81A"] == 1


def test_profile_validation():
    with pytest.raises(DataError):
        WalsProfile("bad", {"f1": 0})
    with pytest.raises(DataError):
        WalsProfile("bad", {"f1": "SOV"})
    with pytest.raises(DataError):
        WalsProfile("", {"f1": 1})


def test_identity_similarity():
    cam = camlang_profile()
    r = similarity(cam, cam)
    assert (r.similarity, r.matches, r.overlap) == (1.0, 134, 134)


def test_hand_similarity_cases():
    r = similarity(X, Y)
    assert (r.overlap, r.matches) == (3, 2)
    assert r.similarity == pytest.approx(2 / 3)
    r = similarity(X, Z)
    assert (r.overlap, r.matches, r.similarity) == (2, 1, 0.5)
    assert similarity(X, W) is None  # no shared features
    assert similarity(X, Y, min_overlap=4) is None
    with pytest.raises(DataError):
        similarity(X, Y, min_overlap=0)


def test_similarity_is_symmetric():
    a = similarity(X, Y)
    b = similarity(Y, X)
    assert (a.similarity, a.overlap, a.matches) == (b.similarity, b.overlap, b.matches)


def test_neighbours_ranking_and_ties():
    corpus = Corpus(
        (
            WalsProfile("aaa", {"f1": 1, "f2": 2}),            # sim 1.0, overlap 2
            WalsProfile("bbb", {"f1": 1, "f2": 2, "f3": 9}),   # sim 2/3, overlap 3
            WalsProfile("ccc", {"f1": 1}),                      # sim 1.0, overlap 1
            WalsProfile("xxx", {"f1": 1}),                      # the target itself
        )
    )
    got = neighbours(X, corpus, k=4)
    # descending similarity; among equals the larger overlap wins
    assert [r.pair[1] for r in got] == ["aaa", "ccc", "bbb"]
    assert neighbours(X, corpus, k=1)[0].pair == ("xxx", "aaa")
    with pytest.raises(DataError):
        neighbours(X, corpus, k=0)


def test_neighbours_tie_breaks_on_code():
    corpus = Corpus(
        (
            WalsProfile("ddd", {"f1": 1, "f2": 2}),
            WalsProfile("aaa", {"f1": 1, "f2": 2}),
        )
    )
    assert [r.pair[1] for r in neighbours(X, corpus, k=2)] == ["aaa", "ddd"]


def test_neighbours_respects_min_overlap():
    corpus = Corpus((WalsProfile("aaa", {"f1": 1}),))
    assert neighbours(X, corpus, min_overlap=2) == []


def test_richness_percentile_is_strictly_less_fraction():
    corpus = Corpus(
        (
            WalsProfile("aaa", {"f1": 1}),
            WalsProfile("bbb", {"f1": 1, "f2": 2}),
            WalsProfile("ccc", {"f1": 1, "f2": 2, "f3": 3}),  # equal, not less
            WalsProfile("ddd", {n: 1 for n in "pqrs"}),       # richer
        )
    )
    assert richness_percentile(X, corpus) == pytest.approx(2 / 4)
    assert richness_percentile(W, corpus) == 0.0
    with pytest.raises(DataError):
        richness_percentile(X, Corpus(()))


# ------------------------------------------------------------------ loader


def test_load_corpus_comma_and_aliases():
    src = io.StringIO(
        "Language_ID,Parameter_ID,Value\n"
        "foo,81A,1 SOV\n"
        "foo,82A,3\n"
        "bar,81A,2\n"
    )
    corpus = load_corpus(src)
    assert len(corpus) == 2
    assert corpus.profile("foo").features == {"81A": 1, "82A": 3}
    assert corpus.get("baz") is None
    with pytest.raises(DataError):
        corpus.profile("baz")


def test_load_corpus_tab_delimited_with_names():
    src = io.StringIO(
        "language_code\tfeature_id\tvalue\tname\tgenus\tfamily\n"
        "foo\t81A\t1\tFooish\tfoo-genus\tfoo-family\n"
    )
    p = load_corpus(src).profile("foo")
    assert (p.name, p.genus, p.family) == ("Fooish", "foo-genus", "foo-family")


def test_load_corpus_duplicate_last_wins():
    src = io.StringIO(
        "language_code,feature_id,value\n"
        "foo,81A,1\n"
        "foo,81A,4\n"
    )
    corpus = load_corpus(src)
    assert corpus.profile("foo").features["81A"] == 4
    assert corpus.duplicate_count == 1


def test_load_corpus_reports_bad_line():
    src = io.StringIO(
        "language_code,feature_id,value\n"
        "foo,81A,SOV\n"
    )
    with pytest.raises(DataError, match="line 2"):
        load_corpus(src)


def test_load_corpus_rejects_missing_columns():
    with pytest.raises(DataError):
        load_corpus(io.StringIO("a,b,c\n1,2,3\n"))


def test_shipped_demo_corpus_numbers():
    corpus = load_corpus(data_path("demo.wals"))
    cam = camlang_profile()
    eng = similarity(cam, corpus.profile("eng"))
    tur = similarity(cam, corpus.profile("tur"))
    mns = similarity(cam, corpus.profile("mns"))
    assert (eng.overlap, eng.matches) == (60, 26)
    assert eng.similarity == pytest.approx(26 / 60)
    assert (tur.overlap, tur.matches) == (58, 37)
    assert (mns.overlap, mns.matches) == (52, 35)
    best = neighbours(cam, corpus, min_overlap=50, k=3)
    assert [r.pair[1] for r in best] == ["mns", "tur", "eng"]
    assert richness_percentile(cam, corpus) == 1.0


FULL_WALS = os.environ.get("FORGE_WALS_CSV", "")


@pytest.mark.skipif(not FULL_WALS, reason="FORGE_WALS_CSV not set")
def test_full_corpus_reference_numbers():
    corpus = load_corpus(FULL_WALS)
    cam = camlang_profile()
    eng = similarity(cam, corpus.profile("eng"), min_overlap=30)
    assert eng.similarity == pytest.approx(0.44, abs=0.02)
    assert abs(eng.overlap - 131) <= 3
    tur = similarity(cam, corpus.profile("tur"), min_overlap=30)
    assert tur.similarity == pytest.approx(0.63, abs=0.02)
    assert abs(tur.overlap - 133) <= 3
    top50 = neighbours(cam, corpus, min_overlap=50, k=1)[0]
    assert top50.pair[1] == "mns"
    assert top50.similarity == pytest.approx(0.68, abs=0.03)
    top40 = neighbours(cam, corpus, min_overlap=40, k=1)[0]
    assert top40.pair[1] == "dji"
    assert top40.similarity == pytest.approx(0.74, abs=0.03)
    assert richness_percentile(cam, corpus) == pytest.approx(0.9752, abs=0.005)
