import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chisquare

from camforge import data_path
from camforge.errors import BudgetError, DataError, NotationError
from camforge.phonology import (
    PhonemeInventory,
    Segment,
    SlotFrequencyTable,
    generate_root,
    generate_root_batch,
    load_slot_tables,
    tables_for_shape,
    validate_phonotactics,
    weighted_choice,
)


@pytest.fixture(scope="module")
def inventory():
    return PhonemeInventory.from_file(data_path("inventory.tsv"))


@pytest.fixture(scope="module")
def tables():
    return load_slot_tables(data_path("roots.tables"))


def test_inventory_counts(inventory):
    assert len(inventory.consonants) == 36
    assert len(inventory.vowels) == 13
    assert inventory.archiphonemes == {"A", "A4", "I", "I4", "U", "G", "RED"}
    # 20 citation consonants plus every vowel
    assert len(inventory.native_citation_subset) == 33
    assert "ch" not in inventory.native_citation_subset
    assert "ṇ" in inventory.native_citation_subset


def test_tokenize_longest_match(inventory):
    assert inventory.tokenize("chog") == ["ch", "o", "g"]
    assert inventory.tokenize("kityb") == ["k", "i", "t", "y", "b"]
    assert inventory.tokenize("ṇagh") == ["ṇ", "a", "gh"]


def test_tokenize_strict_raises(inventory):
    with pytest.raises(NotationError):
        inventory.tokenize("caQ")
    assert inventory.tokenize("caQ", strict=False) == ["c", "a", "Q"]


def test_tokenize_nfc_normalises(inventory):
    # u + combining acute should collapse to the precomposed vowel
    assert inventory.tokenize("ú") == ["ú"]


def test_archiphoneme_requires_tag():
    with pytest.raises(DataError):
        PhonemeInventory([Segment("Q", "archiphoneme", frozenset())])


def test_duplicate_symbol_rejected():
    seg = Segment("k", "consonant", frozenset())
    with pytest.raises(DataError):
        PhonemeInventory([seg, seg])


def test_validate_clean_words(inventory):
    for word in ("kityb", "cakma", "soruk", "nos", "wec", "irwéc"):
        assert validate_phonotactics(word, inventory) == []


def test_validate_adjacent_vowels(inventory):
    bad = validate_phonotactics("cea", inventory)
    assert [(v.kind, v.position) for v in bad] == [("adjacent-vowels", 2)]


def test_validate_clusters(inventory):
    bad = validate_phonotactics("krat", inventory)
    assert [(v.kind, v.position) for v in bad] == [("illegal-cluster", 0)]
    bad = validate_phonotactics("wecs", inventory)
    assert [(v.kind, v.position) for v in bad] == [("illegal-cluster", 2)]
    bad = validate_phonotactics("astra", inventory)
    assert [(v.kind, v.position) for v in bad] == [("illegal-cluster", 1)]
    # two medial consonants stay legal
    assert validate_phonotactics("carka", inventory) == []


def test_validate_no_vowel_and_unknown(inventory):
    bad = validate_phonotactics("pst", inventory)
    assert bad[0].kind == "no-vowel"
    bad = validate_phonotactics("kaQ", inventory)
    assert ("unknown-symbol", 2) in [(v.kind, v.position) for v in bad]


def test_validate_empty_raises(inventory):
    with pytest.raises(NotationError):
        validate_phonotactics("", inventory)


def test_slot_table_rejects_bad_weights():
    with pytest.raises(DataError):
        SlotFrequencyTable("c1", {"k": 0.0})
    with pytest.raises(DataError):
        SlotFrequencyTable("c1", {})


def test_load_slot_tables_errors(tmp_path):
    p = tmp_path / "bad.tables"
    p.write_text("k 3\n", encoding="utf-8")
    with pytest.raises(DataError):
        load_slot_tables(p)
    p.write_text("[slot c1]\nk three\n", encoding="utf-8")
    with pytest.raises(DataError):
        load_slot_tables(p)
    p.write_text("[slot c1]\nk 1\n[slot c1]\nt 1\n", encoding="utf-8")
    with pytest.raises(DataError):
        load_slot_tables(p)


def test_tables_for_shape(tables):
    mono = tables_for_shape("mono", tables)
    assert [t.slot_id for t in mono] == ["c1", "c2", "c3"]
    bi = tables_for_shape("bisyllabic", tables)
    assert [t.slot_id for t in bi] == ["c1", "c2", "c3a", "c4", "c5", "c6"]
    with pytest.raises(DataError):
        tables_for_shape("trisyllabic", tables)


def test_generation_deterministic(inventory, tables):
    slots = tables_for_shape("mono", tables)
    a = generate_root_batch(random.Random(99), slots, inventory, 50)
    b = generate_root_batch(random.Random(99), slots, inventory, 50)
    assert [r.text for r in a] == [r.text for r in b]
    c = generate_root_batch(random.Random(100), slots, inventory, 50)
    assert [r.text for r in a] != [r.text for r in c]


@pytest.mark.parametrize("shape,length", [("mono", 3), ("bi", 6)])
def test_generated_roots_are_valid(inventory, tables, shape, length):
    slots = tables_for_shape(shape, tables)
    for root in generate_root_batch(random.Random(3), slots, inventory, 500, shape):
        assert len(root.symbols) == length
        assert validate_phonotactics(list(root.symbols), inventory) == []


def test_dedup_produces_unique(inventory, tables):
    slots = tables_for_shape("mono", tables)
    roots = generate_root_batch(
        random.Random(5), slots, inventory, 300, dedup=True
    )
    texts = [r.text for r in roots]
    assert len(set(texts)) == len(texts)


def test_dedup_skips_known(inventory, tables):
    slots = tables_for_shape("mono", tables)
    known = {
        r.text
        for r in generate_root_batch(random.Random(5), slots, inventory, 50, dedup=True)
    }
    fresh = generate_root_batch(
        random.Random(5), slots, inventory, 50, dedup=True, known=set(known)
    )
    assert not known & {r.text for r in fresh}


def test_dedup_budget_exhaustion(inventory):
    # with one symbol per slot only a single root exists
    slots = [
        SlotFrequencyTable("c1", {"k": 1.0}),
        SlotFrequencyTable("c2", {"a": 1.0}),
        SlotFrequencyTable("c3", {"t": 1.0}),
    ]
    with pytest.raises(BudgetError):
        generate_root_batch(random.Random(0), slots, inventory, 2, dedup=True)


def test_sampling_matches_weights(inventory, tables):
    """Chi-square goodness of fit per slot over a large dedup-free sample."""
    slots = tables_for_shape("mono", tables)
    n = 10_000
    roots = generate_root_batch(random.Random(7), slots, inventory, n)
    for pos, table in enumerate(slots):
        counts = {sym: 0 for sym in table.entries}
        for root in roots:
            counts[root.symbols[pos]] += 1
        total_w = sum(table.entries.values())
        observed = [counts[sym] for sym in table.entries]
        expected = [n * w / total_w for w in table.entries.values()]
        result = chisquare(observed, expected)
        assert result.pvalue > 0.01, f"slot {table.slot_id}: p={result.pvalue:.5f}"


@given(st.integers(min_value=0, max_value=2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_weighted_choice_respects_support(seed):
    rng = random.Random(seed)
    table = SlotFrequencyTable("c2", {"a": 0.5, "e": 0.25, "i": 0.25})
    assert weighted_choice(rng, table) in {"a", "e", "i"}


@given(st.integers(min_value=0, max_value=2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_any_seed_gives_valid_root(seed):
    inv = PhonemeInventory.from_file(data_path("inventory.tsv"))
    tabs = load_slot_tables(data_path("roots.tables"))
    slots = tables_for_shape("bi", tabs)
    root = generate_root(random.Random(seed), slots, inv, "bi")
    assert validate_phonotactics(list(root.symbols), inv) == []
