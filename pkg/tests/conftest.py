import os

import pytest

from camforge import data_path
from camforge.lexicon import Lexicon
from camforge.morphology import load_cascade
from camforge.phonology import PhonemeInventory


@pytest.fixture(scope="session")
def inventory():
    return PhonemeInventory.from_file(data_path("inventory.tsv"))


@pytest.fixture(scope="session")
def cascade(inventory):
    return load_cascade(data_path("demo.rules"), inventory)


@pytest.fixture(scope="session")
def lexicon(cascade):
    return Lexicon.load(data_path("demo.lex"), cascade=cascade)


@pytest.fixture(scope="session")
def wals_corpus_path():
    """Path to a full WALS export, or None when none is mounted."""
    return os.environ.get("FORGE_WALS_CSV") or None
