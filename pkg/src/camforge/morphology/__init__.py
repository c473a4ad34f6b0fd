"""Underlying forms, the rewrite-rule cascade, derivation, and analysis."""

from .analyze import FunctionalAffix, analyze, gloss, load_morph_table
from .engine import SurfaceForm, TraceStep, WordState, apply_rule, assemble, generate
from .notation import (
    BOUNDARIES,
    ENCLITIC,
    PREFIX,
    PROCLITIC,
    REDUPLICANT,
    ROOT,
    SUFFIX,
    Morpheme,
    UnderlyingForm,
    parse_underlying,
    serialize,
)
from .rules import (
    PatternToken,
    ReplacementToken,
    RewriteRule,
    RuleCascade,
    load_cascade,
)

__all__ = [
    "BOUNDARIES",
    "ENCLITIC",
    "FunctionalAffix",
    "Morpheme",
    "PREFIX",
    "PROCLITIC",
    "PatternToken",
    "REDUPLICANT",
    "ROOT",
    "ReplacementToken",
    "RewriteRule",
    "RuleCascade",
    "SUFFIX",
    "SurfaceForm",
    "TraceStep",
    "UnderlyingForm",
    "WordState",
    "analyze",
    "apply_rule",
    "assemble",
    "generate",
    "gloss",
    "load_cascade",
    "load_morph_table",
    "parse_underlying",
    "serialize",
]
