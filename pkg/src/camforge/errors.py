"""Exception types shared across the toolkit.

Every error carries a short machine-parseable category so the CLI can
emit one-line diagnostics (`error: <category>: <message>`).
"""


class ForgeError(Exception):
    category = "error"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message

    def oneline(self) -> str:
        return f"error: {self.category}: {self.message}"


class DataError(ForgeError):
    """Malformed resource file (inventory, tables, rules, lexicon, ...)."""

    category = "data"


class NotationError(ForgeError):
    """Underlying-form notation that cannot be parsed."""

    category = "notation"


class ResolutionError(ForgeError):
    """An archiphoneme or reduplicant placeholder survived the cascade."""

    category = "resolution"


class DerivationError(ForgeError):
    """The cascade produced a phonotactically ill-formed output."""

    category = "derivation"


class RefusedError(ForgeError):
    """A requested operation is ruled out by morpheme metadata."""

    category = "refused"


class BudgetError(ForgeError):
    """A sampling or search budget was exhausted."""

    category = "budget"


class TransportError(ForgeError):
    """An endpoint request failed after exhausting its retry budget."""

    category = "transport"
