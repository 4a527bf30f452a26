"""Exception types shared across the package.

Semantic rejections (a tree that does not derive, a pair that does not
synchronize) are *not* errors; they are reported through Verdict values.
Exceptions are reserved for malformed inputs, unsupported grammar shapes,
and exhausted resource budgets.
"""


class SuvgError(Exception):
    """Base class for all package errors."""


class GrammarFormatError(SuvgError):
    """A grammar/tree/forest document violates the file schema.

    The ``path`` names the offending location in the document.
    """

    def __init__(self, message, path=""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class MalformedTreeError(SuvgError):
    """A parse tree is structurally inconsistent with the grammar
    (child labels do not match the production right-hand side)."""


class StepError(SuvgError):
    """A synchronous derivation step violates its preconditions."""


class UnsupportedGrammarError(SuvgError):
    """The grammar falls outside the dominance-link shape supported by
    the forest construction (the oracle path still covers it)."""


class ProvenanceError(SuvgError):
    """Synchronization-link provenance cannot be traced to a well-formed
    vector derivation tree."""


class ResourceBudgetError(SuvgError):
    """A configured resource cap (trees, table entries, search nodes) was
    exceeded.  Never raised as silent truncation: the caller asked for an
    exhaustive answer that cannot be delivered within budget."""


class InternalInvariantError(SuvgError):
    """An internal invariant failed; aborting is preferred over silently
    producing a wrong result."""
