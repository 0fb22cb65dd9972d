"""Error family shared across the package.

The CLI maps these onto exit codes, so new failure kinds should subclass an
existing branch rather than raising bare exceptions.
"""

from __future__ import annotations


class LagError(Exception):
    """Base for all package errors."""


class ConfigError(LagError):
    """Bad or missing configuration."""


class MalformedSchema(LagError):
    """A TBox declaration contradicts itself (e.g. a property with two kinds)."""


class LexiconError(LagError):
    """Unreadable or inconsistent frame lexicon file."""


class EmptyPremises(LagError):
    """chain_status called with nothing to fold."""


class RuleInapplicable(LagError):
    """A derivation rule was invoked in a configuration that disables it."""


class ConflictingLink(LagError):
    """One local node linked to two distinct reference entities."""


class ExtractionRejected(LagError):
    """Too many completion-derived triples failed boundary validation."""

    def __init__(self, message: str, rejected: int = 0, total: int = 0):
        super().__init__(message)
        self.rejected = rejected
        self.total = total


class ProviderError(LagError):
    """Transport-level completion failure (network, HTTP, timeouts)."""


class MockMiss(ProviderError):
    """The scripted provider had no entry for the prompt it was given."""


class BudgetExceeded(LagError):
    """Prompt assembly overflowed the configured token budget."""

    def __init__(self, message: str, largest_slice: str = ""):
        super().__init__(message)
        self.largest_slice = largest_slice


class EmptyCompletion(LagError):
    """The provider answered but no candidate triple could be salvaged."""


class StoreError(LagError):
    """Session persistence failure."""


class NotFound(StoreError):
    """No stored session under the requested id."""


class StoreCorrupt(StoreError):
    """Stored artifacts fail their recorded content hashes."""


class ImmutablePartition(LagError):
    """Attempt to review away content that is not subject to review."""


class UnknownTriple(LagError):
    """A review or lookup referenced a triple the session does not hold."""
