"""Exception types shared across the package."""


class PalmsError(Exception):
    """Base class for all errors raised by this package."""


class FormatError(PalmsError):
    """A document could not be parsed (bad syntax, wrong format tag)."""


class ValidationError(PalmsError):
    """A parsed document or constructed value violates an invariant."""


class NoCandidatesError(PalmsError):
    """Candidate masks contain no true cell; the filter cannot be seeded."""


class FilterCollapsed(PalmsError):
    """Every particle died in one update step; the trial has failed."""
