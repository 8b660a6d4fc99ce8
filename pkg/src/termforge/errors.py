"""Domain exception types. The CLI maps any TermforgeError to exit code 1."""


class TermforgeError(Exception):
    """Base class for all domain errors raised by this package."""


# glossary
class ParseError(TermforgeError):
    """Input file violates the documented grammar (message carries line info)."""


class DuplicateKeyError(TermforgeError):
    """Two entries share the same (source_term, language) key."""


class EmptyFieldError(TermforgeError):
    """A required field is empty after trimming."""


class ConflictError(TermforgeError):
    """Merge found conflicting translations under error_on_conflict."""


class NoEntriesError(TermforgeError):
    """No glossary entries exist for the requested language."""


# aligner
class DimensionMismatchError(TermforgeError):
    """Source and target embeddings have different dimensions."""


# substituter
class RangeError(TermforgeError):
    """A substitution edit exceeds the bounds of the target sentence."""


# decoder
class UnsatisfiableError(TermforgeError):
    """Constraint phrases cannot fit within the output length budget."""


class NoCompletionError(TermforgeError):
    """No hypothesis reached end-of-sequence with all constraints met."""


# refiner / chat client
class AuthError(TermforgeError):
    """API key missing or rejected."""


class TimeoutError(TermforgeError):  # noqa: A001 - deliberate domain name
    """Request timed out or the endpoint stayed unreachable after retries."""


class RateLimitError(TermforgeError):
    """Endpoint kept rate-limiting after all retries."""


class MalformedResponseError(TermforgeError):
    """Endpoint reply could not be parsed as a chat completion."""


class InvalidLabelError(TermforgeError):
    """Selection answer is not a label in 1-11."""


# metrics
class LengthMismatchError(TermforgeError):
    """Hypothesis and reference lists differ in length."""


class EmptyCorpusError(TermforgeError):
    """Metric called on an empty corpus."""


class EmptyReferenceError(TermforgeError):
    """A reference segment is empty where the metric forbids it."""


# stats
class DegenerateError(TermforgeError):
    """Agreement statistic undefined (expected agreement equals 1)."""


class ZeroVarianceError(TermforgeError):
    """t statistic undefined because the sample variance is zero."""


class EmptyDictionaryError(TermforgeError):
    """Coverage analysis needs a nonempty reference dictionary."""
