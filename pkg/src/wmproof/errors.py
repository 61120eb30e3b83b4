"""Exception types raised across the package."""


class WmproofError(Exception):
    """Base class for every error raised by wmproof."""


class ZeroInverse(WmproofError, ZeroDivisionError):
    pass


class NonCanonicalEncoding(WmproofError, ValueError):
    pass


class ArityUnsupported(WmproofError, ValueError):
    pass


class PromptTooShort(WmproofError, ValueError):
    pass


class VocabTooSmall(WmproofError, ValueError):
    pass


class MsgShapeMismatch(WmproofError, ValueError):
    pass


class TextTooShort(WmproofError, ValueError):
    pass


class IndexOutOfRange(WmproofError, IndexError):
    pass


class ShapeMismatch(WmproofError, ValueError):
    pass


class RangeTooWide(WmproofError, ValueError):
    pass


class FusionUnavailable(WmproofError, ValueError):
    pass


class OddContextWidth(WmproofError, ValueError):
    pass


class MissingOpening(WmproofError, KeyError):
    pass


class ChunkSizeMismatch(WmproofError, ValueError):
    pass


class TranscriptTruncated(WmproofError, ValueError):
    pass


class FoldingUnsupported(WmproofError, ValueError):
    """Raised when a constraint system carries lookups, which cannot be folded."""
