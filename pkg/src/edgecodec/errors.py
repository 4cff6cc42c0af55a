"""Exception hierarchy shared by the codec modules.

Everything raised on malformed input data derives from CodecError so the
command line tool can map any of it to a single "bad data" exit code.
"""


class CodecError(Exception):
    """Base class for all codec data errors."""


# --- PNM file I/O ---

class PnmError(CodecError):
    """Base class for PNM parse failures."""


class UnsupportedPnmError(PnmError):
    """Magic number is not binary P5 or P6."""


class PnmHeaderError(PnmError):
    """Header fields missing, non-numeric, or out of range."""


class PnmMaxvalError(PnmError):
    """Sample depth other than 255."""


class PnmTruncatedError(PnmError):
    """Payload shorter than width * height * channels."""


# --- serialized path streams ---

class PathDecodeError(CodecError):
    """Base class for path stream decode failures."""


class UnknownMarkerError(PathDecodeError):
    """Marker byte is none of the defined op codes."""


class VarintOverflowError(PathDecodeError):
    """Varint runs past the 32-bit coordinate budget."""


class CoordinateRangeError(PathDecodeError):
    """Decoded coordinate falls outside the drawing bounds."""


class PathStructureError(PathDecodeError):
    """Op sequence violates drawing structure (no leading Move, Move runs)."""


class PathTruncatedError(PathDecodeError):
    """Stream ends in the middle of an op."""


# --- entropy coding ---

class PpmTruncatedError(CodecError):
    """Compressed stream exhausted before the end-of-stream symbol."""


# --- container ---

class StreamError(CodecError):
    """Base class for container parse failures."""


class BadMagicError(StreamError):
    """Container does not start with the format magic."""


class VersionError(StreamError):
    """Unsupported container version or flag bits."""


class LengthMismatchError(StreamError):
    """Declared payload lengths disagree with the actual byte count."""


class StreamTruncatedError(StreamError):
    """Container ends before the declared payload."""


class CorruptStreamError(StreamError):
    """Payloads decode but contradict each other."""
