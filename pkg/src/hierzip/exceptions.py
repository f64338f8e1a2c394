class HierzipError(ValueError):
    """Base class for all errors raised by hierzip."""


class LayoutError(HierzipError):
    """Field dimensions or error bound cannot form a valid hierarchy."""


class CorruptArchiveError(HierzipError):
    """Archive bytes fail structural or checksum validation."""


class EntropyError(HierzipError):
    """A Huffman table or bitstream is malformed."""
