"""Exception hierarchy shared across the toolkit."""


class ToolkitError(Exception):
    """Base class for all toolkit-specific errors."""


class FormatError(ToolkitError):
    """Unsupported or corrupt file encoding."""


class SpaceError(ToolkitError):
    """Operation applied to an image in the wrong color space."""


class DimError(ToolkitError):
    """Dimension mismatch or unsupported geometry."""


class LayoutError(ToolkitError):
    """Coefficient tensor has the wrong layout for this operation."""


class SchemeError(ToolkitError):
    """Incompatible fusion scheme / descriptor combination."""


class ParamError(ToolkitError):
    """Invalid parameter value."""


class RangeError(ToolkitError):
    """Parameter range too small to satisfy a sampling requirement."""


class NonFiniteError(ToolkitError):
    """NaN or infinity where finite values are required."""


class ProtocolError(ToolkitError):
    """Secure-computation protocol violation (bad frame order, triple reuse, ...)."""


class TransportError(ToolkitError):
    """Byte-transport failure (closed connection, short read)."""


class NormError(ToolkitError):
    """Zero or negative vector norm where a positive one is required."""


class DuplicateIdentityError(ToolkitError):
    """Identity already enrolled."""


class EmptyGalleryError(ToolkitError):
    """Query against an empty gallery."""


class UnknownIdentityError(ToolkitError):
    """No protection parameters available for an enrolled identity."""


class MissingTruthError(ToolkitError):
    """Retrieval-rate computation needs ground-truth labels on every result."""
