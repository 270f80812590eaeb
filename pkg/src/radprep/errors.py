"""Exception types raised across the toolkit."""


class RadprepError(Exception):
    """Base class for all radprep errors."""


# --- raster / file I/O ---

class UnsupportedFormat(RadprepError):
    """File is not an 8/16-bit single-channel PNG or binary PGM."""


class ColorImageRejected(RadprepError):
    """Multi-channel (color, palette, or alpha) input."""


class CorruptFile(RadprepError):
    """Container recognized but payload unreadable."""


class IoFailure(RadprepError):
    """Write failed (permissions, missing directory, disk)."""


class BadMagic(RadprepError):
    """Attention file does not start with the expected magic/version."""


class TruncatedFile(RadprepError):
    """Attention file shorter than its header promises."""


class NonFiniteValue(RadprepError):
    """Attention values must be finite (no NaN/Inf)."""


# --- geometry / pipeline ---

class DimensionMismatch(RadprepError):
    """Operands must share width and height."""


class EmptyMask(RadprepError):
    """No foreground pixel survived (constant attention, over-erosion, ...)."""


class MissingSidecar(RadprepError):
    """File-based attention provider found no sidecar for the image."""


class TileTooSmall(RadprepError):
    """CLAHE tile grid does not fit in the image."""


# --- evaluation ---

class DegenerateBox(RadprepError):
    """Bounding box with non-positive width or height."""


class IdMismatch(RadprepError):
    """Ground truth and prediction records refer to different images."""


class NoInstances(RadprepError):
    """Accuracy undefined without at least one ground-truth box."""


class OneClassOnly(RadprepError):
    """ROC needs at least one positive and one negative sample."""


class SchemaError(RadprepError):
    """Ground-truth or prediction JSON violates the documented schema."""


class UnknownImageId(RadprepError):
    """Prediction refers to an image id absent from the ground truth."""
