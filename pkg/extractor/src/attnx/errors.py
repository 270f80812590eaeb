"""Extractor error types."""


class ExtractorError(Exception):
    """Base class for extractor errors."""


class WeightsUnavailable(ExtractorError):
    """No pretrained checkpoint was found or provided."""


class ImageUnreadable(ExtractorError):
    """Input image missing, corrupt, or in an unsupported format."""
