"""Exporter error types."""


class IcExportError(Exception):
    """Base class for exporter errors."""


class ModelLoadError(IcExportError):
    """The masked language model or its tokenizer could not be loaded."""


class AlignmentError(IcExportError):
    """A document token could not be aligned to any model subtoken."""


class InputError(IcExportError):
    """A corpus or mask file is malformed."""
