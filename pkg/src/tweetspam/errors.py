"""Exception types shared across the package."""


class TweetSpamError(Exception):
    """Base class for all package errors."""


class CorpusError(TweetSpamError):
    """Invalid or inconsistent corpus data."""


class ResourceError(TweetSpamError):
    """A required resource file is missing or malformed."""


class ConfigError(TweetSpamError):
    """Invalid configuration (feature string, hyperparameters, flags)."""


class FeatureError(TweetSpamError):
    """Feature extraction or fitting failed (e.g. empty vocabulary)."""


class ModelFormatError(TweetSpamError):
    """A model file cannot be read."""


class ChecksumError(ModelFormatError):
    """Model file checksum does not match its payload."""


class VersionError(ModelFormatError):
    """Model file format version is not supported by this reader."""
