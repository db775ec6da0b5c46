"""Exception hierarchy shared by every stereobench module."""


class StereoError(Exception):
    """Base class for all stereobench errors."""


# file formats
class UnsupportedFormat(StereoError):
    pass


class MalformedHeader(StereoError):
    pass


class TruncatedFile(StereoError):
    pass


class MissingKey(StereoError):
    pass


class MalformedValue(StereoError):
    pass


class EmptyDataset(StereoError):
    pass


# image processing
class UnsupportedChannels(StereoError):
    pass


class DegenerateSize(StereoError):
    pass


class TooSmall(StereoError):
    pass


# matching
class DimensionMismatch(StereoError, ValueError):
    pass


class EmptyOverlap(StereoError):
    """A window comparison has no in-bounds pixel pair."""


class UnsupportedCombination(StereoError, ValueError):
    pass


# evaluation
class NoValidPixels(StereoError):
    pass


class EmptyResults(StereoError, ValueError):
    pass


class ConfigError(StereoError, ValueError):
    pass
