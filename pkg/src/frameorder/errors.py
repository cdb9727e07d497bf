"""Exception hierarchy for frameorder.

All data/input problems raise a FrameOrderError subclass so the CLI can map
them to a single exit code distinct from usage errors and internal bugs.
"""


class FrameOrderError(Exception):
    """Base class for all expected failure modes."""


class CorpusFormatError(FrameOrderError):
    """A corpus/score/manifest file could not be parsed."""

    def __init__(self, path, line_no, message):
        self.path = str(path)
        self.line_no = line_no
        super().__init__(f"{path}:{line_no}: {message}")


class DuplicateIdError(FrameOrderError):
    def __init__(self, sample_id):
        self.sample_id = sample_id
        super().__init__(f"duplicate sample id: {sample_id!r}")


class EmptyTextError(FrameOrderError):
    pass


class MissingTextError(FrameOrderError):
    pass


class MissingScoresError(FrameOrderError):
    def __init__(self, missing_ids):
        self.missing_ids = list(missing_ids)
        shown = ", ".join(repr(i) for i in self.missing_ids[:10])
        more = "" if len(self.missing_ids) <= 10 else f" (+{len(self.missing_ids) - 10} more)"
        super().__init__(f"no scores for corpus ids: {shown}{more}")


class UnknownScoreIdError(FrameOrderError):
    def __init__(self, extra_ids):
        self.extra_ids = list(extra_ids)
        shown = ", ".join(repr(i) for i in self.extra_ids[:10])
        super().__init__(f"score records for ids not in corpus: {shown}")


class NonPositivePerplexityError(FrameOrderError):
    pass


class InsufficientSamplesError(FrameOrderError):
    pass


class DegenerateDistributionError(FrameOrderError):
    pass


class EmptyQuadrantError(FrameOrderError):
    pass


class MissingSplitError(FrameOrderError):
    pass


class InvalidManifestError(FrameOrderError):
    pass


class IdUniverseMismatchError(FrameOrderError):
    pass


class LengthMismatchError(FrameOrderError):
    pass


class EmptySpectrumError(FrameOrderError):
    pass


class EmptyGroupError(FrameOrderError):
    pass


class ConfigError(FrameOrderError):
    pass
