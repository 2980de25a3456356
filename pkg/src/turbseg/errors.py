"""Exception types shared across the pipeline."""


class TurbsegError(Exception):
    """Base class for all package errors."""


class FormatError(TurbsegError):
    """A file does not conform to one of the exchange formats."""


class ConfigError(TurbsegError):
    """Invalid configuration or parameter set."""


class StageError(TurbsegError):
    """A pipeline stage failed; carries the stage name and frame index."""

    def __init__(self, stage: str, message: str, frame: int | None = None):
        self.stage = stage
        self.frame = frame
        where = f"[{stage}]" if frame is None else f"[{stage} frame={frame}]"
        super().__init__(f"{where} {message}")
