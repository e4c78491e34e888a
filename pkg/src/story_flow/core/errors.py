"""
Exception hierarchy for story-flow.

Input errors describe bad data (records, streams, partitions); configuration
errors describe bad settings or missing resources. The CLI maps the two
families onto distinct exit codes.
"""

from typing import Optional


class StoryFlowError(Exception):
    """Base class for all story-flow errors."""


class InputError(StoryFlowError):
    """Malformed or inconsistent input data."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DuplicateDocumentError(InputError):
    """A document id was seen twice in one stream."""


class StreamOrderError(InputError):
    """A timestamp went backwards by more than the allowed slack."""


class EmptyCorpusError(InputError):
    """No documents were available to build a table from."""


class PartitionMismatchError(InputError):
    """Predicted and gold partitions cover different element ids."""


class ConfigError(StoryFlowError, ValueError):
    """Invalid configuration or a resource missing for a language."""


class DegenerateTrainingDataError(ConfigError):
    """Training data cannot produce a model (no rankable pairs, ...)."""


class TuningError(ConfigError):
    """Threshold search was given nothing to search over."""
