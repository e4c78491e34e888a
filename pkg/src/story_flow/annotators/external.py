"""
Annotator backed by an external command.

The command receives the text on stdin and must print one JSON object:

    {"tokens": [...], "lemmas": [...], "entities": [...]}

Missing "lemmas" fall back to the tokens; missing "entities" to none. All
terms are case-folded so they share a namespace with IdentityAnnotator output.
"""

import functools
import json
import logging
import shlex
import subprocess
from typing import Optional

from .base import Annotation, Annotator
from ..core.errors import ConfigError, InputError

logger = logging.getLogger(__name__)


class ExternalCommandAnnotator(Annotator):
    """Runs a lemmatizer/NER pipeline as a subprocess, one call per text."""

    def __init__(self, command: Optional[str] = None, timeout: float = 60.0, cache_size: int = 4096):
        if not command:
            raise ConfigError("the external-command annotator needs a command (--annotator-command)")
        self.command = command
        self.argv = shlex.split(command)
        self.timeout = timeout
        # least recently used texts are evicted first
        self._cached_run = functools.lru_cache(maxsize=cache_size)(self._run)

    @property
    def name(self) -> str:
        return "external-command"

    def describe(self) -> str:
        return f"{self.name}:{self.command}"

    def annotate(self, text: str) -> Annotation:
        if not text:
            return Annotation()
        return self._cached_run(text)

    def cache_info(self):
        return self._cached_run.cache_info()

    def _run(self, text: str) -> Annotation:
        try:
            completed = subprocess.run(
                self.argv, input=text, capture_output=True, text=True,
                timeout=self.timeout, check=True,
            )
        except FileNotFoundError as e:
            raise ConfigError(f"annotator command not found: {self.argv[0]}") from e
        except subprocess.CalledProcessError as e:
            raise InputError(f"annotator command failed ({e.returncode}): {e.stderr.strip()}") from e
        except subprocess.TimeoutExpired as e:
            raise InputError(f"annotator command timed out after {self.timeout}s") from e

        try:
            payload = json.loads(completed.stdout)
        except json.JSONDecodeError as e:
            raise InputError(f"annotator output is not JSON: {e}") from e

        tokens = [str(t).casefold() for t in payload.get("tokens", [])]
        lemmas = payload.get("lemmas")
        lemmas = [str(t).casefold() for t in lemmas] if lemmas is not None else list(tokens)
        entities = [str(t).casefold() for t in payload.get("entities", [])]
        if len(lemmas) != len(tokens):
            logger.warning("annotator returned %d lemmas for %d tokens", len(lemmas), len(tokens))

        return Annotation(tokens=tokens, lemmas=lemmas, entities=entities)
