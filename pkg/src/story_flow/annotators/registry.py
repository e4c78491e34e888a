"""
Annotator registry for story-flow.

Annotator classes are auto-discovered from the annotators/ package and can be
built by name. Classes rather than instances are registered because some
annotators need options (the external command) at construction time.
"""

import importlib
import inspect
import logging
import os
from typing import Dict, List, Optional, Type

from .base import Annotator
from ..core.errors import ConfigError

logger = logging.getLogger(__name__)

_SKIPPED_MODULES = {"base.py", "registry.py"}


class AnnotatorRegistry:
    """
    Central registry for annotators.

    Discovers every Annotator subclass in the annotators/ package and
    provides lookup by name.
    """

    def __init__(self):
        self._annotators: Dict[str, Type[Annotator]] = {}
        self._discover_annotators()

    def _discover_annotators(self):
        """Auto-discover annotator classes from the annotators/ directory."""
        annotators_dir = os.path.dirname(__file__)

        for filename in sorted(os.listdir(annotators_dir)):
            if not filename.endswith(".py") or filename.startswith("_"):
                continue
            if filename in _SKIPPED_MODULES:
                continue

            module_name = filename[:-3]
            try:
                module = importlib.import_module(f".{module_name}", package=__package__)
            except Exception as e:
                logger.warning("failed to load annotator module %s: %s", module_name, e)
                continue

            for _, obj in inspect.getmembers(module, inspect.isclass):
                if issubclass(obj, Annotator) and obj is not Annotator and not inspect.isabstract(obj):
                    self.register(obj)

    def register(self, annotator_class: Type[Annotator]):
        """Register an annotator class under the name its instances report."""
        name = annotator_class.name.fget(None)
        self._annotators[name] = annotator_class

    def create(self, name: str, **options) -> Annotator:
        """Build an annotator by name, forwarding options to its constructor."""
        annotator_class = self._annotators.get(name.lower())
        if annotator_class is None:
            raise ConfigError(f"unknown annotator {name!r}; available: {', '.join(self.list_annotators())}")
        return annotator_class(**options)

    def list_annotators(self) -> List[str]:
        return sorted(self._annotators)


_registry: Optional[AnnotatorRegistry] = None


def get_registry() -> AnnotatorRegistry:
    """Get the global annotator registry instance."""
    global _registry
    if _registry is None:
        _registry = AnnotatorRegistry()
    return _registry


def create_annotator(name: str = "none", **options) -> Annotator:
    """Build an annotator by registry name."""
    return get_registry().create(name, **options)


def list_annotators() -> List[str]:
    return get_registry().list_annotators()
