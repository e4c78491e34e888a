"""story-flow: online multilingual news story clustering."""

__version__ = "0.1.0"
