"""Tools for certifying directed diagrammatic reducibility of group presentations."""

__version__ = "0.1.0"
