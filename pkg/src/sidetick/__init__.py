"""Market making with side-specific tick sizes."""

__version__ = "0.1.0"
