"""Learning on attribute-missing graphs with a structure-attribute transformer."""

__version__ = "0.1.0"
