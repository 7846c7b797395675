"""qmfig: renders qmflow CSV artifacts into publication-style figures."""

__version__ = "0.1.0"
