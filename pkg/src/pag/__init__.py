"""Power allocation games on signed networks."""

__version__ = "0.1.0"
