"""Parent Hamiltonians of projected entangled pair states."""

__version__ = "0.1.0"
