"""Cross-validated capacitary, overflow, and intersection invariants."""

__version__ = "0.1.0"
