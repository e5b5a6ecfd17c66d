"""Fuzzy wake-word laboratory: evolutionary generation against black-box
detectors, tree-ensemble explanation, and detector mitigation."""

__version__ = "0.1.0"
