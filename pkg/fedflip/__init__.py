"""Deterministic simulator for federated learning under label-flipping attacks."""

__version__ = "0.1.0"
