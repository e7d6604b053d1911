"""Shortest S-T bibranchings: LP and submodular-flow formulations with
certificate translation between them."""

__version__ = "0.1.0"
