"""Data-driven analysis of in-wall ambient awareness on a follower network."""

__version__ = "0.1.0"
