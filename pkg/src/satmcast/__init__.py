"""Multigroup multicast precoding and simulation for multibeam satellites."""

__version__ = "0.1.0"
