"""Flux-driven rf-SQUID parametrically coupled to a trapped ion's motion."""

__version__ = "0.1.0"
