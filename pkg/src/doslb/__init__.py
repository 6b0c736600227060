"""Doubly-optimistic safe linear bandits: simulation, policies and gap analysis."""

__version__ = "0.1.0"
