"""Subcommand modules; each exposes ``register(subparsers)``."""
from . import campaigns, solve, sweeps

__all__ = ["campaigns", "solve", "sweeps"]
