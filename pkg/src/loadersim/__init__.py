"""Modular dynamic wheel loader simulator and reversal-phase layout screening."""

__version__ = "0.1.0"
