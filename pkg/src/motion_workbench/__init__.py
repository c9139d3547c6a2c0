"""Agentic workbench for motion-capture gait analysis."""

__version__ = "0.1.0"
