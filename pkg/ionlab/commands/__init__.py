"""Experiment commands driven by the command-line entry point."""
