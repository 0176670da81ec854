"""Synthetic problem instances."""
