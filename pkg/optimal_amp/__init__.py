"""Optimal M-estimation and Bayesian inference through approximate message passing."""

__version__ = "0.1.0"
