"""Priors, measurement channels and log-concavity checks."""
