"""State evolution of Bayesian AMP."""
