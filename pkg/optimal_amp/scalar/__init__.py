"""One-dimensional convex calculus and scalar Bayesian channels."""
