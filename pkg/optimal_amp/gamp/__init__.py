"""The generalized AMP iteration and its correctors."""
