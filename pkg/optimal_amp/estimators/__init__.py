"""Tabulated optimal losses and regularisers."""
