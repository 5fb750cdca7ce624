"""Fractional Riccati solver."""
