"""Kronecker theta expansions, Eisenstein-Kronecker numbers and their p-adic counterparts."""

__version__ = "0.1.0"
