"""Proof checking and bounded semantic checking for hyper-triples."""

__version__ = "0.1.0"
