"""
Benchmarks for urn analysis.

This package is *not* public API.
"""
