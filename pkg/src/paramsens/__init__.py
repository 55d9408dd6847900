"""Sensitivity analysis toolkit for fiber-producing algorithms.

Samples a parameter space (Latin Hypercube centers plus star branches),
runs a target pipeline per sample, quantifies output variation with
histogram and best-match measures, aggregates local/regional/global
sensitivities, and serves the derived data to an exploration client.
"""

__version__ = "0.1.0"
