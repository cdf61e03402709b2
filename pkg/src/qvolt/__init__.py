"""Simulation and blinded statistical analysis of a qubit-controlled voltage switch experiment."""

__version__ = "0.1.0"
