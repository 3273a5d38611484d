"""Transonic travelling waves of the 2D Gross-Pitaevskii equation, built and
verified through their KP-I lump reduction."""

__version__ = "0.1.0"
