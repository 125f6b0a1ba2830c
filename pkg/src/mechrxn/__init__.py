"""Mechanistic polar reaction prediction engine.

Represents reactions as balanced, atom-mapped elementary steps, enumerates
and ranks arrow-pushing mechanisms, sanitizes external predictor output
through conservation filters, generates proton-transfer steps from pKa
kinetics, and searches multi-step pathways from reactants to a target.
"""

__version__ = "0.1.0"
