"""Sliding-mode reactive navigation around moving and deforming obstacles:
simulation engine, feasibility checkers, and trajectory verification.
"""

__version__ = "0.1.0"
