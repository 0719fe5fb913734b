"""Synthetic multi-floor building wireframes with room semantics.

Pipeline: procedural exterior -> per-floor label grids -> vector floor plans
-> footprint alignment -> stacked 3-D wireframes -> JSON records.
"""

__version__ = "0.1.0"
