"""Nodal domains of the random monochromatic plane wave - Source Code Package"""

__version__ = "1.0.0"
