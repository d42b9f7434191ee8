"""
Lumenfield - low-light radiance fields with a learned per-point sensor response.

Trains a neural radiance field directly on dark, noisy, color-cast raw
views and renders enhanced normal-light images without an ISP.
"""

__version__ = "0.1.0"
