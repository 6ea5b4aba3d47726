"""Figure rendering for esqpt-lab reproduce-all bundles.

This package never imports the producer; it consumes the bundle
directory alone: CSV tables under the two-line comment header, plus the
summary.json manifest that names them and carries their config hashes.
"""

from .bundle import Bundle, BundleError, read_table
from .render import render_all, ring_spread

__all__ = ["Bundle", "BundleError", "read_table", "render_all",
           "ring_spread"]
__version__ = "0.1.0"
