"""flowscope: multi-level user behavior analytics for in-vehicle touchscreens."""

__version__ = "0.1.0"
