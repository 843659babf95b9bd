"""Shot-based trainer and benchmark harness for Ry/CZ Born machines on bars-and-stripes data."""

__version__ = "0.1.0"
