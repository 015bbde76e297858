"""Reproducible evaluation harness for time-series forecasting methods."""

__version__ = "0.1.0"
