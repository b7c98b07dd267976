"""Detect user-perceived GUI lags in mobile-app screencasts."""

__version__ = "0.1.0"
