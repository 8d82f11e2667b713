"""Wireless sensor and actor network simulator with data suppression protocols."""

__version__ = "0.1.0"
