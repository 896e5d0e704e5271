"""Linking procedurally generated level segments with n-gram linkers."""

__version__ = "0.1.0"
