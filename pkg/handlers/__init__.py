"""Handlers module."""
