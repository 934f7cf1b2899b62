"""Modular stay detection workflows for mixed GPS and cellular location data."""

__version__ = "0.1.0"
