"""Crossing-board simulation of swept-microwave polarisation transfer to nuclear spins."""

__version__ = "0.1.0"
