"""Switched-Ethernet switch simulator with network-calculus delay bounds,
online delay-fault detection and priority compensation."""

__version__ = "0.1.0"
