"""Field-free orientation of linear polar molecules by zero-area THz pulses."""

__version__ = "0.1.0"
