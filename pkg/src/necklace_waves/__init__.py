"""Bands, spatial spectra and traveling modulating pulses of NLS on periodic metric graphs."""

__version__ = "0.1.0"
