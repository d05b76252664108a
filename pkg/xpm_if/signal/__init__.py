"""Sampled optical fields, QAM constellations and RRC pulse shaping."""
