"""Cross-phase modulation from evolving pump intensity fluctuations.

Analytic XPM phase model, a split-step Fourier reference simulator and the
experiment harness that compares the two.
"""

__version__ = "0.1.0"
