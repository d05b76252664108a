"""Closed-form XPM phase model and the phasor-sum statistics behind K and Q."""
