"""Static physical constants and canonical-unit factors."""
