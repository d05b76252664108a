"""Scalar NLSE split-step engine, amplifiers, receiver blocks and IF taps."""
