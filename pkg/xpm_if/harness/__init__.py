"""Experiment configuration, SSFM oracle runs, recipes and result files."""
