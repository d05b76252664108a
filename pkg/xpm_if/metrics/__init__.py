"""Receiver-side measurements on the filtered probe: phase, EVM and SNR."""
