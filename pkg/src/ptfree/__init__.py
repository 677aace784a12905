"""Exact and Monte Carlo moments of entry-permuted Haar unitaries.

Modules
-------
perms       entry permutations of [M]^2 (identity, transpose, partial transposes)
ncpart      set partitions, pairings, non-crossing lattice and its Moebius function
weingarten  exact unitary Weingarten function
moments     exact expected traces of words, cumulant models and limit predictions
sampler     Haar sampling and Monte Carlo word traces
freeness    agreement fractions and freeness verdicts for partial transposes
grammar     text formats for words and patterns
experiments canned prediction-vs-measurement runs
cli         command-line entry point
"""

__version__ = "0.1.0"
