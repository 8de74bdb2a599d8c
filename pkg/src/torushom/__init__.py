"""Weighted homomorphism models on even discrete tori.

Subpackages by concern: constraint_graph (targets and extremal structure),
torus (geometry), exact (partition functions and marginals), proof_quantities
(cycle counts and extremal identities), sampler (Glauber dynamics and phase
classification), analysis (limit targets, influence ratios, growth-rate
predictors), cli (command-line surface).
"""

__version__ = "0.1.0"
