"""Perturbed interior point LP solver with active-set prediction."""
