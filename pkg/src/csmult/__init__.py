"""Multiplier checks for Cauchy–Stieltjes integrals on polynomial-image domains."""
