"""Numerical core: quadrature, domains, function spaces, transforms and multiplier bounds."""
