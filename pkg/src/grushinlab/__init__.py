"""Numerical toolkit for curvature Laplacians -Delta + cK on 2-step almost-Riemannian surfaces."""

__version__ = "0.1.0"
