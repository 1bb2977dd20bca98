"""Geodesics, curvature and first integrals of split (hyperbolic x elliptic) metrics."""

__version__ = "0.1.0"
