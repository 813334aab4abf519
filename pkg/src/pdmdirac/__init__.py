"""Position-dependent-mass Dirac fermions with a PT-symmetric complex potential."""
__version__ = "0.1.0"
