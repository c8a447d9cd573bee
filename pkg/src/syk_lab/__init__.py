"""syk_lab: exact-diagonalization and large-N laboratory for the SYK model,
with SYK/Dicke quantum-battery charging protocols."""

__version__ = "0.1.0"
