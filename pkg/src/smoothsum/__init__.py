"""smoothsum: exact analysis of smooth direct-sum decompositions of
finite-dimensional diffeological vector spaces with finitely generated
vector-space diffeologies."""

__version__ = "0.1.0"
