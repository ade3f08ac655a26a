"""bslab: local limits of graphs and complexes, finite covers, congruence
quotients, Mahler measures and hyperbolic heat sums, at desk scale."""

__version__ = "0.1.0"
