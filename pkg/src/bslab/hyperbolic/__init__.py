"""Hyperbolic geometry: Fuchsian matrices, pants gluing, heat kernels on cylinders."""
