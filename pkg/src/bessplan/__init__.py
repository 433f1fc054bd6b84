"""bessplan: siting and sizing of battery storage across coupled HV/MV grids."""

__version__ = "0.1.0"
