"""Random matrix realization and exact theory of the beta = 2 one-component
plasma on a spherical annulus."""

__version__ = "0.1.0"
