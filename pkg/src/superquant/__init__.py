"""Deformation quantization of the Heisenberg supergroup at desk scale."""

__version__ = "0.1.0"
