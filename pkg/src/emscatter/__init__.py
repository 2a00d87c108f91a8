"""Scattering amplitudes for dielectric spheres: exact Mie benchmark,
perturbative ladder with rigorous error bounds, non-perturbative
closed-form amplitudes, and a voxelized Green-operator laboratory."""

from .config import BranchTag, ScatterConfig

__all__ = ["BranchTag", "ScatterConfig"]
__version__ = "0.1.0"
