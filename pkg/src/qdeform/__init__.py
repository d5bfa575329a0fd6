"""Cocycle deformations of finite quantum groups and their actions, checked numerically."""

__version__ = "0.1.0"
