"""Hierarchical measurement-and-feedback cellular automata for the toric
code: lattice state, 1D repetition-code automata, toric gadget library,
schedule compiler, noisy simulator, verification suite, 3D layering, and the
experiment harness."""

from . import (compiler, gadgets, harness, lattice, simulator, stack3d,
               tsirelson, verifier)

__all__ = ["compiler", "gadgets", "harness", "lattice", "simulator",
           "stack3d", "tsirelson", "verifier"]
__version__ = "0.1.0"
