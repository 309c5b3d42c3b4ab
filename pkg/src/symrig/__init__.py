"""symrig: constructible-sheaf calculus on the line and a symplectic rigidity testbench."""

__version__ = "0.1.0"
