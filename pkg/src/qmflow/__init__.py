"""qmflow: hybrid quantum-classical multifidelity solvers for nonlinear PDEs."""

__version__ = "0.1.0"
