"""Noisy simulation of variational quantum algorithms on cat qubits."""

__version__ = "0.1.0"
