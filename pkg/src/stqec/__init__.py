"""Circuit-level QEC laboratory for singlet-triplet (dual-spin) erasure qubits."""

__version__ = "0.1.0"
