"""
Fermi Thermometry - temperature estimation with fermionic probes strongly
coupled to a fermionic bath.
"""

__version__ = "0.1.0"
