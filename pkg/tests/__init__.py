"""Tests and numerical oracles for fermi_thermometry."""
