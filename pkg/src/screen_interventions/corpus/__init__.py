"""Subpackage for the synthetic screen corpus."""
