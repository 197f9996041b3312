"""Gravity water waves in Zakharov form: spectral solver and break-down monitor."""
