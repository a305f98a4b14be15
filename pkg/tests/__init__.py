"""
Test suite for Adiabatic Counting
"""
