"""Conditions module for RSCFixpoint: operator-condition classifiers and inequality verifiers."""
