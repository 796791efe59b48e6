"""Iterate module for RSCFixpoint: Krasnoselskii-Mann iteration and trajectory diagnostics."""
