"""Mapping module for RSCFixpoint: self-maps of a domain, gallery and DSL."""
