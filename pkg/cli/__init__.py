"""CLI module for RSCFixpoint: reproducible batch runs from the command line."""
