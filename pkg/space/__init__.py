"""Space module for RSCFixpoint: lp norms, domains and uniform convexity."""
