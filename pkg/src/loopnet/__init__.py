"""Nets of causal loops over finite causal posets."""
