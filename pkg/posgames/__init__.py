"""Positional games on hypergraphs and the reduction from Generalized Geography."""
