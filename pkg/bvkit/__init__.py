"""Bounded-variation and modulus-of-continuity toolkit."""
