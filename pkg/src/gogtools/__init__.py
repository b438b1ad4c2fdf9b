"""Desk-scale computational group theory.

Finite groups stand in for compact subgroups throughout: the package builds
Bass-Serre tree balls for finite graphs of finite groups, Cayley-Abels graph
balls two ways, fineness certificates (angle metrics, escaping-path sets),
small-cancellation checks with Dehn's algorithm over free and amalgamated
products, and bounded 2-complex tooling (loop coning, links, bounded simple
connectivity).
"""

__version__ = "0.1.0"
