"""Poisson-geometric Kitaev models on ribbon graphs.

Combinatorial maps with gauge data from a global double Poisson-Lie group:
holonomies, vertex/face/site gauge actions, Fock-Rosly spaces, the
decoupling isomorphism between them, and a numerical verification harness
for the structural identities relating all of these.
"""

from . import brackets, decoupling, fock_rosly, graph_moves, kitaev_space
from . import properties, reference_graphs, ribbon_graph
from .double_group import AbelianBackend, SL2CBackend, make_backend

__all__ = [
    "AbelianBackend",
    "SL2CBackend",
    "make_backend",
    "brackets",
    "decoupling",
    "fock_rosly",
    "graph_moves",
    "kitaev_space",
    "properties",
    "reference_graphs",
    "ribbon_graph",
]
