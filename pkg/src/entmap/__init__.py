"""Entanglement measures, ordering relations and LOCC trajectories for bipartite states."""

__version__ = "0.1.0"
