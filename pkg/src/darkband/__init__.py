"""Quantum dark bands: caustics, complex trajectories and dynamical phase
transitions in the fully connected transverse-field Ising model.

Modules mirror the three independent routes to the transition: exact
diagonalization (dicke), classical/WKB semiclassics with complex-trajectory
steepest descent (classical, wkb, complexmech, scan), the bipartite
conditioned measurement (bipartite), and the optical rainbow analogue
(catastrophe).
"""

__version__ = "0.1.0"
