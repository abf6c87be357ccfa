"""Lattice point statistics in sublevel regions of subhomogeneous forms.

Submodules:
  core         domain types (norms, bound functions, target forms, schedules)
  volume       exact shell volumes, Monte Carlo checks, convergence classifiers
  haar         unimodular map sampling (exact invariant measure and fast Haar-class)
  counting     pruned integer-point counters with a brute-force oracle
  experiments  the statistical experiment harnesses
  cli          command line entry point
"""

__version__ = "0.1.0"
