"""
cosched - decision-dependent robust co-scheduling of production and energy

Builds the production/energy model of a discrete-manufacturing plant, reduces its
decision-dependent uncertainties to linear rows and solves the two-stage robust
problem with a column-and-constraint generation loop on a bundled MILP kernel.
"""

__version__ = "0.1.0"
