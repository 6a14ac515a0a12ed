"""The four-variable worked example (A, B, C, D binary; components AB, AC, BCD).

Pairwise tables come from P(A=1)=.5, P(B=1)=.6, P(C=1)=.3, P(A=1,B=1)=.4,
P(A=1,C=1)=.2. Only P(D | B, C) is given for the last component, so its
table is completed with a chosen P(B, C):

* ``fig1``: the B,C marginal implied by the AB and AC tables under the
  usual DAG reading (A parent of B and C). The product extension then
  reproduces every table.
* ``fig1_indep``: P(B, C) = P(B) P(C). Still consistent, but the product
  extension no longer reproduces P(BCD).
"""

from __future__ import annotations

from importlib import resources

import numpy as np

from .system import ProbabilitySystem, system_from_arrays
from .web import Structure

FIG1_STRUCTURE = Structure((("A", "B"), ("A", "C"), ("B", "C", "D")))

# axes (A, B); state 1 is "true"
P_AB = np.array([[0.3, 0.2], [0.1, 0.4]])
P_AC = np.array([[0.4, 0.1], [0.3, 0.2]])
# P(D=1 | B, C), axes (B, C)
P_D1_GIVEN_BC = np.array([[0.2, 0.4], [0.6, 0.8]])

P_BC_DAG = np.array([[0.3, 0.1], [0.4, 0.2]])
P_BC_INDEP = np.outer([0.4, 0.6], [0.7, 0.3])


def bcd_table(p_bc: np.ndarray) -> np.ndarray:
    return np.stack([p_bc * (1.0 - P_D1_GIVEN_BC), p_bc * P_D1_GIVEN_BC], axis=-1)


def fig1_system() -> ProbabilitySystem:
    return system_from_arrays(FIG1_STRUCTURE, [P_AB, P_AC, bcd_table(P_BC_DAG)])


def fig1_indep_system() -> ProbabilitySystem:
    return system_from_arrays(FIG1_STRUCTURE, [P_AB, P_AC, bcd_table(P_BC_INDEP)])


def bundled_path(name: str):
    """Path-like handle to a bundled system file such as ``fig1.json``."""
    return resources.files(__package__).joinpath("data", name)
