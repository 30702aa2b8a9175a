"""Constant compatible structure bases on the flat model of the chart.

With the Euclidean pairing, a two-form omega corresponds to the structure
J = omega^T (indices raised trivially). The positive basis comes from the
forms dx1^dx3 + dx4^dx2, dx1^dx4 + dx2^dx3, dx1^dx2 + dx3^dx4, and the
negative basis from their antisymmetric partners. Both triples satisfy the
quaternion relations, each unit combination squares to minus the identity,
and the third positive element is the standard structure of the two complex
chart coordinates.
"""

from __future__ import annotations

import numpy as np


def _form(*pairs) -> np.ndarray:
    omega = np.zeros((4, 4))
    for i, j in pairs:
        omega[i, j] += 1.0
        omega[j, i] -= 1.0
    return omega


_FORMS_PLUS = (
    _form((0, 2), (3, 1)),
    _form((0, 3), (1, 2)),
    _form((0, 1), (2, 3)),
)
_FORMS_MINUS = (
    _form((0, 2), (1, 3)),
    _form((0, 3), (2, 1)),
    _form((0, 1), (3, 2)),
)

STRUCTURES_PLUS = tuple(-omega for omega in _FORMS_PLUS)
STRUCTURES_MINUS = tuple(-omega for omega in _FORMS_MINUS)

# standard structures of the two complex chart coordinates, both orientations
K_PLUS = STRUCTURES_PLUS[2]
K_MINUS = STRUCTURES_MINUS[2]


def structure_basis(orientation: int) -> tuple:
    if orientation == 1:
        return STRUCTURES_PLUS
    if orientation == -1:
        return STRUCTURES_MINUS
    raise ValueError("orientation must be +1 or -1")


def structure_from_fiber(u, orientation: int) -> np.ndarray:
    """Unit fiber coordinates to a constant compatible structure."""
    u = np.asarray(u, dtype=float)
    basis = structure_basis(orientation)
    return u[0] * basis[0] + u[1] * basis[1] + u[2] * basis[2]


def fiber_from_structure(J: np.ndarray, orientation: int) -> np.ndarray:
    """Project a flat-compatible structure onto the basis; ||J_i||_F^2 = 4."""
    basis = structure_basis(orientation)
    return np.array([float(np.tensordot(b, J)) / 4.0 for b in basis])
