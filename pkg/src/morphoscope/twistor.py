"""Unit structure bundle over the chart: surface lifts and their residuals.

A surface patch lifts pointwise to the compatible structure that turns its
oriented tangent plane into a complex line. The bundle's almost complex
structure acts on horizontal vectors through the structure at the point and
on vertical (fiber tangent) endomorphisms by composition with it; the global
sign of the fiber action is a convention, fixed here by the constant below
and pinned experimentally by the minimal catenoid regression test, which
fails with the opposite sign.

Fiber tangent norms carry a factor 1/2 relative to the gauged Frobenius norm
so that vertical speeds agree with the speed of the fiber-coordinate curve
on the unit 2-sphere.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ._linalg import spd_sqrt_pair, surface_complex_structure
from .calculus import MorphismScenario
from .errors import DegenerateFrameError, DomainError, GeometryError
from .geometry import (Box, ChartMetric, christoffel, curvature_data,
                       orientation_sign, oriented_frame, orthonormalize)
from .structures import K_MINUS, K_PLUS, fiber_from_structure

VERTICAL_ROTATION_SIGN = -1
LIFT_FD_STEP = 1e-4
PATCH_FD_STEP = 1e-5
PATCH_RANK_TOL = 1e-8


@dataclass
class SurfacePatch:
    """Parametrized surface in the chart with derivative access."""

    psi: Callable
    param_box: Box
    jacobian: Callable | None = None
    name: str = "patch"

    def point(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if not self.param_box.contains(p):
            raise DomainError(f"parameter {p.tolist()} leaves the patch box")
        return np.asarray(self.psi(p[0], p[1]), dtype=float)

    def dpsi(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if self.jacobian is not None:
            return np.asarray(self.jacobian(p[0], p[1]), dtype=float)
        cols = []
        h = PATCH_FD_STEP
        for k in range(2):
            e = np.zeros(2)
            e[k] = 1.0
            full = (self.point(p + h * e) - self.point(p - h * e)) / (2 * h)
            half = (self.point(p + 0.5 * h * e) - self.point(p - 0.5 * h * e)) / h
            cols.append((4.0 * half - full) / 3.0)
        return np.column_stack(cols)

    def induced_metric(self, metric: ChartMetric, p) -> np.ndarray:
        d = self.dpsi(p)
        g = metric.matrix_checked(self.point(p))
        return d.T @ g @ d

    def induced_structure(self, metric: ChartMetric, p) -> np.ndarray:
        """Positive rotation of the parameter plane in the induced metric."""
        return surface_complex_structure(self.induced_metric(metric, p), 1)


@dataclass
class TwistorPoint:
    """A compatible structure attached to a chart point."""

    base: np.ndarray
    orientation: int
    matrix: np.ndarray
    fiber: np.ndarray


@dataclass
class LiftSample:
    """Everything the lift machinery reports at one surface parameter."""

    parameter: np.ndarray
    twistor: TwistorPoint
    sign: int
    residual: float
    energy: float
    area_element: float
    omega_tangent: float
    omega_normal: float


@dataclass
class VerticalEnergy:
    """Vertical speed data of a lift at a parameter point."""

    value: float
    gram: np.ndarray
    area_element: float


def fiber_coordinates(metric: ChartMetric, m, J: np.ndarray,
                      orientation: int = 1) -> np.ndarray:
    """Unit coordinates of a structure over the deterministic frame at m.

    The orientation tag selects which three-dimensional component family is
    extracted; a structure of the opposite class has vanishing components
    there, which is reported as an error rather than a zero vector.
    """
    m = np.asarray(m, dtype=float)
    g = metric.matrix_checked(m)
    J = np.asarray(J, dtype=float)
    if np.max(np.abs(J @ J + np.eye(4))) > 1e-9:
        raise GeometryError("structure squared is not minus the identity")
    if np.max(np.abs(J.T @ g @ J - g)) > 1e-9 * max(1.0, float(np.max(np.abs(g)))):
        raise GeometryError("structure does not preserve the metric")
    B = oriented_frame(metric, m, orientation=1).basis_matrix()
    u = fiber_from_structure(np.linalg.solve(B, J @ B), orientation)
    norm = float(np.linalg.norm(u))
    if abs(norm - 1.0) > 1e-6:
        raise GeometryError(
            f"structure is not in the orientation {orientation:+d} class "
            f"(component norm {norm:.3e})")
    return u / norm


def _lift_frames(scenario: MorphismScenario, patch: SurfacePatch, p):
    metric = scenario.metric
    m = patch.point(p)
    d = patch.dpsi(p)
    sv = np.linalg.svd(d, compute_uv=False)
    if sv[-1] <= PATCH_RANK_TOL:
        raise DegenerateFrameError(
            f"patch differential is rank deficient at {np.asarray(p).tolist()}")
    fr = orthonormalize(metric, m, [d[:, 0], d[:, 1]], complete=True)
    t1, t2, n1, n2 = fr.vectors
    if orientation_sign(metric, m, fr, reference=scenario.orientation) < 0:
        n2 = -n2
    return m, t1, t2, n1, n2


def surface_lift(scenario: MorphismScenario, patch: SurfacePatch, p,
                 orientation: int = 1) -> TwistorPoint:
    """The structure of the tagged class whose complex lines contain T_pS."""
    m, t1, t2, n1, n2 = _lift_frames(scenario, patch, p)
    B = np.column_stack([t1, t2, n1, n2])
    K = K_PLUS if orientation == 1 else K_MINUS
    J = B @ K @ np.linalg.inv(B)
    fiber = fiber_coordinates(scenario.metric, m, J,
                              orientation * scenario.orientation)
    return TwistorPoint(base=m, orientation=orientation, matrix=J, fiber=fiber)


def _tangent_coordinates(patch: SurfacePatch, p, t1, t2):
    """Parameter-plane vectors mapping to the orthonormal tangent pair."""
    d = patch.dpsi(p)
    x1, *_ = np.linalg.lstsq(d, t1, rcond=None)
    x2, *_ = np.linalg.lstsq(d, t2, rcond=None)
    return x1, x2


def _vertical_derivative(scenario: MorphismScenario, patch: SurfacePatch, p,
                         X, orientation: int, step: float | None = None) -> np.ndarray:
    """Covariant derivative of the lift field along a parameter direction."""
    p = np.asarray(p, dtype=float)
    X = np.asarray(X, dtype=float)
    h = (step or LIFT_FD_STEP) / max(1.0, float(np.max(np.abs(X))))

    def lifted(q):
        return surface_lift(scenario, patch, q, orientation).matrix

    def central(t):
        return (lifted(p + t * X) - lifted(p - t * X)) / (2 * t)

    raw = (4.0 * central(0.5 * h) - central(h)) / 3.0
    m = patch.point(p)
    v = patch.dpsi(p) @ X
    gamma = christoffel(scenario.metric, m)
    gv = np.einsum("mij,i->mj", gamma, v)
    J = lifted(p)
    return raw + gv @ J - J @ gv


def _fiber_inner(A: np.ndarray, B: np.ndarray, gs: np.ndarray, gis: np.ndarray) -> float:
    """Inner product on fiber tangents, a quarter of the gauged trace pairing."""
    ga = gs @ A @ gis
    gb = gs @ B @ gis
    return 0.25 * float(np.sum(ga * gb))


def script_J_residual(scenario: MorphismScenario, patch: SurfacePatch, p,
                      orientation: int = 1, step: float | None = None) -> float:
    """Holomorphicity defect of the lift at p.

    Compares the lift differential applied to the rotated tangent directions
    against the bundle structure applied to the unrotated images, horizontal
    parts in the chart metric and vertical parts in the fiber norm. Vanishes
    exactly when the lift is a holomorphic curve of the bundle structure.
    """
    m, t1, t2, n1, n2 = _lift_frames(scenario, patch, p)
    J = surface_lift(scenario, patch, p, orientation).matrix
    g = scenario.metric.matrix(m)
    gs, gis = spd_sqrt_pair(g)
    d = patch.dpsi(p)
    x1, x2 = _tangent_coordinates(patch, p, t1, t2)
    j_s = patch.induced_structure(scenario.metric, p)
    v1 = _vertical_derivative(scenario, patch, p, x1, orientation, step)
    v2 = _vertical_derivative(scenario, patch, p, x2, orientation, step)
    basis = np.column_stack([x1, x2])
    total = 0.0
    for x, vx in ((x1, v1), (x2, v2)):
        jx = j_s @ x
        h_err = d @ jx - J @ (d @ x)
        total += float(h_err @ g @ h_err)
        c = np.linalg.solve(basis, jx)
        v_rot = c[0] * v1 + c[1] * v2
        v_err = v_rot - VERTICAL_ROTATION_SIGN * (J @ vx)
        total += _fiber_inner(v_err, v_err, gs, gis)
    return float(np.sqrt(total))


def vertical_energy_density(scenario: MorphismScenario, patch: SurfacePatch, p,
                            orientation: int = 1,
                            step: float | None = None) -> VerticalEnergy:
    """Squared vertical speed of the lift over an orthonormal tangent pair.

    The Gram matrix of the vertical derivatives and the induced area element
    of the lifted surface are returned alongside for diagnostics.
    """
    m, t1, t2, _, _ = _lift_frames(scenario, patch, p)
    g = scenario.metric.matrix(m)
    gs, gis = spd_sqrt_pair(g)
    x1, x2 = _tangent_coordinates(patch, p, t1, t2)
    v1 = _vertical_derivative(scenario, patch, p, x1, orientation, step)
    v2 = _vertical_derivative(scenario, patch, p, x2, orientation, step)
    q = np.array([[_fiber_inner(v1, v1, gs, gis), _fiber_inner(v1, v2, gs, gis)],
                  [_fiber_inner(v2, v1, gs, gis), _fiber_inner(v2, v2, gs, gis)]])
    value = float(q[0, 0] + q[1, 1])
    area = float(np.sqrt(max(0.0, np.linalg.det(np.eye(2) + q))))
    return VerticalEnergy(value=value, gram=q, area_element=area)


def curvature_densities(scenario: MorphismScenario, patch: SurfacePatch, p):
    """Tangent and normal curvature pairings of the surface at psi(p)."""
    m, t1, t2, n1, n2 = _lift_frames(scenario, patch, p)
    cd = curvature_data(scenario.metric, m)
    omega_t = cd.pairing(t1, t2, t1, t2)
    omega_n = cd.pairing(t1, t2, n1, n2)
    return float(omega_t), float(omega_n)


def sample_lift(scenario: MorphismScenario, patch: SurfacePatch, p,
                orientation: int = 1, step: float | None = None) -> LiftSample:
    """Full lift record at one parameter point."""
    p = np.asarray(p, dtype=float)
    tw = surface_lift(scenario, patch, p, orientation)
    residual = script_J_residual(scenario, patch, p, orientation, step)
    energy = vertical_energy_density(scenario, patch, p, orientation, step)
    omega_t, omega_n = curvature_densities(scenario, patch, p)
    return LiftSample(parameter=p, twistor=tw, sign=VERTICAL_ROTATION_SIGN,
                      residual=residual, energy=energy.value,
                      area_element=energy.area_element,
                      omega_tangent=omega_t, omega_normal=omega_n)
