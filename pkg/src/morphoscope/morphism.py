"""Pointwise analysis of maps to a surface: conformality, frames, tension.

The gauge-normalized differential M = h^{1/2} dF g^{-1/2} drives everything:
its singular values give the pointwise dilation, its rows test horizontal
conformality, and its kernel is the vertical space. Frames are constructed
deterministically so repeated runs and neighbouring points agree.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._linalg import spd_sqrt_pair
from .calculus import MorphismScenario
from .errors import ClassificationError, DegenerateFrameError
from .geometry import christoffel, covariant_derivative, orientation_sign, orthonormalize

EPS_CRITICAL = 1e-9


@dataclass
class _Gauges:
    point: np.ndarray
    g: np.ndarray
    ginv: np.ndarray
    gsqrt: np.ndarray
    ginvsqrt: np.ndarray
    jac: np.ndarray
    gauge: np.ndarray        # h^{1/2} dF g^{-1/2}
    singular_values: np.ndarray
    right_vectors: np.ndarray  # rows of V^T from the full SVD


def _gauges(scenario: MorphismScenario, m) -> _Gauges:
    m = np.asarray(m, dtype=float)
    scenario.metric.require_inside(m)
    g = scenario.metric.matrix_checked(m)
    gsqrt, ginvsqrt = spd_sqrt_pair(g)
    jac = scenario.jacobian(m)
    gauge = scenario.target.sqrt @ jac @ ginvsqrt
    _, s, vt = np.linalg.svd(gauge, full_matrices=True)
    return _Gauges(point=m, g=g, ginv=ginvsqrt @ ginvsqrt, gsqrt=gsqrt,
                   ginvsqrt=ginvsqrt, jac=jac, gauge=gauge,
                   singular_values=s, right_vectors=vt)


@dataclass
class HwcData:
    """Horizontal conformality data at a point."""

    point: np.ndarray
    conformal: np.ndarray     # h-gauge Gram matrix of the differential
    squared_dilation: float   # half trace of `conformal`
    defect: float             # Frobenius distance to the conformal part

    @property
    def dilation(self) -> float:
        return float(np.sqrt(max(0.0, self.squared_dilation)))


def hwc_residual(scenario: MorphismScenario, m) -> HwcData:
    ga = _gauges(scenario, m)
    conf = ga.gauge @ ga.gauge.T
    lam2 = 0.5 * float(np.trace(conf))
    defect = float(np.linalg.norm(conf - lam2 * np.eye(2), ord="fro"))
    return HwcData(point=ga.point, conformal=conf, squared_dilation=lam2, defect=defect)


def dilation_sup(scenario: MorphismScenario, m) -> float:
    """Largest stretch of the differential between the two metrics."""
    return float(_gauges(scenario, m).singular_values[0])


@dataclass
class Classification:
    point: np.ndarray
    status: str               # "regular" or "critical"
    dilation_sup: float

    @property
    def is_regular(self) -> bool:
        return self.status == "regular"


def classify_point(scenario: MorphismScenario, m,
                   eps: float = EPS_CRITICAL) -> Classification:
    s = dilation_sup(scenario, m)
    status = "regular" if s >= eps else "critical"
    return Classification(point=np.asarray(m, dtype=float), status=status,
                          dilation_sup=s)


@dataclass
class PointSplit:
    """Vertical/horizontal splitting with adapted frames at a regular point.

    horizontal rows (e1, e2) map to the conformal target frame (eps1, eps2)
    under the differential scaled by the dilation; vertical rows (v1, v2)
    span the kernel, oriented so (e1, e2, v1, v2) is positive with respect
    to the scenario orientation.
    """

    point: np.ndarray
    dilation: float
    squared_dilation: float
    defect: float
    horizontal: np.ndarray      # (2, 4) rows e1, e2
    vertical: np.ndarray        # (2, 4) rows v1, v2
    target_frame: np.ndarray    # (2, 2) rows eps1, eps2
    vertical_projector: np.ndarray
    horizontal_projector: np.ndarray


def splitting(scenario: MorphismScenario, m,
              eps: float = EPS_CRITICAL) -> PointSplit:
    ga = _gauges(scenario, m)
    if ga.singular_values[0] < eps:
        raise ClassificationError(
            f"splitting needs a regular point; dilation {ga.singular_values[0]:.3e} "
            f"at {ga.point.tolist()}")
    conf = ga.gauge @ ga.gauge.T
    lam2 = 0.5 * float(np.trace(conf))
    lam = float(np.sqrt(max(0.0, lam2)))
    defect = float(np.linalg.norm(conf - lam2 * np.eye(2), ord="fro"))

    h = scenario.target.matrix
    eps1 = np.array([1.0, 0.0]) / np.sqrt(h[0, 0])
    eps2 = scenario.target.complex_structure() @ eps1
    graw = ga.jac @ ga.ginv @ ga.jac.T
    try:
        c1 = np.linalg.solve(graw, lam * eps1)
        c2 = np.linalg.solve(graw, lam * eps2)
    except np.linalg.LinAlgError:
        raise DegenerateFrameError("horizontal Gram matrix is singular") from None
    e1 = ga.ginv @ ga.jac.T @ c1
    e2 = ga.ginv @ ga.jac.T @ c2

    # kernel of the gauge matrix: the two bottom right-singular directions
    k1 = ga.ginvsqrt @ ga.right_vectors[2]
    k2 = ga.ginvsqrt @ ga.right_vectors[3]
    p_vert = (np.outer(k1, k1) + np.outer(k2, k2)) @ ga.g
    p_hor = np.eye(4) - p_vert

    seeds = [p_vert @ basis for basis in np.eye(4)]
    fr = orthonormalize(scenario.metric, ga.point, seeds)
    if fr.vectors.shape[0] < 2:
        raise DegenerateFrameError("vertical frame construction lost rank")
    v1, v2 = fr.vectors[0], fr.vectors[1]
    frame = np.array([e1, e2, v1, v2])
    if orientation_sign(scenario.metric, ga.point, frame,
                        reference=scenario.orientation) < 0:
        v2 = -v2
        frame = np.array([e1, e2, v1, v2])

    return PointSplit(point=ga.point, dilation=lam, squared_dilation=lam2,
                      defect=defect, horizontal=np.array([e1, e2]),
                      vertical=np.array([v1, v2]),
                      target_frame=np.array([eps1, eps2]),
                      vertical_projector=p_vert, horizontal_projector=p_hor)


def tension_field(scenario: MorphismScenario, m) -> np.ndarray:
    """Tension of the map at m, exact from polynomial jets.

    Target Christoffel symbols vanish because target metrics are constant,
    so the tension is the metric trace of the chart Hessian corrected by the
    domain connection.
    """
    ga = _gauges(scenario, m)
    gamma = christoffel(scenario.metric, ga.point)
    hess = scenario.hessians(ga.point)
    contracted = np.einsum("ij,kij->k", ga.ginv, gamma)
    tau = np.empty(2)
    for a in range(2):
        tau[a] = float(np.einsum("ij,ij->", ga.ginv, hess[a]) - contracted @ ga.jac[a])
    return tau


def tension_norm(scenario: MorphismScenario, m) -> float:
    tau = tension_field(scenario, m)
    h = scenario.target.matrix
    return float(np.sqrt(max(0.0, tau @ h @ tau)))


def fiber_mean_curvature(scenario: MorphismScenario, m,
                         step: float | None = None) -> np.ndarray:
    """Mean curvature vector of the fiber through a regular point.

    Sums horizontal projections of covariant derivatives of the deterministic
    vertical frame fields along themselves. The result is frame independent
    because the vertical frame is orthonormal.
    """
    base = splitting(scenario, m)

    def vfield(i):
        def field(x):
            return splitting(scenario, x).vertical[i]
        return field

    total = np.zeros(4)
    for i in range(2):
        d = covariant_derivative(scenario.metric, vfield(i), base.point,
                                 base.vertical[i], step=step)
        total = total + base.horizontal_projector @ d
    return total


@dataclass
class ValidationRecord:
    point: np.ndarray
    status: str
    dilation_sup: float
    squared_dilation: float
    defect: float
    tension: float


@dataclass
class ValidationReport:
    scenario: str
    tolerance: float
    records: list
    max_defect: float
    max_tension: float
    verdict: str

    @property
    def passed(self) -> bool:
        return self.verdict == "PASS"


def validate_morphism(scenario: MorphismScenario, points: Sequence[np.ndarray],
                      tol: float = 1e-6) -> ValidationReport:
    """Check horizontal conformality and harmonicity over a point sample.

    The verdict is PASS when both the largest conformality defect and the
    largest tension norm over the regular sample points stay below tol.
    """
    records = []
    max_defect = 0.0
    max_tension = 0.0
    for p in points:
        cls = classify_point(scenario, p)
        hwc = hwc_residual(scenario, p)
        tnorm = tension_norm(scenario, p)
        records.append(ValidationRecord(
            point=np.asarray(p, dtype=float), status=cls.status,
            dilation_sup=cls.dilation_sup, squared_dilation=hwc.squared_dilation,
            defect=hwc.defect, tension=tnorm))
        if cls.is_regular:
            max_defect = max(max_defect, hwc.defect)
            max_tension = max(max_tension, tnorm)
    verdict = "PASS" if (max_defect <= tol and max_tension <= tol) else "FAIL"
    return ValidationReport(scenario=scenario.name, tolerance=tol, records=records,
                            max_defect=max_defect, max_tension=max_tension,
                            verdict=verdict)
