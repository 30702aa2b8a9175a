"""Adapted structure pairs along a map and their deviation rates.

At a regular point the splitting frames assemble two compatible almost
complex structures: both rotate the horizontal plane onto the target's
positive rotation, and they rotate the vertical plane in opposite senses,
giving orientations +1 and -1. Near a center the structures are compared
against the constant reference structure of the leading symbol inside the
second order normal chart, where Frobenius norms are the natural gauge.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._linalg import minimize_affine_on_sphere
from .calculus import MorphismScenario, NormalChart
from .errors import ClassificationError, NonIsolatedCriticalError, SymbolError
from .geometry import oriented_frame
from .morphism import PointSplit, classify_point, splitting
from .ratefit import RateFit, default_radii, fit_rate
from .structures import K_MINUS, K_PLUS, structure_basis
from .symbol import SymbolCandidate, _seeded_directions, symbol_polynomial

MAX_DIRECTION_SUBSTITUTIONS = 25


@dataclass
class HermitianPair:
    """The two adapted structures at a regular point."""

    point: np.ndarray
    j_plus: np.ndarray
    j_minus: np.ndarray
    split: PointSplit

    def structure(self, orientation: int) -> np.ndarray:
        return self.j_plus if orientation == 1 else self.j_minus


def hermitian_pair(scenario: MorphismScenario, m) -> HermitianPair:
    sp = splitting(scenario, m)
    B = np.column_stack([sp.horizontal[0], sp.horizontal[1],
                         sp.vertical[0], sp.vertical[1]])
    Binv = np.linalg.inv(B)
    return HermitianPair(point=sp.point, j_plus=B @ K_PLUS @ Binv,
                         j_minus=B @ K_MINUS @ Binv, split=sp)


def structure_field(scenario: MorphismScenario, orientation: int = 1):
    """Pointwise structure evaluator, a (1,1)-tensor field on regular points."""

    def field(x: np.ndarray) -> np.ndarray:
        return hermitian_pair(scenario, x).structure(orientation)

    return field


def pseudo_holomorphy_residual(scenario: MorphismScenario, m, J: np.ndarray) -> float:
    """How far J is from intertwining the differential with the target rotation."""
    scenario.metric.require_inside(m)
    jac = scenario.jacobian(m)
    j_target = scenario.target.complex_structure()
    return float(np.linalg.norm(jac @ J - j_target @ jac, ord="fro"))


def best_compatible_structure(scenario: MorphismScenario, m, orientation: int = 1):
    """Minimize the pseudo holomorphy residual over compatible structures.

    The compatible structures of one orientation at m form a sphere in the
    coordinates of the structure basis conjugated by any positively oriented
    orthonormal frame; the residual is affine in those coordinates. Returns
    (structure, fiber coordinates, residual). Independent of the splitting
    construction, so it serves as a cross check on hermitian_pair.
    """
    scenario.metric.require_inside(m)
    frame = oriented_frame(scenario.metric, m, orientation=1)
    B = frame.basis_matrix()
    Binv = np.linalg.inv(B)
    jac = scenario.jacobian(m)
    j_target = scenario.target.complex_structure()
    rho0 = (-j_target @ jac).ravel()
    basis = structure_basis(orientation * scenario.orientation)
    cols = [(jac @ (B @ K @ Binv)).ravel() for K in basis]
    u, res = minimize_affine_on_sphere(rho0, np.column_stack(cols))
    J = B @ sum(u[a] * basis[a] for a in range(3)) @ Binv
    return J, u, res


# ------------------------------------------------------------- references


@dataclass
class ReferenceStructure:
    """Constant reference structure of the leading symbol at a center."""

    center: np.ndarray
    orientation: int
    order: int
    chart: NormalChart
    matrix: np.ndarray
    fiber: np.ndarray
    candidate: SymbolCandidate

    def extended(self, y) -> np.ndarray:
        """The parallel extension in normalized coordinates: constant."""
        return self.matrix

    def original_chart_matrix(self, y) -> np.ndarray:
        """The extension pushed to original coordinates at the image of y."""
        jac = np.array([[p.diff(a).eval_real(y) for a in range(4)]
                        for p in self.chart.chart_map])
        return jac @ self.matrix @ np.linalg.inv(jac)


def reference_field(scenario: MorphismScenario, m0, orientation: int = 1) -> ReferenceStructure:
    """Reference structure for the requested orientation at a center.

    Raises SymbolError when the leading symbol admits no compatible structure
    of that orientation. If several exist the one with the smallest residual
    (ties broken by fiber coordinates) is chosen deterministically.
    """
    data = symbol_polynomial(scenario, m0)
    matches = [c for c in data.candidates if c.orientation == orientation]
    if not matches:
        raise SymbolError(
            f"leading symbol admits no compatible structure with orientation {orientation:+d}")
    matches.sort(key=lambda c: (c.residual, tuple(np.round(c.fiber, 12))))
    cand = matches[0]
    return ReferenceStructure(center=data.center, orientation=orientation,
                              order=data.order, chart=data.chart,
                              matrix=cand.matrix, fiber=cand.fiber, candidate=cand)


# ------------------------------------------------------------------ rates


def _direction_values(sc: MorphismScenario, dirs: np.ndarray, radii, evaluate, seed: int):
    """max of `evaluate` over directions per radius, with critical substitution.

    A direction whose ray meets a critical sample at any radius is replaced
    by a deterministic jittered direction; substitutions are reported as
    (direction index, attempts used).
    """
    rng = np.random.default_rng(seed + 7919)
    substitutions = []
    table = np.zeros((len(dirs), len(radii)))
    for i in range(len(dirs)):
        d = dirs[i]
        for attempt in range(MAX_DIRECTION_SUBSTITUTIONS + 1):
            ok = True
            row = np.zeros(len(radii))
            for j, r in enumerate(radii):
                y = r * d
                if classify_point(sc, y).status != "regular":
                    ok = False
                    break
                row[j] = evaluate(y)
            if ok:
                if attempt > 0:
                    substitutions.append((i, attempt))
                table[i] = row
                break
            d = dirs[i] + 0.05 * (attempt + 1) * rng.standard_normal(4)
            d = d / np.linalg.norm(d)
        else:
            raise ClassificationError(
                "could not steer a sample ray off the critical set after "
                f"{MAX_DIRECTION_SUBSTITUTIONS} substitutions")
    return np.max(table, axis=0), tuple(substitutions)


@dataclass
class DeviationRates:
    """Decay of the structure deviation and of the reference metric defects."""

    reference: ReferenceStructure
    radii: tuple
    deviation_fit: RateFit
    metric_orth_fit: RateFit
    metric_skew_fit: RateFit
    substitutions: tuple
    verdict: str


def structure_deviation_rate(scenario: MorphismScenario, m0, orientation: int = 1,
                             radii: Sequence[float] | None = None,
                             n_directions: int = 16, seed: int = 0) -> DeviationRates:
    """Fit ||J(m) - J0|| and the compatibility defects of J0 near the center.

    Everything is evaluated in the normalized chart. Expected behaviour: the
    deviation decays at least linearly, both metric defects at least
    quadratically; identically zero quantities take the zero branch.
    """
    ref = reference_field(scenario, m0, orientation)
    sc = ref.chart.scenario
    radii = tuple(radii) if radii is not None else default_radii(sc.domain.size())
    dirs = _seeded_directions(n_directions, seed)
    J0 = ref.matrix

    def deviation(y):
        J = hermitian_pair(sc, y).structure(orientation)
        return float(np.linalg.norm(J - J0, ord="fro"))

    dev_vals, subs = _direction_values(sc, dirs, radii, deviation, seed)

    xs = list(np.eye(4)) + list(_seeded_directions(4, seed + 2000))

    def orth_defect(y):
        g = sc.metric.matrix(y)
        return max(abs(float((J0 @ x) @ g @ (J0 @ x) - x @ g @ x)) for x in xs)

    def skew_defect(y):
        g = sc.metric.matrix(y)
        return max(abs(float((J0 @ x) @ g @ x)) for x in xs)

    orth_vals = np.array([max(orth_defect(r * d) for d in dirs) for r in radii])
    skew_vals = np.array([max(skew_defect(r * d) for d in dirs) for r in radii])

    deviation_fit = fit_rate(radii, dev_vals)
    orth_fit = fit_rate(radii, orth_vals)
    skew_fit = fit_rate(radii, skew_vals)
    ok = (deviation_fit.meets_lower_slope(0.9)
          and orth_fit.meets_lower_slope(1.9)
          and skew_fit.meets_lower_slope(1.9))
    return DeviationRates(reference=ref, radii=radii, deviation_fit=deviation_fit,
                          metric_orth_fit=orth_fit, metric_skew_fit=skew_fit,
                          substitutions=subs, verdict="PASS" if ok else "FAIL")


@dataclass
class IsolatedExtension:
    """Shell sups of the structure deviation around an isolated center."""

    reference: ReferenceStructure
    radii: tuple
    sups: tuple
    fit: RateFit
    verdict: str


def isolated_extension(scenario: MorphismScenario, m0, orientation: int = 1,
                       radii: Sequence[float] | None = None,
                       n_directions: int = 24, seed: int = 0) -> IsolatedExtension:
    """Certify the isolated-center picture on shrinking shells.

    Every sampled shell point must be regular; hitting a critical sample
    raises NonIsolatedCriticalError carrying the offending original-chart
    point. Shell sups of the deviation must then decrease with at least
    linear rate (or vanish identically).
    """
    ref = reference_field(scenario, m0, orientation)
    sc = ref.chart.scenario
    radii = tuple(radii) if radii is not None else default_radii(sc.domain.size())
    dirs = _seeded_directions(n_directions, seed, include_axes=True)
    J0 = ref.matrix
    sups = []
    for r in radii:
        worst = 0.0
        for d in dirs:
            y = r * d
            if classify_point(sc, y).status != "regular":
                raise NonIsolatedCriticalError(
                    f"critical sample on the shell of radius {r:.3e}",
                    point=ref.chart.to_original(y))
            J = hermitian_pair(sc, y).structure(orientation)
            worst = max(worst, float(np.linalg.norm(J - J0, ord="fro")))
        sups.append(worst)
    fit = fit_rate(radii, sups)
    monotone = all(sups[i + 1] <= sups[i] * 1.05 for i in range(len(sups) - 1))
    ok = fit.zero_branch or (fit.meets_lower_slope(0.9) and monotone)
    return IsolatedExtension(reference=ref, radii=radii, sups=tuple(sups), fit=fit,
                             verdict="PASS" if ok else "FAIL")
