"""Structure pairs, reference structures, and their decay rates.

The independent oracle for the split-frame construction of the structures is
the affine sphere minimizer of the pseudo holomorphy residual, which never
sees the kernel splitting; for pullback scenarios a second oracle transports
the flat structure through the exact chart change.
"""

import numpy as np
import pytest

from morphoscope.calculus import pullback_scenario
from morphoscope.errors import NonIsolatedCriticalError, SymbolError
from morphoscope.hermitian import (best_compatible_structure, hermitian_pair,
                                   isolated_extension, pseudo_holomorphy_residual,
                                   reference_field, structure_deviation_rate)
from morphoscope.geometry import orientation_sign
from morphoscope.structures import K_MINUS, K_PLUS

from test_morphism import (pullback_diffeo, scenario_anisotropic, scenario_product,
                           scenario_pullback_product, scenario_square)


def transported_structure(diffeo, x, base_matrix):
    """Oracle: conjugate a constant base structure by the exact chart jacobian."""
    jac = np.array([[p.real_poly().diff(a).eval_real(x) for a in range(4)]
                    for p in diffeo])
    return np.linalg.solve(jac, base_matrix @ jac)


def sample_points(scenario, count, seed):
    rng = np.random.default_rng(seed)
    box = scenario.domain
    lo = np.asarray(box.lo)
    hi = np.asarray(box.hi)
    pts = []
    while len(pts) < count:
        p = lo + (hi - lo) * rng.uniform(0.15, 0.85, size=4)
        if np.linalg.norm(scenario.jacobian(p)) > 1e-3:
            pts.append(p)
    return pts


# ------------------------------------------------------------ pair algebra


@pytest.mark.parametrize("factory", [scenario_product, scenario_pullback_product])
def test_pair_is_metric_compatible_square_root_of_minus_one(factory):
    sc = factory()
    for m in sample_points(sc, 6, seed=11):
        hp = hermitian_pair(sc, m)
        g = sc.metric.matrix(m)
        for J in (hp.j_plus, hp.j_minus):
            assert np.allclose(J @ J, -np.eye(4), atol=1e-9)
            assert np.allclose(J.T @ g @ J, g, atol=1e-9)


@pytest.mark.parametrize("factory", [scenario_product, scenario_pullback_product])
def test_pair_agrees_horizontally_and_opposes_vertically(factory):
    sc = factory()
    for m in sample_points(sc, 5, seed=23):
        hp = hermitian_pair(sc, m)
        for e in hp.split.horizontal:
            assert np.allclose(hp.j_plus @ e, hp.j_minus @ e, atol=1e-9)
        for v in hp.split.vertical:
            assert np.allclose(hp.j_plus @ v, -(hp.j_minus @ v), atol=1e-9)


def test_pair_orientations_are_opposite():
    sc = scenario_product()
    m = np.array([0.4, -0.2, 0.3, 0.1])
    hp = hermitian_pair(sc, m)
    e1, v1 = hp.split.horizontal[0], hp.split.vertical[0]
    plus_frame = np.array([e1, hp.j_plus @ e1, v1, hp.j_plus @ v1])
    minus_frame = np.array([e1, hp.j_minus @ e1, v1, hp.j_minus @ v1])
    assert orientation_sign(sc.metric, m, plus_frame, reference=1) == 1
    assert orientation_sign(sc.metric, m, minus_frame, reference=1) == -1


@pytest.mark.parametrize("factory", [scenario_product, scenario_pullback_product])
def test_both_structures_intertwine_the_differential(factory):
    # the differential kills the vertical plane, so the vertical sign
    # difference between the pair members is invisible to the residual
    sc = factory()
    for m in sample_points(sc, 5, seed=37):
        hp = hermitian_pair(sc, m)
        assert pseudo_holomorphy_residual(sc, m, hp.j_plus) < 1e-8
        assert pseudo_holomorphy_residual(sc, m, hp.j_minus) < 1e-8


# -------------------------------------------------------------- minimizer


@pytest.mark.parametrize("factory", [scenario_product, scenario_pullback_product])
def test_minimizer_recovers_the_split_frame_structures(factory):
    sc = factory()
    for m in sample_points(sc, 10, seed=5):
        hp = hermitian_pair(sc, m)
        for orientation, expected in ((1, hp.j_plus), (-1, hp.j_minus)):
            J, _, res = best_compatible_structure(sc, m, orientation)
            assert res < 1e-8
            assert np.allclose(J, expected, atol=1e-6)


def test_minimizer_residual_floor_without_conformality():
    sc = scenario_anisotropic()
    _, _, res = best_compatible_structure(sc, np.zeros(4), 1)
    assert res > 0.1


def test_structure_transports_through_chart_changes():
    base = scenario_product()
    diffeo = pullback_diffeo()
    pulled = pullback_scenario(base, diffeo, base.domain.__class__.cube(0.8),
                               name="pulled")
    for x in sample_points(pulled, 5, seed=71):
        J = hermitian_pair(pulled, x).j_plus
        expected = transported_structure(diffeo, x, K_PLUS)
        assert np.allclose(J, expected, atol=1e-9)


# -------------------------------------------------------------- references


def test_reference_structure_of_product_map():
    ref = reference_field(scenario_product(), np.zeros(4), orientation=1)
    assert ref.order == 2
    assert np.allclose(ref.matrix, K_PLUS, atol=1e-12)
    assert np.allclose(ref.fiber, [0.0, 0.0, 1.0], atol=1e-12)
    assert np.allclose(ref.extended(np.array([0.1, 0, 0, 0])), K_PLUS)


def test_reference_structure_missing_orientation_raises():
    with pytest.raises(SymbolError):
        reference_field(scenario_product(), np.zeros(4), orientation=-1)


def test_reference_structures_of_square_map_cover_both_orientations():
    sc = scenario_square()
    plus = reference_field(sc, np.zeros(4), orientation=1)
    minus = reference_field(sc, np.zeros(4), orientation=-1)
    assert np.allclose(plus.matrix, K_PLUS, atol=1e-12)
    assert np.allclose(minus.matrix, K_MINUS, atol=1e-12)


def test_reference_original_chart_matrix_at_identity_chart():
    ref = reference_field(scenario_product(), np.zeros(4), orientation=1)
    y = np.array([0.05, -0.02, 0.01, 0.03])
    assert np.allclose(ref.original_chart_matrix(y), K_PLUS, atol=1e-12)


# ------------------------------------------------------------------ rates


def test_deviation_rate_flat_holomorphic_is_identically_zero():
    rates = structure_deviation_rate(scenario_product(), np.zeros(4))
    assert rates.deviation_fit.zero_branch
    assert rates.metric_orth_fit.zero_branch
    assert rates.metric_skew_fit.zero_branch
    assert rates.substitutions == ()
    assert rates.verdict == "PASS"


def test_deviation_rate_square_map_both_orientations():
    sc = scenario_square()
    for orientation in (1, -1):
        rates = structure_deviation_rate(sc, np.zeros(4), orientation=orientation)
        assert rates.deviation_fit.zero_branch
        assert rates.verdict == "PASS"


def test_deviation_rate_pullback_slopes():
    rates = structure_deviation_rate(scenario_pullback_product(), np.zeros(4))
    assert not rates.deviation_fit.zero_branch
    assert rates.deviation_fit.slope >= 0.9
    assert rates.metric_orth_fit.slope >= 1.9
    assert rates.metric_skew_fit.slope >= 1.9
    assert rates.verdict == "PASS"


def test_isolated_extension_flat_product():
    ext = isolated_extension(scenario_product(), np.zeros(4))
    assert ext.verdict == "PASS"
    assert ext.fit.zero_branch


def test_isolated_extension_pullback_decays():
    ext = isolated_extension(scenario_pullback_product(), np.zeros(4))
    assert ext.verdict == "PASS"
    assert not ext.fit.zero_branch
    assert ext.fit.slope >= 0.9
    assert all(ext.sups[i + 1] <= ext.sups[i] for i in range(len(ext.sups) - 1))


def test_isolated_extension_square_map_hits_critical_plane():
    with pytest.raises(NonIsolatedCriticalError) as info:
        isolated_extension(scenario_square(), np.zeros(4))
    p = info.value.point
    assert p is not None
    assert np.hypot(p[0], p[1]) < 1e-12
    assert np.linalg.norm(p) > 0
