"""Distinguishability decay, band-annihilated distances, certified bounds."""

import numpy as np
import pytest

from ccrflow import (
    BoundCertificate,
    DecayCurve,
    FockOperator,
    GridSpec,
    absorbing_state_probe,
    band_annihilated_distance,
    certified_bound,
    decay_curve,
    number_state,
    trace_norm,
)


def gue_traceless(n: int, seed: int) -> FockOperator:
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    h = (g + g.conj().T) / 2.0
    h -= np.trace(h) / n * np.eye(n)
    return FockOperator(h)


def test_fock_pair_decay_matches_closed_form():
    # |0><0| vs |1><1| has a closed-form distance curve; the first few
    # values are 2, 8/9, 1/2, 8/27
    curve = decay_curve(
        number_state(0, 40), number_state(1, 40), times=(0.0, 0.25, 0.5, 1.0)
    )
    want = [2.0, 8.0 / 9.0, 0.5, 8.0 / 27.0]
    np.testing.assert_allclose(curve.distances, want, atol=1e-5)
    d = curve.distances
    assert all(b < a for a, b in zip(d, d[1:]))


def test_spectral_path_agrees_on_fock_pair():
    # the spectral path reports the reliable leading block, so compare it
    # against the quadrature-evolved pair cropped to the same block
    from ccrflow import HeatFlowParams, evolve_state, reliable_levels, trust_radius

    n = 30
    rho1, rho2 = number_state(0, n), number_state(1, n)
    curve = decay_curve(rho1, rho2, times=(0.0, 0.5), path="spectral")
    assert abs(curve.distances[0] - 2.0) < 1e-9
    k = reliable_levels(GridSpec(trust_radius(n), 2), n)
    e1 = evolve_state(HeatFlowParams(0.5), rho1).matrix
    e2 = evolve_state(HeatFlowParams(0.5), rho2).matrix
    block = trace_norm(e1[:k, :k] - e2[:k, :k])
    assert abs(curve.distances[1] - block) < 2e-3


def test_decay_curve_input_guards():
    with pytest.raises(ValueError, match="share a truncation"):
        decay_curve(number_state(0, 10), number_state(0, 12), times=(0.0,))
    with pytest.raises(ValueError, match="strictly increasing"):
        decay_curve(number_state(0, 10), number_state(1, 10), times=(0.5, 0.5))
    with pytest.raises(ValueError, match="unknown path"):
        decay_curve(number_state(0, 10), number_state(1, 10),
                    times=(0.0,), path="exact")


def test_decay_curve_record_invariants():
    with pytest.raises(ValueError, match="align"):
        DecayCurve((0.0, 1.0), (2.0,))
    with pytest.raises(ValueError, match="empty"):
        DecayCurve((), ())
    with pytest.raises(ValueError, match="negative time"):
        DecayCurve((-1.0,), (2.0,))
    with pytest.raises(ValueError, match="negative distance"):
        DecayCurve((0.0, 1.0), (2.0, -0.5))
    with pytest.raises(ValueError, match="initial value"):
        DecayCurve((0.0, 1.0), (1.0, 1.5))


def test_band_annihilated_zero_input():
    grid = GridSpec(half_width=1.0, points_per_axis=8)
    d, b = band_annihilated_distance(
        FockOperator(np.zeros((8, 8), dtype=complex)), 1.0, grid
    )
    assert d == 0.0
    assert float(np.abs(b.matrix).max()) == 0.0


def test_band_annihilated_constraint_residual_is_tight():
    # default rcond keeps the constraints satisfied to machine scale
    from ccrflow import displacement_batch

    n = 12
    a = gue_traceless(n, 3)
    grid = GridSpec(half_width=1.0, points_per_axis=8)
    d, b = band_annihilated_distance(a, 1.0, grid)
    xs, ys = grid.mesh()
    keep = (np.hypot(xs, ys) <= 1.0 + 1e-12).ravel()
    pts = np.column_stack([xs.ravel(), ys.ravel()])[keep]
    w = displacement_batch(pts, n)
    resid = np.einsum("mn,bnm->b", b.matrix, w)
    assert float(np.abs(resid).max()) < 1e-10
    assert d > 0.0


def test_band_annihilated_trace_bound():
    # the origin constraint forces tr B = 0, so a trace-one input stays at
    # distance >= 1 in trace norm for every epsilon
    n = 12
    rng = np.random.default_rng(9)
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    h = (g + g.conj().T) / 2.0
    h = h / np.trace(h)
    a = FockOperator(h)
    for eps in (1.0, 0.5, 0.25):
        d, _ = band_annihilated_distance(
            a, eps, GridSpec(half_width=eps, points_per_axis=8), rcond=1e-6
        )
        assert d >= 1.0 - 1e-6


def test_band_annihilated_profile_monotone_with_regularized_solve():
    n = 12
    a = gue_traceless(n, 41)
    dists = []
    for eps in (1.0, 0.5, 0.25):
        d, _ = band_annihilated_distance(
            a, eps, GridSpec(half_width=eps, points_per_axis=8), rcond=1e-6
        )
        dists.append(d)
    assert all(b <= a + 1e-9 for a, b in zip(dists, dists[1:]))


def test_band_annihilated_guards():
    a = gue_traceless(4, 1)
    with pytest.raises(ValueError, match="positive"):
        band_annihilated_distance(a, 0.0, GridSpec(1.0, 8))
    with pytest.raises(ValueError, match="coarse"):
        band_annihilated_distance(a, 1.0, GridSpec(1.0, 4))
    with pytest.raises(ValueError, match="cover"):
        band_annihilated_distance(a, 2.0, GridSpec(1.0, 8))
    with pytest.raises(ValueError, match="degrees of freedom"):
        band_annihilated_distance(a, 1.0, GridSpec(1.0, 40))


def test_certificate_on_small_fock_pair():
    cert = certified_bound(
        number_state(0, 24), number_state(1, 24),
        t=4.0, epsilon=2.0, delta=1.0,
    )
    assert cert.measured <= cert.term1 + cert.term2 + 1e-6
    assert cert.slack > 0
    assert cert.details["pairing_inner_product"] <= 1e-8
    assert cert.term3 == 0.0
    assert cert.bound == cert.term1 + cert.term2 + cert.term3


def test_certificate_rejects_too_small_budget():
    with pytest.raises(ValueError, match="budget"):
        certified_bound(
            number_state(0, 24), number_state(1, 24),
            t=4.0, epsilon=1.0, delta=1.0,
        )


def test_certificate_record_invariant():
    with pytest.raises(ValueError, match="violated"):
        BoundCertificate(
            epsilon=1.0, term1=0.1, term2=0.1, term3=0.0, measured=0.5
        )


def test_absorbing_probe_sees_uniform_decay():
    rep = absorbing_state_probe(
        (0.0, 1.0), [("vacuum", number_state(0, 30))]
    )
    assert rep.passed
    assert rep.measured < 1e-3
