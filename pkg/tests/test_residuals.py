"""Residual operators: two-route identities, sign verdicts, threshold search."""

import math

import numpy as np
import pytest

from fdelab import errors
from fdelab.matching import GluedBarrier
from fdelab.outer import OuterProfileSet
from fdelab.params import make_params
from fdelab.residuals import (
    L0_residual,
    L1_residual,
    Region,
    find_thresholds,
    glued_evaluator,
    inner_residual_closed,
    l1_terms_evaluator,
    outer_as_inner_evaluator,
    outer_psi_evaluator,
    outer_terms_evaluator,
    psi1_residual_decomposed,
    verify_sign_region,
)

# Frozen inner-side subsolution defect of the eps = 0 glued minus barrier
# at the reference set (xi1 = 10).
INNER_DEFECT_XI0 = -2.577075856538493e-07
INNER_DEFECT_XI5 = -4.062183213897597e-06


# -- operator identities ------------------------------------------------------

def test_psi1_two_route_residual(outer_ref):
    # raw L0 against the exact decomposition; agreement is limited only by
    # roundoff in the raw route
    out = outer_ref
    gaps = np.logspace(-3, 3, 60)
    for sign in ("+", "-"):
        for tau in (6.0, 10.0):
            raw = L0_residual(
                outer_psi_evaluator(out, "psi1", sign), gaps, tau, out.p, out.d
            )
            dec = psi1_residual_decomposed(out, sign, gaps, tau)
            assert np.max(np.abs(raw - dec)) < 1e-12


def test_inner_outer_transform_identity(outer_ref):
    # L1 applied to the mapped outer ansatz reproduces L0 pointwise
    out = outer_ref
    xis = np.linspace(0.5, 20.0, 40)
    tau = 8.0
    gaps = xis * math.exp(-out.p.gamma * tau)
    l1 = L1_residual(
        outer_as_inner_evaluator(out, "psi3", "+"), xis, tau, out.p, out.d
    )
    l0 = L0_residual(
        outer_psi_evaluator(out, "psi3", "+"), gaps, tau, out.p, out.d
    )
    assert np.allclose(l1, l0, rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize(
    "gamma,variant,tau",
    [(1.5, "psi3", 6.0), (0.5, "psi4", 6.0), (0.3, "psi4", 10.0)],
)
def test_decomposed_terms_match_raw_l0(gamma, variant, tau):
    # e^{-gamma tau} times the rescaled decomposition must equal raw L0 to
    # roundoff in the raw term sum, at every recurrence depth (N = 1, 2, 3)
    p = make_params(3, 0.1, gamma, 2.0, theta1_minus=-1.0)
    out = OuterProfileSet(p)
    d = out.d
    xi0b = math.sqrt((p.n - 1) / d.a0)
    for sign in ("+", "-"):
        lo = max(1e-3, 2.0 * xi0b * math.exp(-gamma * tau)) if sign == "-" else 1e-3
        gaps = np.geomspace(lo, 1e3, 60)
        res, _ = outer_terms_evaluator(out, variant, sign)(gaps, tau)
        raw = L0_residual(outer_psi_evaluator(out, variant, sign), gaps, tau, p, d)
        w, we, wee, wt = out.psi_bundle(variant, sign, tau, gap=gaps)
        eta = p.A + gaps
        visc = math.exp(-2.0 * gamma * tau) * (wee / w + d.b1 * (we / w) ** 2)
        drift = d.b2 * math.exp(-gamma * tau) * we / w
        raw_scale = (
            np.abs(wt)
            + (p.n - 1) * (np.abs(visc) + np.abs(drift))
            + np.abs(gamma * eta * we)
            + np.abs(w)
            + d.a0
        )
        diff = np.abs(math.exp(-gamma * tau) * res - raw)
        assert np.max(diff / raw_scale) < 1e-13


def test_inner_closed_form_matches_numeric_l1(solver_ref):
    bar = GluedBarrier(solver_ref, "-", 0.01, 10.0)
    xis = np.linspace(-5.0, 9.5, 30)
    num = L1_residual(glued_evaluator(bar), xis, 12.0, bar.outer.p, bar.outer.d)
    closed = inner_residual_closed(bar, xis, 12.0)
    assert np.max(np.abs(num - closed)) < 1e-12


def test_inner_defect_frozen(solver_ref):
    # eps = 0 leaves the pure e^{-gamma tau} transport defect; negative is
    # the correct direction for the subsolution
    bar = GluedBarrier(solver_ref, "-", 0.0, 10.0)
    d0 = float(inner_residual_closed(bar, 0.0, 10.0))
    d5 = float(inner_residual_closed(bar, 5.0, 10.0))
    assert d0 == pytest.approx(INNER_DEFECT_XI0, rel=1e-6)
    assert d5 == pytest.approx(INNER_DEFECT_XI5, rel=1e-6)
    assert d0 < 0.0 and d5 < 0.0


def test_l1_terms_evaluator_consistent(solver_ref):
    bar = GluedBarrier(solver_ref, "-", 0.01, 10.0)
    ev = l1_terms_evaluator(glued_evaluator(bar), bar.outer.p, bar.outer.d)
    xis = np.linspace(-3.0, 8.0, 20)
    res, scale = ev(xis, 12.0)
    want = L1_residual(glued_evaluator(bar), xis, 12.0, bar.outer.p, bar.outer.d)
    assert np.allclose(res, want, rtol=1e-10, atol=1e-14)
    assert np.all(scale > 0.0)


# -- domain guards ------------------------------------------------------------

def test_nonpositive_profile_rejected(p_ref, d_ref):
    def bad(gap, tau):
        z = np.zeros_like(np.asarray(gap, dtype=float))
        return z - 1.0, z, z, z

    with pytest.raises(errors.NonPositiveProfile):
        L0_residual(bad, np.array([1.0]), 8.0, p_ref, d_ref)


def test_mapped_evaluator_needs_positive_xi(outer_ref):
    ev = outer_as_inner_evaluator(outer_ref, "psi3", "+")
    with pytest.raises(errors.OutOfDomain):
        ev(np.array([-1.0]), 8.0)


def test_inner_closed_form_domain(solver_ref):
    bar = GluedBarrier(solver_ref, "-", 0.0, 10.0)
    with pytest.raises(errors.OutOfDomain):
        inner_residual_closed(bar, 10.5, 10.0)


# -- verdict classification ---------------------------------------------------

REGION = Region(kind="inner", tau_lo=1.0, tau_hi=2.0, xi1=5.0, xi_lo=-5.0)


def _const_terms(value):
    def terms(space, tau):
        r = np.full_like(space, value)
        return r, np.ones_like(space)

    return terms


def test_verdict_passes_on_clean_sign(p_ref, d_ref):
    rep = verify_sign_region(
        "L1", _const_terms(1.0), "+", REGION, p_ref, d_ref, n_space=50, n_tau=4
    )
    assert rep.passed
    assert rep.n_points == 200
    assert rep.n_violations == 0
    assert rep.n_inconclusive == 0
    assert rep.min_residual == rep.max_residual == 1.0
    rep_minus = verify_sign_region(
        "L1", _const_terms(-1.0), "-", REGION, p_ref, d_ref, n_space=50, n_tau=4
    )
    assert rep_minus.passed


def test_verdict_counts_violations(p_ref, d_ref):
    def terms(space, tau):
        r = np.ones_like(space)
        r[3] = -1e-3
        return r, np.ones_like(space)

    rep = verify_sign_region(
        "L1", terms, "+", REGION, p_ref, d_ref, n_space=50, n_tau=2
    )
    assert not rep.passed
    assert rep.n_violations == 2
    assert rep.worst_point[2] == pytest.approx(-1e-3)
    with pytest.raises(errors.VerdictViolated):
        verify_sign_region(
            "L1", terms, "+", REGION, p_ref, d_ref,
            n_space=50, n_tau=2, raise_on_fail=True,
        )


def test_verdict_counts_inconclusive(p_ref, d_ref):
    rep = verify_sign_region(
        "L1", _const_terms(0.0), "+", REGION, p_ref, d_ref, n_space=50, n_tau=2
    )
    assert not rep.passed
    assert rep.n_inconclusive == rep.n_points == 100
    assert rep.inconclusive_frac == 1.0
    assert rep.n_violations == 0


def test_verdict_rejects_bad_want(p_ref, d_ref):
    with pytest.raises(errors.InvalidParameter):
        verify_sign_region("L1", _const_terms(1.0), "up", REGION, p_ref, d_ref)


def test_report_to_dict_keys(p_ref, d_ref):
    rep = verify_sign_region(
        "L1", _const_terms(1.0), "+", REGION, p_ref, d_ref, n_space=10, n_tau=2
    )
    out = rep.to_dict()
    for key in ("operator", "kind", "want", "tau_window", "n_points",
                "n_violations", "n_inconclusive", "inconclusive_frac",
                "min_residual", "max_residual", "worst_point", "passed"):
        assert key in out


def test_region_defaults():
    region = Region(kind="inner", tau_lo=8.0, tau_hi=20.0)
    assert region.xi_lo == -7.0
    assert region.xi1 == 10.0
    assert region.delta0 == 0.25
    assert region.delta1 == 20.0
    assert region.far_cut == 2e4


def test_region_grid_construction(p_ref, d_ref):
    seen = {}

    def record(space, tau):
        seen.setdefault("grids", []).append(np.asarray(space))
        return np.ones_like(space), np.ones_like(space)

    glued = Region(kind="inner_glued", tau_lo=10.0, tau_hi=12.0,
                   xi1=10.0, delta1=20.0, xi_lo=-7.0)
    verify_sign_region("L1", record, "+", glued, p_ref, d_ref,
                       n_space=101, n_tau=2)
    for grid in seen["grids"]:
        assert grid.min() >= -7.0
        assert grid.max() <= 30.0
        assert np.all(np.abs(grid - 10.0) > 1e-10)  # corner excluded


def test_empty_near_a_band_rejected(p_ref, d_ref):
    # xi0 e^{-gamma tau} above delta0 leaves no band to sample
    region = Region(kind="near_A", tau_lo=0.0, tau_hi=1.0, xi0=1.0, delta0=0.25)
    with pytest.raises(errors.InvalidParameter):
        verify_sign_region("L0", _const_terms(1.0), "+", region, p_ref, d_ref)


def test_unknown_region_kind_rejected(p_ref, d_ref):
    region = Region(kind="everywhere", tau_lo=1.0, tau_hi=2.0)
    with pytest.raises(errors.InvalidParameter):
        verify_sign_region("L0", _const_terms(1.0), "+", region, p_ref, d_ref)


# -- threshold search ---------------------------------------------------------

def test_minus_thresholds_reference(thresholds_minus_ref):
    th = thresholds_minus_ref
    assert th["variant"] == "psi3"
    assert th["sign"] == "-"
    assert th["tau_start"] == 10.0
    assert th["xi0"] == 2.0
    assert th["delta0"] == 0.25
    assert th["ladder_steps"] == 5
    assert th["reports"]["near_A"].passed
    assert th["reports"]["far_field"].passed


def test_minus_thresholds_low_gamma(thresholds_minus_low):
    th = thresholds_minus_low
    assert th["variant"] == "psi4"
    assert th["tau_start"] == pytest.approx(11.150347630467653, rel=1e-12)
    assert th["xi0"] == 2.0
    assert th["delta0"] == 0.25
    assert th["ladder_steps"] == 5


def test_plus_near_corner_passes_at_base_rung(outer_ref):
    th = find_thresholds(outer_ref, "psi3", "+", regions=("near_A",))
    assert th["tau_start"] == 10.0
    assert th["xi0"] == 1.0
    assert th["delta0"] == 0.25
    assert th["ladder_steps"] == 1


def test_plus_far_field_exhausts_ladder(outer_ref):
    # the supersolution verdict cannot hold in the far field; the ladder
    # must exhaust instead of reporting a spurious pass
    with pytest.raises(errors.ThresholdSearchExhausted):
        find_thresholds(
            outer_ref, "psi3", "+",
            tau_doublings=1, xi_doublings=1, delta_halvings=1,
        )


def test_xi0_lower_bound_respected():
    # strong theta1 forces the corner margin out to sqrt((n-1)|theta1|/a0)
    p = make_params(3, 0.1, 1.5, 2.0, theta1_minus=-30.0)
    out = OuterProfileSet(p)
    bound = math.sqrt((p.n - 1) * 30.0 / out.d.a0)
    th = find_thresholds(out, "psi3", "-", regions=("near_A",))
    assert th["xi0"] >= bound
    assert th["xi0"] == pytest.approx(2.0 * bound, rel=1e-12)
