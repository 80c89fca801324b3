import inspect
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from freelunch import (
    BrownianConstant,
    DomainError,
    EXPONENTIAL,
    FbmMovingAverage,
    FbmSottinen,
    GridSpec,
    HypothesisViolated,
    MarketSpec,
    MixedBm,
    NonDifferenceKernel,
    OrnsteinUhlenbeck,
    Rogers,
    Tabulated,
    Verdict,
    beta,
    check_theorem_L,
    esssup_xy,
    essinf_z,
    expected_return_on_event,
    flvr_scan,
    gamma,
    integral_criterion,
    lambda_bar,
    law_degenerate,
    law_from_atoms,
    law_rademacher,
    law_two_point,
    min_arbitrage_steps_fbm,
    search_arbitrage,
    single_period_return,
    symmetric_criterion,
    transaction_cost_bound,
)
from freelunch.lunch import certificate_at, lambda_bar_scan, scan_rows

R = law_rademacher()
OU = OrnsteinUhlenbeck(kappa0=1.0, v=1.0)
FBM95 = FbmMovingAverage(H=0.95)
SIGN_CHANGING = Tabulated(theta=(0.0, 0.5, 1.0, 2.0), values=(0.2, -0.6, 0.1, -0.3))
G1 = GridSpec(1, 0.5)


# -- gamma / beta ---------------------------------------------------------------


def test_gamma_signs():
    g = GridSpec(2, 0.5)
    j = g.j0 + 5
    assert {gamma(MarketSpec(BrownianConstant(), R), g, i, j) for i in range(g.j0, j)} == {1.0}
    assert {gamma(MarketSpec(FbmMovingAverage(H=0.75), R), g, i, j) for i in range(g.j0, j)} == {1.0}
    law = law_two_point(-2.0, 1.0)
    assert {gamma(MarketSpec(OU, law), g, i, j) for i in range(g.j0, j)} == {-2.0}
    with pytest.raises(DomainError):
        gamma(MarketSpec(OU, R), g, j, j)


def test_beta_signs():
    assert beta(MarketSpec(OU, R), G1, 3) == -1.0
    assert beta(MarketSpec(SIGN_CHANGING, R), GridSpec(2, 0.5), 3) == 1.0  # kappa(1/2) < 0
    assert beta(MarketSpec(OU, law_two_point(-2.0, 1.0)), G1, 3) == -2.0


# -- esssup / lambda_bar ---------------------------------------------------------


def test_esssup_at_entry_is_x():
    m = MarketSpec(OU, R, drift=lambda t: 3.0)
    value, witness = esssup_xy(m, GridSpec(4, 0.5), 2)
    assert value == 0.75 and witness.size == 0


@pytest.mark.parametrize("n", [1, 2, 4, 8])
def test_esssup_telescopes(n):
    g = GridSpec(n, 0.5)
    for kern in (OU, FbmMovingAverage(H=0.75), Rogers(k=1.0, v=1.0, H=0.3)):
        for h in (0, 1, 7, 30):
            value, _ = esssup_xy(MarketSpec(kern, R), g, g.j0 + h)
            closed = abs(kern.kappa((h + 1) / n) - kern.kappa(1 / n)) / math.sqrt(n)
            assert value == pytest.approx(closed, abs=1e-13)


@pytest.mark.parametrize("n", [1, 2, 4, 8])
def test_lambda_bar_brownian(n):
    g = GridSpec(n, 0.5)
    for h in range(20):
        assert lambda_bar(MarketSpec(BrownianConstant(), R), g, g.j0 + h) == -1 / math.sqrt(n)


def test_lambda_bar_fbm_five_steps():
    assert lambda_bar(MarketSpec(FBM95, R), G1, G1.j0 + 4) == pytest.approx(5**0.45 - 2, abs=1e-12)


def test_lambda_bar_ou_closed_form():
    m = MarketSpec(OU, R)
    for h in range(40):
        lb = lambda_bar(m, G1, G1.j0 + h)
        assert lb == pytest.approx(-math.exp(-(h + 1)), rel=1e-12)
        assert lb < 0


def test_lambda_bar_ou_sign_survives_cancellation():
    # the sum telescopes to -kappa((h+1)/n)/sqrt(n), far below the size of its terms
    m = MarketSpec(OU, R)
    g = GridSpec(4, 0.5)
    lbs = lambda_bar_scan(m, g, g.j0 + 200)
    assert np.all(lbs < 0)
    h = np.arange(201)
    assert lbs == pytest.approx(-np.exp(-(h + 1) / 4) / 2, rel=1e-9)


def test_scan_matches_pointwise():
    for kern in (OU, FbmMovingAverage(H=0.75), FbmSottinen(H=0.75), SIGN_CHANGING):
        m = MarketSpec(kern, law_two_point(-2.0, 1.0), drift=lambda t: 0.1 * t)
        g = GridSpec(2, 0.75)
        for j, lb, sup, z in scan_rows(m, g, g.j0 + 15):
            assert lb == pytest.approx(lambda_bar(m, g, j), abs=1e-14)
            assert sup == pytest.approx(esssup_xy(m, g, j)[0], abs=1e-14)
            assert z == essinf_z(m, g, j)


def test_certificate_replay():
    for kern in (FBM95, Rogers(k=1.0, v=1.0, H=0.75), SIGN_CHANGING, OU):
        for law in (R, law_two_point(-2.0, 1.0)):
            m = MarketSpec(kern, law, lam=0.01)
            for h in (0, 3, 9):
                cert = certificate_at(m, G1, G1.j0 + h)
                assert cert.lambda_bar == pytest.approx(cert.esssup_xy + cert.essinf_z, abs=1e-15)
                r = single_period_return(m, G1, cert.j_star, cert.witness, cert.worst_innovation)
                assert r == pytest.approx(cert.lambda_bar - 0.01, abs=1e-12)


# -- search --------------------------------------------------------------------


def test_search_brownian_none():
    cert = search_arbitrage(MarketSpec(BrownianConstant(), R), GridSpec(4, 0.5), 300)
    assert cert.verdict is Verdict.NONE and not cert.found and cert.sell_step is None


def test_search_fbm_five_steps():
    cert = search_arbitrage(MarketSpec(FBM95, R), G1, 50)
    assert cert.found and cert.sell_step == G1.j0 + 5
    assert cert.witness == (1.0,) * 4 and cert.worst_innovation == -1.0


def test_search_boundary_verdict():
    cert = search_arbitrage(MarketSpec(FbmMovingAverage(H=0.75), R), G1, 100)
    assert cert.verdict is Verdict.BOUNDARY and cert.lambda_bar == 0.0
    assert cert.sell_step == G1.j0 + 16
    assert search_arbitrage(MarketSpec(FbmMovingAverage(H=0.75), law_degenerate()), G1, 100).verdict is Verdict.NONE


def test_search_rogers_strict():
    g = GridSpec(4, 0.5)
    cert = search_arbitrage(MarketSpec(Rogers(k=1.0, v=1.0, H=0.75), R, lam=0.01), g, g.j0 + 400)
    assert cert.verdict is Verdict.STRICT and cert.lambda_bar > 0.01


def test_semimartingale_style_tabulated_kernel_arbitrage():
    # kappa(0+) > 0 with an interior value above 2 kappa(0+)
    tab = Tabulated(theta=(0.0, 0.5, 1.0, 2.0, 3.0), values=(0.2, 0.6, 0.1, -0.3, 0.05))
    for n in (1, 2, 4, 16):
        g = GridSpec(n, 0.5)
        assert search_arbitrage(MarketSpec(tab, R), g, g.j0 + 40).found


@given(lams=st.lists(st.floats(0.0, 0.2), min_size=2, max_size=6))
@settings(max_examples=40, deadline=None)
def test_verdict_weakens_with_lambda(lams):
    rank = {Verdict.STRICT: 2, Verdict.BOUNDARY: 1, Verdict.NONE: 0}
    m = MarketSpec(FBM95, R)
    ranks = [rank[certificate_at(m, G1, G1.j0 + 6, lam).verdict] for lam in sorted(lams)]
    assert ranks == sorted(ranks, reverse=True)


def test_detectors_take_no_path_input():
    forbidden = {"xi", "history", "path", "rng", "seed", "innovation"}
    for fn in (lambda_bar, esssup_xy, essinf_z, search_arbitrage, certificate_at, flvr_scan, gamma, beta):
        assert forbidden.isdisjoint(inspect.signature(fn).parameters)


# -- integral criteria ------------------------------------------------------------


def test_integral_criterion_brownian_fails():
    res = integral_criterion(MarketSpec(BrownianConstant(), R), GridSpec(4, 0.5), 2.5)
    assert res.lhs == 0.0 and res.rhs == 1.0 and not res.holds


def test_integral_criterion_fbm_holds_for_large_n():
    kern = FbmMovingAverage(H=0.75)
    results = [integral_criterion(MarketSpec(kern, R), GridSpec(n, 0.5), 2.5) for n in (1, 4, 16, 64, 256)]
    assert not results[0].holds and results[-1].holds
    assert [r.rhs for r in results] == pytest.approx([kern.kappa(1 / n) for n in (1, 4, 16, 64, 256)])
    # lhs telescopes to kappa(T - t0) - kappa(T - s_{j*}) and tends to kappa(T - t0)
    assert results[-1].lhs == pytest.approx(kern.kappa(2.0) - kern.kappa(1 / 256), rel=1e-12)


def test_integral_criterion_sottinen_quadrature():
    res = integral_criterion(MarketSpec(FbmSottinen(H=0.75), R), GridSpec(8, 0.5), 1.5)
    assert res.lhs > 0 and res.rhs > 0
    assert not res.beyond_horizon


def test_integral_criterion_flags_incompatible_horizon():
    res = integral_criterion(MarketSpec(OU, R), GridSpec(4, 0.3), 1.0)
    assert res.j_star >= GridSpec(4, 0.3).j0


def test_symmetric_criterion_ou_never_positive():
    res = symmetric_criterion(MarketSpec(OU, R), GridSpec(4, 0.5), 120)
    h = np.arange(1, 121)
    assert res.values == pytest.approx(-np.exp(-h / 4), rel=1e-9, abs=1e-15)
    assert not res.holds


def test_symmetric_criterion_fbm_positive():
    assert symmetric_criterion(MarketSpec(FbmMovingAverage(H=0.75), R), GridSpec(4, 0.5), 200).holds


# -- theorem L -----------------------------------------------------------------


def test_theorem_L_records():
    fbm = check_theorem_L(FbmMovingAverage(H=0.75), R, [1, 2, 4, 8])
    assert fbm.condition1 and fbm.arbitrage
    bm = check_theorem_L(BrownianConstant(), R, [1, 2, 4, 8])
    assert not bm.condition1 and not bm.condition2 and not bm.arbitrage
    ou = check_theorem_L(OU, R, [1, 2, 4, 8])
    assert ou.total_variation == 1.0 and ou.variation_bound == 1.0 and not ou.arbitrage
    tab = check_theorem_L(SIGN_CHANGING, R, [1, 2])
    assert tab.sign_change and tab.condition1
    with pytest.raises(NonDifferenceKernel):
        check_theorem_L(FbmSottinen(H=0.75), R, [1])


def test_theorem_L_asymmetric_ratio():
    rec = check_theorem_L(OU, law_two_point(-2.0, 1.0), [1, 2])
    assert rec.law_ratio == 2.0 and rec.variation_bound == 2.0 and not rec.condition2


# -- minimum steps ---------------------------------------------------------------


@pytest.mark.parametrize("H,point_mass,expected", [(0.95, True, 5), (0.75, True, 16), (0.75, False, 17), (0.85, True, 8), (0.6, True, 1024), (0.6, False, 1025)])
def test_min_steps(H, point_mass, expected):
    assert min_arbitrage_steps_fbm(H, point_mass) == expected


def test_min_steps_domain():
    for H in (0.5, 1.0, 0.3):
        with pytest.raises(DomainError):
            min_arbitrage_steps_fbm(H)


# -- FLVR ----------------------------------------------------------------------


def test_expected_return_examples():
    assert expected_return_on_event(MarketSpec(OU, R), G1, G1.j0 + 2) == pytest.approx(
        math.exp(-1) - math.exp(-3), abs=1e-15
    )
    assert expected_return_on_event(MarketSpec(OU, R), G1, G1.j0 + 2) == pytest.approx(0.3180923728, abs=1e-10)
    m = MarketSpec(OU, law_degenerate(), drift=lambda t: 2.0)
    assert expected_return_on_event(m, GridSpec(2, 0.5), 4) == 1.0
    assert expected_return_on_event(MarketSpec(BrownianConstant(), R, drift=lambda t: 2.0), GridSpec(2, 0.5), 4) == 1.0


def test_expected_return_closed_form_with_mean():
    law = law_from_atoms([-1.0, 0.0, 1.0], [0.2, 0.3, 0.5])
    m = MarketSpec(OU, law)
    g = GridSpec(4, 0.5)
    for h in (1, 5, 20):
        k = OU.kappa
        closed = (law.m / 2) * (-k((h + 1) / 4) + k(1 / 4) * (1 + law.mean / law.m))
        assert expected_return_on_event(m, g, g.j0 + h) == pytest.approx(closed, abs=1e-14)


def test_flvr_ou():
    g = GridSpec(4, 0.5)
    rep = flvr_scan(MarketSpec(OU, R), g, g.j0 + 200)
    assert rep.all_met
    ratios = [e.ratio for e in rep.entries]
    assert all(e.expected_return > 0 for e in rep.entries)
    k = OU.kappa
    closed = [-k((e.j - g.j0 + 1) / 4) / (-k((e.j - g.j0 + 1) / 4) + k(1 / 4)) for e in rep.entries]
    assert ratios == pytest.approx(closed, rel=1e-9)
    first50 = ratios[:50]
    assert all(b > a for a, b in zip(first50, first50[1:]))
    assert all(r < 0 for r in ratios)


def test_flvr_fbm_h045():
    rep = flvr_scan(MarketSpec(FbmMovingAverage(H=0.45), R), G1, 4000, delta_targets=(2.0,))
    # kappa((h+1)) < (2/3) kappa(1) first at h + 1 > 1.5^20
    assert rep.targets[2.0] == G1.j0 + math.ceil(1.5**20) - 1
    assert rep.achieved_delta < 2.0


@pytest.mark.parametrize(
    "market,hypothesis",
    [
        (MarketSpec(BrownianConstant(), R), "inf_kappa_zero"),
        (MarketSpec(OU, R, lam=0.1), "zero_transaction_cost"),
        (MarketSpec(FbmSottinen(H=0.75), R), "difference_kernel"),
        (MarketSpec(OU, law_two_point(-2.0, 1.0)), "symmetric_support"),
        (MarketSpec(SIGN_CHANGING, R), "kappa_one_sign"),
        (MarketSpec(OU, law_from_atoms([-1.0, 1.0], [0.999, 0.001])), None),
    ],
)
def test_flvr_hypotheses(market, hypothesis):
    if hypothesis is None:
        flvr_scan(market, G1, 5)
        return
    with pytest.raises(HypothesisViolated) as exc:
        flvr_scan(market, G1, 5)
    assert exc.value.hypothesis == hypothesis


def test_flvr_support_separation():
    with pytest.raises(HypothesisViolated) as exc:
        flvr_scan(MarketSpec(OU, R), G1, 5, nu=1.0)
    assert exc.value.hypothesis == "support_separation"


# -- transaction-cost bound ----------------------------------------------------------


def test_transaction_cost_bound():
    assert transaction_cost_bound("identity", 0.3, 0.1, 1.0, 0.0) == pytest.approx(0.1, abs=1e-15)
    assert transaction_cost_bound(EXPONENTIAL, 0.0, 0.1, 1.0, 0.0) == pytest.approx(0.1051709181, abs=1e-10)
    assert transaction_cost_bound("exponential", 0.0, 0.1, 0.5, 0.5) == pytest.approx(math.expm1(0.1), rel=1e-14)
    with pytest.raises(DomainError):
        transaction_cost_bound("identity", 0.0, 0.1, 0.0, 0.0)
    with pytest.raises(DomainError):
        transaction_cost_bound("identity", 0.0, -0.1, 1.0, 0.0)
