import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kzlindblad import analytic as an
from kzlindblad.errors import PreconditionError
from kzlindblad.lindblad import DissipationConfig, evolve_mode
from kzlindblad.models import BlochVector, Haldane, QuenchProtocol, RiceMele, Shockley, bloch_vector, critical_modes

RM = RiceMele()
SQ3 = math.sqrt(3)


def kz(tau):
    return 1 / (2 * math.pi * math.sqrt(tau))


# --- single-mode imbalance -------------------------------------------------

def test_rq_full_excitation_at_critical_mode():
    assert an.rq_isolated(BlochVector(0, 0, -2.0), 50.0) == pytest.approx(1.0)


def test_rq_adiabatic_limit():
    b = bloch_vector(RM, 0.8, -2.0)
    u, _, _ = an.bogoliubov(b)
    assert an.rq_isolated(b, 1e6) == pytest.approx(2 * abs(u) ** 2 - 1, abs=1e-12)


def test_rq_uniform_loss_limits():
    pr = QuenchProtocol(2.0, -2.0, 50.0)
    b = bloch_vector(RM, 0.05, -2.0)
    assert an.rq_uniform_loss(b, pr, DissipationConfig()) == an.rq_isolated(b, 50.0)
    assert abs(an.rq_uniform_loss(b, pr.with_tau(1e4), DissipationConfig(0.05, 0.05))) < 1e-12
    with pytest.raises(PreconditionError):
        an.rq_uniform_loss(b, pr, DissipationConfig(0.1, 0.0))


def test_rq_uniform_loss_matches_ode():
    pr = QuenchProtocol(2.0, -2.0, 50.0)
    d = DissipationConfig(0.05, 0.05)
    tr = evolve_mode(RM, 0.05, pr, d)
    assert abs(tr.final.imbalance - an.rq_uniform_loss(bloch_vector(RM, 0.05, -2.0), pr, d)) < 1e-2


# --- Rice-Mele densities ---------------------------------------------------

@pytest.mark.parametrize("tau", [10.0, 100.0, 1000.0])
def test_n_isolated(tau):
    assert an.n_closed_form(RM, QuenchProtocol(2, -2, tau), DissipationConfig()) == pytest.approx(kz(tau))


def test_n_linear_growth_for_weak_loss():
    pr = QuenchProtocol(2.0, -2.0, 100.0)
    d = DissipationConfig(5e-6, 5e-6)
    x = pr.u_bar * d.gamma * pr.tau_Q
    expect = kz(100) * (1 - x) + x / 2
    assert an.n_closed_form(RM, pr, d) == pytest.approx(expect, abs=x**2)  # first order in x


def test_n_lossless_b_limit():
    pr = QuenchProtocol(2.0, -2.0, 400.0)
    d = DissipationConfig(0.08, 0.0)
    assert an.n_closed_form(RM, pr, d) - 0.5 == pytest.approx(1 / (4 * math.pi * 20), rel=1e-12)


@given(st.floats(1, 500), st.floats(0, 0.2), st.floats(1e-4, 0.1))
def test_n_monotone_in_gamma_toward_half(tau, g, dg):
    pr = QuenchProtocol(2.0, -2.0, tau)
    n1 = an.n_closed_form(RM, pr, DissipationConfig(g / 2, g / 2))
    n2 = an.n_closed_form(RM, pr, DissipationConfig((g + dg) / 2, (g + dg) / 2))
    assert n1 <= n2 + 1e-15 <= 0.5 + 1e-15


def test_closed_forms_need_normalized_rice_mele():
    with pytest.raises(PreconditionError):
        an.n_closed_form(RiceMele(1, 1), QuenchProtocol(2, -2, 10), DissipationConfig())
    with pytest.raises(PreconditionError):
        an.no_jump_n(Shockley(), QuenchProtocol(2, -2, 10), DissipationConfig())


def test_fermion_density_isolated():
    n, na, nb = an.fermion_density_closed_form(RM, QuenchProtocol(2, -2, 30), DissipationConfig())
    assert n == 1.0
    na_gs, nb_gs = an.ground_state_sublattice_densities(RM, -2.0)
    assert na == pytest.approx(na_gs - kz(30)) and nb == pytest.approx(nb_gs + kz(30))


def test_fermion_density_lossless_b():
    pr = QuenchProtocol(2.0, -2.0, 800.0)
    n, na, nb = an.fermion_density_closed_form(RM, pr, DissipationConfig(0.08, 0.0))
    assert n == pytest.approx(kz(800), rel=1e-12)
    assert na < 1e-50 and nb == pytest.approx(n)


@given(st.floats(1, 500), st.floats(0, 0.3), st.floats(0, 0.3))
def test_fermion_density_sums(tau, ga, gb):
    n, na, nb = an.fermion_density_closed_form(RM, QuenchProtocol(2, -2, tau), DissipationConfig(ga, gb))
    assert abs(n - (na + nb)) < 1e-12


def test_ground_state_occupations_at_large_negative_u():
    na, nb = an.ground_state_sublattice_densities(RM, -1e6)
    assert na == pytest.approx(1.0, abs=1e-6) and nb == pytest.approx(0.0, abs=1e-6)


def test_no_jump_density():
    pr = QuenchProtocol(2.0, -2.0, 300.0)
    assert an.no_jump_n(RM, pr, DissipationConfig()) == pytest.approx(kz(300))
    assert an.no_jump_n(RM, pr, DissipationConfig(0.08, 0)) == pytest.approx(kz(300))
    gap = an.n_closed_form(RM, pr, DissipationConfig(0.08, 0)) - an.no_jump_n(RM, pr, DissipationConfig(0.08, 0))
    assert gap == pytest.approx(0.5 - 1 / (4 * math.pi * math.sqrt(300)), rel=1e-12)


# --- KZ and pKZ ------------------------------------------------------------

def test_exponents():
    assert an.kz_exponent(1) == 0.5 and an.kz_exponent(2) == 1.0


def test_pkz_rice_mele_value():
    d = DissipationConfig(0.0, 0.1)
    pr = QuenchProtocol(-2.0, -4.0, 100.0)  # gamma tau_Q = 10
    val = an.pkz_prediction(RM, "q=0", pr, d)
    assert val == pytest.approx(2 / math.sqrt(10 * math.pi), rel=1e-12)
    assert val == pytest.approx(0.3568, abs=1e-4)


def test_pkz_plateau_limit():
    d = DissipationConfig(0.0, 0.1)
    pr = QuenchProtocol(-2.0, -1e9, 100.0)
    assert an.pkz_prediction(RM, "q=0", pr, d) == pytest.approx(an.pkz_plateau(pr, d), rel=1e-8)
    assert an.pkz_plateau(pr, d) == pytest.approx(math.sqrt(2) / math.sqrt(math.pi * 10))


def test_pkz_time_resolved_endpoints():
    d = DissipationConfig(0.0, 0.1)
    pr = QuenchProtocol(-2.0, -6.0, 500.0)
    t = np.array([pr.t_f / 2, pr.t_f])
    vals = an.pkz_prediction(RM, "q=0", pr, d, t=t)
    assert vals[1] == pytest.approx(an.pkz_prediction(RM, "q=0", pr, d))
    assert vals[0] == pytest.approx(an.pkz_prediction(RM, "q=0", QuenchProtocol(-2, -4, 500.0), d))


@pytest.mark.parametrize("ui,uf", [(-2.0, -4.0), (-3.0, -10.0), (-2.0, -60.0)])
def test_pkz_agrees_with_exact_factor_far_from_criticality(ui, uf):
    d = DissipationConfig(0.0, 0.1)  # |u_i|, |u_f| >= 20 gamma
    pr = QuenchProtocol(ui, uf, 200.0)
    (mode,) = critical_modes(RM)
    assert an.pkz_prediction(RM, mode, pr, d) == pytest.approx(an.exact_f_density(RM, mode, pr, d), rel=1e-2)


def test_kz_agrees_with_exact_factor_for_wide_window():
    d = DissipationConfig(0.04, 0.0)
    pr = QuenchProtocol(20.0, -20.0, 400.0)
    (mode,) = critical_modes(RM)
    assert an.kz_prediction(RM, pr, d).value == pytest.approx(an.exact_f_density(RM, mode, pr, d), rel=1e-2)


def test_pkz_preconditions():
    with pytest.raises(PreconditionError):
        an.pkz_prediction(RM, "q=0", QuenchProtocol(2, -2, 10), DissipationConfig(0.1, 0))
    with pytest.raises(PreconditionError):
        an.pkz_prediction(RM, "q=0", QuenchProtocol(-2, -4, 10), DissipationConfig(0.1, 0))
    with pytest.raises(PreconditionError):
        an.pkz_prediction(RM, "q=0", QuenchProtocol(-2, -4, 10), DissipationConfig(0.1, 0.1))


def test_kz_rice_mele():
    p = an.kz_prediction(RM, QuenchProtocol(2, -2, 100), DissipationConfig(0.08, 0))
    assert p.formula_id == "KZ[q=0]"
    assert p.exponent == 0.5 and p.prefactor == pytest.approx(1 / (2 * math.pi))
    assert p.value == pytest.approx(kz(100))


def test_kz_shockley_table():
    m = Shockley(0.5, 0.5)
    up, down = DissipationConfig(0.1, 0), DissipationConfig(0, 0.1)
    tau = 400.0
    p1 = an.kz_prediction(m, QuenchProtocol(3, -3, tau), up)
    assert p1.value == pytest.approx(2 * kz(tau)) and p1.formula_id == "KZ[0]+KZ[pi]"
    p2 = an.kz_prediction(m, QuenchProtocol(0, -3, tau), up)
    assert p2.value == pytest.approx(kz(tau)) and p2.formula_id == "KZ[pi]"
    p2m = an.kz_prediction(m, QuenchProtocol(0, -3, tau), down)
    assert p2m.formula_id == "pKZ[0]"
    assert p2m.value == pytest.approx(an.pkz_prediction(m, "0", QuenchProtocol(0, -3, tau), down))
    p3 = an.kz_prediction(m, QuenchProtocol(3, 0, tau), up)
    assert p3.formula_id == "KZ[0]+pKZ[pi]"
    assert p3.value == pytest.approx(kz(tau) + an.pkz_prediction(m, "pi", QuenchProtocol(3, 0, tau), up))


def test_kz_haldane_crossing_odd_corners():
    p = an.kz_prediction(Haldane(), QuenchProtocol(6.0, 0.0, 100.0), DissipationConfig(0.5, 0))
    assert p.terms["KZ[odd]"] == pytest.approx(1 / (2 * SQ3 * math.pi**2 * 100))
    assert p.terms["KZ[odd]"] == pytest.approx(2.924e-4, rel=1e-3)
    assert p.exponent == 1.0


def test_pkz_haldane_prefactor():
    d = DissipationConfig(0.0, 0.5)
    pr = QuenchProtocol(0.0, -6.0, 200.0)
    uc = 3 * SQ3 / 2
    x = 1 / (-6 - uc) - 1 / (0 - uc)
    expect = 2 / (SQ3 * math.pi * d.gamma * pr.tau_Q * x)
    assert an.pkz_prediction(Haldane(), "odd", pr, d) == pytest.approx(expect, rel=1e-12)
    p = an.kz_prediction(Haldane(), pr, d)
    assert p.formula_id == "pKZ[odd]" and p.value == pytest.approx(expect)


def test_kz_no_eligible_corner():
    p = an.kz_prediction(RM, QuenchProtocol(2, -2, 100), DissipationConfig(0, 0.1))
    assert p.formula_id == "none" and p.value == 0.0


def test_regime_warning_flag():
    assert an.kz_prediction(RM, QuenchProtocol(2, -2, 100), DissipationConfig(0.1, 0)).regime_warning
    assert not an.kz_prediction(RM, QuenchProtocol(6, -6, 100), DissipationConfig(0.1, 0)).regime_warning


# --- g and h ---------------------------------------------------------------

def test_gh_reference_values():
    d = DissipationConfig(0.1, 0)
    g, h = an.gh_functions(np.array([0.0, 2.0]), 120.0, 30.0, d)
    assert (g[0], h[0]) == (1.0, -1.0)
    assert abs(g[1]) < 1e-100 and abs(h[1]) < 1e-100
    with pytest.raises(PreconditionError):
        an.gh_functions(0.0, 120.0, 30.0, DissipationConfig(0.05, 0.05))
