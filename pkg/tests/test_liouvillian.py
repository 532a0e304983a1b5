import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import linalg

from kzlindblad import liouvillian as lv
from kzlindblad.errors import PreconditionError
from kzlindblad.lindblad import DissipationConfig, ModeState, evolve_modes, rhs
from kzlindblad.models import BlochVector, QuenchProtocol, RiceMele, Shockley
from kzlindblad.validation import _multiset_distance, check_eigenvalues_vs_rhs, check_spectrum

real = st.floats(-5, 5)
rate = st.floats(0, 1)


@st.composite
def inputs(draw):
    mod, ph = draw(st.floats(0, 2)), draw(st.floats(0, 2 * math.pi))
    # subnormal entries break LU-based determinants in the oracle, not the closed form
    comps = [x if abs(x) > 1e-300 else 0.0 for x in (mod * math.cos(ph), mod * math.sin(ph), draw(real))]
    b = BlochVector(*comps)
    rates = [x if x > 1e-300 else 0.0 for x in (draw(rate), draw(rate))]
    return b, DissipationConfig(*rates)


def test_assemble_matches_rhs(rng):
    for _ in range(1000):
        s = ModeState(*rng.uniform(0, 1, 4), complex(*rng.uniform(-1, 1, 2)))
        b = BlochVector(*rng.uniform(-3, 3, 3))
        d = DissipationConfig(*rng.uniform(0, 1, 2))
        np.testing.assert_allclose(lv.assemble(b, d) @ lv.vectorize(s), lv.vectorize(rhs(s, b, d)),
                                   atol=1e-12)


def test_closed_system_without_tunnelling_is_diagonal():
    L = lv.assemble(BlochVector(0, 0, 1.7), DissipationConfig())
    assert np.count_nonzero(L - np.diag(np.diag(L))) == 0
    np.testing.assert_allclose(sorted(np.diag(L).imag), [-3.4, 0, 0, 0, 0, 3.4])


@given(inputs())
def test_matrix_trace_and_column_sums(bd):
    b, d = bd
    L = lv.assemble(b, d)
    assert np.trace(L) == pytest.approx(-3 * d.gamma, abs=1e-12)
    np.testing.assert_allclose(L[:4, :4].sum(axis=0), 0, atol=1e-12)


@given(inputs())
def test_vacuum_is_steady(bd):
    b, d = bd
    assert np.max(np.abs(lv.assemble(b, d) @ lv.vectorize(ModeState(1, 0, 0, 0, 0j)))) < 1e-12


def test_spectrum_at_equal_loss_without_tunnelling():
    d = DissipationConfig(0.2, 0.2)
    spec = lv.eigenvalues_closed_form(BlochVector(0, 0, 0.9), d)
    assert spec.lambda1_plus == pytest.approx(-0.2) and spec.lambda1_minus == pytest.approx(-0.2)
    assert spec.lambda2_plus == pytest.approx(-0.2 + 1.8j)
    assert spec.lambda2_minus == pytest.approx(-0.2 - 1.8j)
    assert spec.lambda3 == pytest.approx(-0.4)
    num = linalg.eigvals(lv.assemble(BlochVector(0, 0, 0.9), d))
    assert _multiset_distance(num, spec.values()) < 1e-12


@given(inputs())
def test_eigenvalue_sum_equals_trace(bd):
    b, d = bd
    assert lv.eigenvalues_closed_form(b, d).values().sum() == pytest.approx(-3 * d.gamma, abs=1e-9)


@given(inputs())
def test_characteristic_polynomial_residual(bd):
    b, d = bd
    L = lv.assemble(b, d)
    norm = np.linalg.norm(L, 2)
    for lam in lv.eigenvalues_closed_form(b, d).values():
        assert abs(np.linalg.det(L - lam * np.eye(6))) < 1e-8 * max(norm, 1.0) ** 6


@given(inputs())
def test_ordering_and_signs(bd):
    b, d = bd
    s = lv.eigenvalues_closed_form(b, d)
    assert s.lambda0 == 0
    assert s.lambda1_plus.imag == 0 and s.lambda1_minus.imag == 0
    assert s.B >= s.A * s.A * (1 - 4e-16)
    chain = [s.lambda0.real, s.lambda1_plus.real, s.lambda2_plus.real, s.lambda1_minus.real, s.lambda3.real]
    assert all(x >= y - 1e-12 for x, y in zip(chain, chain[1:]))
    assert s.lambda2_plus == np.conj(s.lambda2_minus)
    assert np.all(s.values().real <= 0)


def test_sorted_is_deterministic():
    s = lv.eigenvalues_closed_form(BlochVector(0.3, 0.1, 0.5), DissipationConfig(0.2, 0.1))
    v = s.sorted()
    assert v[0] == 0 and np.all(np.diff(v.real) <= 0)


def test_closed_form_spectrum_random_draws():
    res = check_spectrum(count=2000, seed=7)
    assert res.passed, res.line()


def test_closed_form_spectrum_against_rhs_generator():
    res = check_eigenvalues_vs_rhs(count=300, seed=8)
    assert res.passed, res.line()


# --- gap -------------------------------------------------------------------

@pytest.mark.parametrize("mod", [0.01, 0.05, 0.1])
def test_gap_at_crossing_lld(mod):
    g = 1.0
    d = DissipationConfig(g, 0)
    b = BlochVector(mod, 0, 0)
    # leading order in |Delta|; the next term is smaller by (4|Delta|/gamma)^2
    assert lv.spectral_gap(b, d) == pytest.approx(4 * mod**2 / g, rel=(4 * mod / g) ** 2)
    assert lv.gap_expansion(b, d) == pytest.approx(4 * mod**2 / g, rel=1e-12)


def test_gap_far_from_crossing_lld():
    g, mod, dz = 0.1, 0.05, 4.0
    d = DissipationConfig(0, g)
    b = BlochVector(0, mod, dz)
    assert lv.spectral_gap(b, d) == pytest.approx(g * mod**2 / (4 * dz**2), rel=1e-3)


def test_gap_equal_loss_no_tunnelling():
    d = DissipationConfig(0.15, 0.15)
    assert lv.spectral_gap(BlochVector(0, 0, 0.7), d) == pytest.approx(0.15)
    assert lv.gap_expansion(BlochVector(0, 0, 0.7), d) == pytest.approx(0.15)


@given(inputs())
def test_gap_nonnegative(bd):
    b, d = bd
    assert lv.spectral_gap(b, d) >= 0


def test_gap_factor_limits():
    d = DissipationConfig(0.08, 0)
    f = lv.gap_integral(RiceMele(), 0.0, QuenchProtocol(2.0, -2.0, 10.0), d).f
    assert f == pytest.approx(2 * math.atan(100), rel=1e-12)
    assert f == pytest.approx(3.1216, abs=1e-4)
    wide = lv.gap_integral(RiceMele(), 0.0, QuenchProtocol(1e7, -1e7, 1.0), d).f
    assert wide == pytest.approx(math.pi, rel=1e-6)
    far = lv.gap_integral(RiceMele(), 0.0, QuenchProtocol(-40.0, -80.0, 1.0), d).f
    assert far == pytest.approx((d.gamma / 4) * (1 / -80 - 1 / -40), rel=1e-4)


def test_gap_integral_uses_corner_offset():
    d = DissipationConfig(0.1, 0)
    pr = QuenchProtocol(3.0, -3.0, 100.0)
    gi = lv.gap_integral(Shockley(), math.pi, pr, d)
    expect = math.atan(4 * (3 + 1) / 0.1) - math.atan(4 * (-3 + 1) / 0.1)
    assert gi.f == pytest.approx(expect)
    assert gi.exponent == pytest.approx(0.0, abs=1e-20)  # Delta vanishes at pi


def test_gap_integral_requires_lld():
    with pytest.raises(PreconditionError):
        lv.gap_integral(RiceMele(), 0.1, QuenchProtocol(2, -2, 10), DissipationConfig(0.1, 0.1))


@pytest.mark.parametrize("q", [0.01, 0.03, 0.06, 0.1])
@pytest.mark.parametrize("rates", [(0.08, 0.0), (0.0, 0.2)])
def test_gap_integral_matches_quadrature(q, rates):
    m = RiceMele()
    d = DissipationConfig(*rates)
    pr = QuenchProtocol(2.0, -2.0, 100.0)
    gi = lv.gap_integral(m, q, pr, d)
    quad = lv.integrated_gap(m, q, pr, d, kind="expansion")
    assert gi.exponent == pytest.approx(quad, rel=1e-6)


def test_exact_gap_integral_close_to_expansion_when_weakly_coupled():
    # with 4|Delta| well below gamma the exact gap tracks the expansion
    m = RiceMele()
    d = DissipationConfig(1.0, 0.0)
    pr = QuenchProtocol(2.0, -2.0, 100.0)
    q = 0.02
    exact = lv.integrated_gap(m, q, pr, d, kind="exact")
    assert exact == pytest.approx(lv.gap_integral(m, q, pr, d).exponent, rel=2e-2)


# --- long-time propagator --------------------------------------------------

def test_long_time_state_vacuum_when_start_is_lossy():
    pr = QuenchProtocol(2.0, -2.0, 300.0)
    s = lv.lld_long_time_state(RiceMele(), 0.1, pr, DissipationConfig(0, 0.1))
    assert s == ModeState(1.0, 0.0, 0.0, 0.0, 0j)
    _, y = evolve_modes(RiceMele(), np.array([0.1]), pr, DissipationConfig(0, 0.1))
    assert y[0, -1, 1] + y[0, -1, 2] + 2 * y[0, -1, 3] < 1e-6


def test_long_time_state_sublattice_selection():
    pr = QuenchProtocol(-2.0, -4.0, 200.0)
    s = lv.lld_long_time_state(RiceMele(), 0.1, pr, DissipationConfig(0, 0.1))
    assert s.rho22 > 0 and s.rho33 == 0
    pr = QuenchProtocol(2.0, -2.0, 200.0)
    s = lv.lld_long_time_state(RiceMele(), 0.1, pr, DissipationConfig(0.1, 0))
    assert s.rho33 > 0 and s.rho22 == 0


@pytest.mark.parametrize("tau", [250.0, 500.0])
def test_long_time_state_matches_ode(tau):
    m = RiceMele()
    d = DissipationConfig(0.08, 0.0)  # gamma tau_Q >= 20
    pr = QuenchProtocol(2.0, -2.0, tau)
    qs = np.array([0.01, 0.05, 0.1, 0.2])
    _, y = evolve_modes(m, qs, pr, d)
    for k, q in enumerate(qs):
        ref = lv.lld_long_time_state(m, float(q), pr, d)
        n_ode = y[k, -1, 1] + y[k, -1, 2] + 2 * y[k, -1, 3]
        n_ref = ref.rho22 + ref.rho33
        assert n_ode == pytest.approx(n_ref, rel=0.02, abs=1e-9)


def test_long_time_state_requires_lld():
    with pytest.raises(PreconditionError):
        lv.lld_long_time_state(RiceMele(), 0.1, QuenchProtocol(2, -2, 10), DissipationConfig(0.1, 0.05))
