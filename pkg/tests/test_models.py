import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kzlindblad.errors import DomainError, SingularPointError
from kzlindblad.models import (
    CELL_AREA,
    LATTICE_BASIS,
    BlochVector,
    Haldane,
    QuenchProtocol,
    RiceMele,
    Shockley,
    bloch_components,
    bloch_vector,
    bogoliubov,
    brillouin_zone_measure,
    bz_grid,
    critical_modes,
    haldane_corners,
    winding_number,
)

SQ3 = math.sqrt(3)
finite = st.floats(-5, 5, allow_nan=False)


# --- bloch_vector -----------------------------------------------------------

def test_rice_mele_closes_at_origin():
    b = bloch_vector(RiceMele(1, -1), 0.0, 0.0)
    assert (b.dx, b.dy, b.dz) == pytest.approx((0, 0, 0), abs=1e-15)


def test_shockley_closes_at_pi_for_negative_critical_u():
    b = bloch_vector(Shockley(0.5, 0.5), math.pi, -1.0)
    assert (b.dx, b.dy, b.dz) == pytest.approx((0, 0, 0), abs=1e-15)


def test_haldane_first_corner_closes_at_positive_critical_u():
    q1 = haldane_corners()[0]
    b = bloch_vector(Haldane(), q1, 3 * SQ3 / 2)
    assert abs(b.dz) < 1e-12
    assert abs(b.delta) < 1e-12


def test_haldane_corner_sets_close_at_opposite_u():
    m = Haldane()
    corners = haldane_corners()
    _, _, off = bloch_components(m, corners)
    uc = 3 * SQ3 * m.t2
    np.testing.assert_allclose(off[0::2], -uc, atol=1e-12)  # odd corners q1, q3, q5
    np.testing.assert_allclose(off[1::2], uc, atol=1e-12)
    dx, dy, _ = bloch_components(m, corners)
    np.testing.assert_allclose(np.hypot(dx, dy), 0, atol=1e-12)


def test_momentum_outside_zone_is_rejected():
    with pytest.raises(DomainError):
        bloch_vector(RiceMele(), 4.0, 0.0)
    with pytest.raises(DomainError):
        bloch_vector(Haldane(), np.array([20.0, 0.0]), 0.0)


def test_shockley_rejects_negative_hopping():
    with pytest.raises(DomainError):
        Shockley(-0.1, 0.5)


@given(st.floats(-math.pi, math.pi), st.floats(-6, 6), st.floats(-6, 6))
def test_omega_nonnegative_and_continuous_in_u(q, u, du):
    du = du * 1e-6
    for m in (RiceMele(), Shockley()):
        w1 = bloch_vector(m, q, u).omega
        w2 = bloch_vector(m, q, u + du).omega
        assert w1 >= 0
        assert abs(w2 - w1) <= abs(du) + 1e-12


# --- bogoliubov -------------------------------------------------------------

def test_bogoliubov_positive_dz():
    u, v, w = bogoliubov(BlochVector(0, 0, 2.0))
    assert u == pytest.approx(1) and v == pytest.approx(0) and w == 2.0


def test_bogoliubov_negative_dz():
    u, v, w = bogoliubov(BlochVector(0, 0, -2.0))
    assert abs(u) == pytest.approx(0) and abs(v) == pytest.approx(1) and w == 2.0


def test_bogoliubov_symmetric_point():
    u, v, _ = bogoliubov(BlochVector(1, 0, 0))
    assert abs(u) ** 2 == pytest.approx(0.5) and abs(v) ** 2 == pytest.approx(0.5)


def test_bogoliubov_gapless_raises():
    with pytest.raises(SingularPointError):
        bogoliubov(BlochVector(0, 0, 0))


def test_bogoliubov_normalized_on_random_inputs(rng):
    for dx, dy, dz in rng.uniform(-5, 5, (10_000, 3)):
        u, v, _ = bogoliubov(BlochVector(dx, dy, dz))
        assert abs(abs(u) ** 2 + abs(v) ** 2 - 1) < 1e-12


@given(finite, finite, finite)
def test_bogoliubov_diagonalizes(dx, dy, dz):
    b = BlochVector(dx, dy, dz)
    if b.omega < 1e-6:
        return
    u, v, w = bogoliubov(b)
    h = np.array([[dz, dx - 1j * dy], [dx + 1j * dy, -dz]])
    # eta_1 = u c_a + v c_b annihilates the upper-band state (conj(u), conj(v))
    upper = np.array([np.conj(u), np.conj(v)])
    np.testing.assert_allclose(h @ upper, w * upper, atol=1e-10 * max(1, w))


# --- critical modes ---------------------------------------------------------

def test_rice_mele_critical_mode():
    (m,) = critical_modes(RiceMele(1, -1))
    assert (m.q, m.u_c, m.slope) == (0.0, 0.0, 1.0)


def test_shockley_critical_modes():
    modes = critical_modes(Shockley(0.5, 0.5))
    assert [(m.q, m.u_c, m.slope) for m in modes] == [(0.0, 1.0, 1.0), (math.pi, -1.0, 1.0)]


def test_haldane_critical_modes():
    modes = critical_modes(Haldane())
    assert len(modes) == 6
    assert sum(m.weight for m in modes) == pytest.approx(2.0)
    for m in modes:
        assert abs(m.u_c) == pytest.approx(3 * SQ3 / 2)
        assert (m.u_c > 0) == (m.label == "odd")


@pytest.mark.parametrize("model", [RiceMele(), Shockley(), Shockley(0.3, 0.7)])
def test_slopes_match_finite_differences_1d(model):
    h = 1e-5
    for mode in critical_modes(model):
        dx, dy, _ = bloch_components(model, np.array([mode.q - h, mode.q + h]))
        mod = np.hypot(dx, dy)
        # |Delta| has a kink at q_c; average the one-sided slopes
        assert abs(mod.mean() / h - mode.slope) < 1e-6


def test_haldane_slope_matches_finite_differences():
    m = Haldane()
    h = 1e-6
    for mode in critical_modes(m):
        q = np.asarray(mode.q)
        for ang in np.linspace(0, 2 * np.pi, 7):
            dq = h * np.array([math.cos(ang), math.sin(ang)])
            dx, dy, _ = bloch_components(m, q + dq)
            assert abs(math.hypot(dx, dy) / h - mode.slope) < 1e-5


# --- winding number ---------------------------------------------------------

def test_winding_trivial_and_topological():
    m = Shockley(0.5, 0.5)
    assert winding_number(m, 2.0) == 0
    assert winding_number(m, 0.0) == 1


def test_winding_on_critical_point_raises():
    with pytest.raises(SingularPointError):
        winding_number(Shockley(0.5, 0.5), 1.0)


@given(st.floats(-3, 3).filter(lambda u: abs(abs(u) - 1) > 1e-3))
def test_winding_stable_under_refinement(u):
    m = Shockley(0.5, 0.5)
    ref = winding_number(m, u, 256)
    assert winding_number(m, u, 512) == ref
    assert winding_number(m, u, 2048) == ref


# --- grids and protocol -----------------------------------------------------

def test_grid_rice_mele_four_points():
    g = bz_grid(RiceMele(), 4)
    np.testing.assert_allclose(g.momenta, [-math.pi, -math.pi / 2, 0, math.pi / 2])
    assert g.weight == 0.25


def test_grid_haldane_140():
    g = bz_grid(Haldane(), 140)
    assert len(g) == 19600
    assert math.fsum(g.weights) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("model", [RiceMele(), Shockley(), Haldane()])
def test_two_point_grid_weights(model):
    assert math.fsum(bz_grid(model, 2).weights) == pytest.approx(1.0)


def test_grid_too_small():
    with pytest.raises(DomainError):
        bz_grid(RiceMele(), 1)


def test_haldane_grid_tiles_one_cell():
    g = bz_grid(Haldane(), 12)
    frac = g.momenta @ LATTICE_BASIS.T / (2 * np.pi)
    np.testing.assert_allclose(frac, g.points, atol=1e-12)
    assert brillouin_zone_measure(Haldane()) == pytest.approx((2 * np.pi) ** 2 / CELL_AREA)


def test_protocol_endpoints_exact():
    p = QuenchProtocol(2.0, -2.0, 37.3)
    assert p.u(0.0) == 2.0
    assert p.u(p.t_f) == -2.0
    assert p.u_bar == 2.0
    assert p.t_f == pytest.approx(4 * 37.3)


def test_protocol_rejects_degenerate_ramps():
    with pytest.raises(DomainError):
        QuenchProtocol(-2.0, 2.0, 10.0)
    with pytest.raises(DomainError):
        QuenchProtocol(2.0, -2.0, 0.0)
