"""Vectorized single-mode Liouvillian, its closed-form spectrum and the gap.

The superoperator acts on ``(rho11, rho22, rho33, rho44, rho23, rho32)``.
Populations ``rho11`` and ``rho44`` only feed the central block, so the
spectrum is ``{0, -gamma}`` plus the four roots of the central block.  In
terms of ``mu = lambda + gamma/2`` those roots solve

    mu^4 + (A/4) mu^2 - (d^z delta)^2 = 0,

with ``A = 16 (d_z^2 + |Delta|^2) - delta^2``; hence the two real roots
``lambda_1,pm`` and the conjugate pair ``lambda_2,pm``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import PreconditionError
from .lindblad import DissipationConfig, ModeState
from .models import BlochVector, ModelSpec, QuenchProtocol, bloch_vector


def assemble(b: BlochVector, d: DissipationConfig) -> np.ndarray:
    """6x6 complex matrix L with d(vec rho)/dt = L vec rho."""
    ga, gb, g = d.gamma_a, d.gamma_b, d.gamma
    delta = b.delta
    dc = np.conj(delta)
    L = np.zeros((6, 6), dtype=complex)
    L[0, 1], L[0, 2] = ga, gb
    L[1, 1], L[1, 3], L[1, 4], L[1, 5] = -ga, gb, 1j * delta, -1j * dc
    L[2, 2], L[2, 3], L[2, 4], L[2, 5] = -gb, ga, -1j * delta, 1j * dc
    L[3, 3] = -g
    L[4, 1], L[4, 2], L[4, 4] = 1j * dc, -1j * dc, -g / 2 - 2j * b.dz
    L[5, 1], L[5, 2], L[5, 5] = -1j * delta, 1j * delta, -g / 2 + 2j * b.dz
    return L


def vectorize(s: ModeState) -> np.ndarray:
    return np.array([s.rho11, s.rho22, s.rho33, s.rho44, s.rho23, np.conj(s.rho23)], dtype=complex)


def devectorize(x) -> ModeState:
    return ModeState(float(x[0].real), float(x[1].real), float(x[2].real), float(x[3].real), complex(x[4]))


@dataclass(frozen=True)
class SpectrumResult:
    lambda0: complex
    lambda1_plus: complex
    lambda2_plus: complex
    lambda2_minus: complex
    lambda1_minus: complex
    lambda3: complex
    A: float
    B: float

    def values(self) -> np.ndarray:
        return np.array(
            [self.lambda0, self.lambda1_plus, self.lambda2_plus,
             self.lambda2_minus, self.lambda1_minus, self.lambda3]
        )

    def sorted(self) -> np.ndarray:
        """Descending real part, ties by descending imaginary part."""
        v = self.values()
        return v[np.lexsort((-v.imag, -v.real))]


def _roots(dz2, mod2, g, delta):
    """Return (A, B, s_minus, s_plus) with s_pm = sqrt(B) pm A, both >= 0.

    Whichever of the two is a difference of nearly equal numbers is rebuilt
    from the product (sqrt(B) - A)(sqrt(B) + A) = 64 dz^2 delta^2.
    """
    A = 16.0 * (dz2 + mod2) - delta**2
    prod = 64.0 * dz2 * delta**2
    B = A * A + prod
    rb = math.sqrt(B)
    if A > 0:
        s_plus = rb + A
        s_minus = prod / s_plus
    elif A < 0:
        s_minus = rb - A
        s_plus = prod / s_minus
    else:
        s_plus = s_minus = rb
    assert s_minus >= 0 and s_plus >= 0
    return A, B, s_minus, s_plus


def eigenvalues_closed_form(b: BlochVector, d: DissipationConfig) -> SpectrumResult:
    g = d.gamma
    A, B, s_minus, s_plus = _roots(b.dz**2, abs(b.delta) ** 2, g, d.delta)
    # r1 <= gamma/2 holds exactly (s_minus <= 2 gamma^2); clamp rounding
    r1 = min(math.sqrt(2) / 4 * math.sqrt(s_minus), g / 2)
    r2 = math.sqrt(2) / 4 * math.sqrt(s_plus)
    return SpectrumResult(
        0j,
        complex(-g / 2 + r1),
        complex(-g / 2, r2),
        complex(-g / 2, -r2),
        complex(-g / 2 - r1),
        complex(-g),
        A,
        B,
    )


def spectral_gap(b: BlochVector, d: DissipationConfig) -> float:
    """Exact gap lambda_0 - lambda_1,+ (non-negative)."""
    g = d.gamma
    _, _, s_minus, _ = _roots(b.dz**2, abs(b.delta) ** 2, g, d.delta)
    r1 = min(math.sqrt(2) / 4 * math.sqrt(s_minus), g / 2)
    return g / 2 - r1


def gap_expansion(b: BlochVector, d: DissipationConfig) -> float:
    """Second-order small-|Delta_q| expansion of the gap."""
    ad = abs(d.delta)
    if ad == 0 and b.dz == 0:
        return d.gamma / 2
    return d.gamma / 2 - ad / 2 + 4 * ad * abs(b.delta) ** 2 / (16 * b.dz**2 + d.delta**2)


def _require_lld(d: DissipationConfig):
    if not d.is_lld:
        raise PreconditionError(
            f"requires one lossless sublattice (|delta| = gamma > 0), got "
            f"gamma_a={d.gamma_a}, gamma_b={d.gamma_b}"
        )


@dataclass(frozen=True)
class GapIntegral:
    f: float
    exponent: float  # f * tau_Q * |Delta_q|^2


def gap_integral(model: ModelSpec, q, protocol: QuenchProtocol, d: DissipationConfig) -> GapIntegral:
    """Integral of the small-|Delta| gap over the ramp.

    With one lossless sublattice the gap is ``4 gamma |Delta|^2 / (16 d_z^2 + gamma^2)``
    and ``d_z = u(t) + c`` is linear in time, so the integral is an
    arctan difference.  ``c`` is the model offset at ``q``.
    """
    _require_lld(d)
    g = d.gamma
    b_i = bloch_vector(model, q, protocol.u_i)
    c = b_i.dz - protocol.u_i
    f = math.atan(4 * (protocol.u_i + c) / g) - math.atan(4 * (protocol.u_f + c) / g)
    return GapIntegral(f, f * protocol.tau_Q * abs(b_i.delta) ** 2)


def integrated_gap(model: ModelSpec, q, protocol: QuenchProtocol, d: DissipationConfig,
                   kind: str = "expansion") -> float:
    """Quadrature over the ramp (in time units) of the gap at momentum ``q``.

    ``kind="exact"`` integrates lambda_0 - lambda_1,+; ``kind="expansion"``
    integrates the small-|Delta_q| form.  Near d_z = 0 the exact branch
    saturates at gamma/2 once 4|Delta_q| > |delta| (the central block's
    eigenvalues coalesce there), while the expanded gap keeps growing like
    |Delta_q|^2 and is the one that tracks the full dynamics.
    """
    b_i = bloch_vector(model, q, protocol.u_i)
    c = b_i.dz - protocol.u_i
    fn = {"exact": spectral_gap, "expansion": gap_expansion}[kind]

    def gap(u):
        return fn(BlochVector(b_i.dx, b_i.dy, u + c), d)

    points = [-c] if protocol.u_f < -c < protocol.u_i else None
    val, _ = integrate.quad(gap, protocol.u_f, protocol.u_i, points=points, limit=400,
                            epsabs=0.0, epsrel=1e-12)
    return protocol.tau_Q * val


def lld_long_time_state(model: ModelSpec, q, protocol: QuenchProtocol, d: DissipationConfig,
                        kind: str = "expansion") -> ModeState:
    """Approximate end-of-ramp state for one lossless sublattice.

    Valid when the Liouvillians at different times nearly commute (small
    ``|Delta_q|``) and ``gamma t_f >> 1``.  If the initially occupied
    sublattice is the lossy one the mode ends empty; otherwise the surviving
    population ``y = exp(-int gap dt)`` sits on the lossless sublattice.
    """
    _require_lld(d)
    b_i = bloch_vector(model, q, protocol.u_i)
    if b_i.dz * d.delta < 0:
        return ModeState(1.0, 0.0, 0.0, 0.0, 0j)
    y = math.exp(-integrated_gap(model, q, protocol, d, kind))
    if d.delta > 0:
        return ModeState(1.0 - y, 0.0, y, 0.0, 0j)
    return ModeState(1.0 - y, y, 0.0, 0.0, 0j)
