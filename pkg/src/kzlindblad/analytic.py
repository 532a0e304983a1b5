"""Closed-form predictions for the quench observables.

Everything here is an asymptotic formula: large ``tau_Q``, and for the
lossy cases ``u_i >> 0 >> u_f`` or a corner far from criticality.  The
functions evaluate the formulas literally; :func:`regime_warning` flags
windows where the asymptotics are doubtful.

Momentum-space Gaussians ``exp(-f tau_Q |Delta_q|^2)`` around a gap-closing
corner with ``|Delta_q| ~ c |q - q_c|`` integrate to

    1D:  sqrt(pi / a) / (2 pi),          a = f tau_Q c^2
    2D:  (pi / a) / |BZ|,

which gives the KZ prefactor (f = pi), the pKZ law
(f = (gamma/4)(1/d_f - 1/d_i)) and the exact-f variant (arctan form).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import DomainError, PreconditionError
from .lindblad import DissipationConfig, IntegratorConfig, evolve_modes
from .models import (
    BlochVector,
    CriticalMode,
    ModelSpec,
    QuenchProtocol,
    RiceMele,
    bloch_components,
    bogoliubov,
    bogoliubov_arrays,
    brillouin_zone_measure,
    critical_modes,
)


@dataclass(frozen=True)
class ScalingPrediction:
    """Prediction ``prefactor * tau_Q^-exponent``.

    ``terms`` maps each contributing corner label to its value at the
    protocol's ``tau_Q``.
    """

    exponent: float
    prefactor: float
    formula_id: str
    tau_Q: float = float("nan")
    terms: dict = field(default_factory=dict)
    regime_warning: bool = False

    @property
    def value(self) -> float:
        return self.prefactor * self.tau_Q ** (-self.exponent)

    def at(self, tau_Q):
        return self.prefactor * np.asarray(tau_Q, dtype=float) ** (-self.exponent)


def kz_exponent(dimension: int) -> float:
    """beta = d nu / (1 + z nu) with z = nu = 1."""
    nu = z = 1.0
    return dimension * nu / (1 + z * nu)


def regime_warning(protocol: QuenchProtocol, d: DissipationConfig | None = None) -> bool:
    """True when the ramp end points are too close to the critical window."""
    g = 0.0 if d is None else d.gamma
    lim = 5 * max(1.0, g)
    return abs(protocol.u_i) < lim or abs(protocol.u_f) < lim


def gaussian_density(model: ModelSpec, a: float, weight: float = 1.0) -> float:
    """Zone average of ``weight * exp(-a |k|^2)`` around a single corner."""
    if a <= 0:
        raise DomainError(f"Gaussian width parameter must be positive, got {a}")
    if model.dimension == 1:
        return weight * math.sqrt(math.pi / a) / (2 * math.pi)
    return weight * (math.pi / a) / brillouin_zone_measure(model)


# ---------------------------------------------------------------------------
# Single-mode imbalance R_q = rho33 - rho22

def rq_isolated(b_final: BlochVector, tau_Q: float) -> float:
    u, _, _ = bogoliubov(b_final)
    return 2 * math.exp(-math.pi * tau_Q * abs(b_final.delta) ** 2) + 2 * abs(u) ** 2 - 1


def rq_uniform_loss(b_final: BlochVector, protocol: QuenchProtocol, d: DissipationConfig) -> float:
    if d.delta != 0:
        raise PreconditionError(f"uniform loss requires gamma_a == gamma_b, got delta={d.delta}")
    return math.exp(-protocol.u_bar * d.gamma * protocol.tau_Q) * rq_isolated(b_final, protocol.tau_Q)


# ---------------------------------------------------------------------------
# Rice-Mele densities

def _require_rice_mele(model):
    if not (isinstance(model, RiceMele) and model.v == 1.0 and model.w == -1.0):
        raise PreconditionError("closed form derived for the Rice-Mele chain with v = -w = 1")


def _loss_factors(protocol: QuenchProtocol, d: DissipationConfig):
    """(exp(-u_bar gamma tau), (exp(u_bar delta tau) - 1) exp(-u_bar gamma tau))."""
    ub, tau = protocol.u_bar, protocol.tau_Q
    sup = math.exp(-ub * d.gamma * tau)
    mix = math.exp(ub * (d.delta - d.gamma) * tau) - sup
    return sup, mix


def n_closed_form(model: ModelSpec, protocol: QuenchProtocol, d: DissipationConfig) -> float:
    """Excitation density: suppressed KZ + saturation + loss-difference term."""
    _require_rice_mele(model)
    sup, mix = _loss_factors(protocol, d)
    k = 1 / (2 * math.pi * math.sqrt(protocol.tau_Q))
    return sup * k + 0.5 * (1 - sup) + mix * k / 2


def n_uniform_two_terms(model: ModelSpec, protocol: QuenchProtocol, d: DissipationConfig) -> float:
    """The first two terms of :func:`n_closed_form` (exact form for delta = 0)."""
    _require_rice_mele(model)
    sup, _ = _loss_factors(protocol, d)
    return sup / (2 * math.pi * math.sqrt(protocol.tau_Q)) + 0.5 * (1 - sup)


def ground_state_sublattice_densities(model: ModelSpec, u: float) -> tuple[float, float]:
    """Zone-averaged ground-state occupations (a, b) at on-site energy ``u``."""
    if model.dimension != 1:
        raise PreconditionError("quadrature implemented for 1D models")

    def occ_a(q):
        dx, dy, off = bloch_components(model, q)
        _, v, _ = bogoliubov_arrays(dx, dy, u + off)
        return float(abs(v) ** 2)

    val, _ = integrate.quad(occ_a, -math.pi, math.pi, limit=400, epsabs=1e-14, epsrel=1e-12)
    n_a = val / (2 * math.pi)
    return n_a, 1.0 - n_a


def fermion_density_closed_form(model: ModelSpec, protocol: QuenchProtocol, d: DissipationConfig):
    """(N_total, N_a, N_b) at the end of the ramp."""
    _require_rice_mele(model)
    sup, mix = _loss_factors(protocol, d)
    k = 1 / (2 * math.pi * math.sqrt(protocol.tau_Q))
    na_gs, nb_gs = ground_state_sublattice_densities(model, protocol.u_f)
    n_a = sup * (na_gs - k)
    n_b = sup * (nb_gs + k) + mix * k
    return sup + mix * k, n_a, n_b


def no_jump_n(model: ModelSpec, protocol: QuenchProtocol, d: DissipationConfig) -> float:
    """Excitation density when the refilling (jump) terms are dropped."""
    _require_rice_mele(model)
    sup, mix = _loss_factors(protocol, d)
    return (sup + mix) / (2 * math.pi * math.sqrt(protocol.tau_Q))


# ---------------------------------------------------------------------------
# KZ / pKZ at one lossless sublattice

def _require_lld(d: DissipationConfig):
    if not d.is_lld:
        raise PreconditionError(
            f"requires one lossless sublattice (|delta| = gamma > 0), got "
            f"gamma_a={d.gamma_a}, gamma_b={d.gamma_b}"
        )


def _select_modes(model: ModelSpec, corner) -> list[CriticalMode]:
    if isinstance(corner, CriticalMode):
        return [corner]
    modes = [m for m in critical_modes(model) if m.label == corner]
    if not modes:
        raise DomainError(f"no critical mode labelled {corner!r}")
    return modes


def kz_density(model: ModelSpec, mode: CriticalMode, tau_Q: float) -> float:
    """KZ contribution of one corner: Gaussian with f = pi."""
    return gaussian_density(model, math.pi * tau_Q * mode.slope**2, mode.weight)


def pkz_prediction(model: ModelSpec, corner, protocol: QuenchProtocol, d: DissipationConfig, t=None):
    """pKZ density of a non-crossing corner (or a label naming a corner class).

    With ``t`` given, ``u_f`` is replaced by ``u(t)``; ``t`` may be an array.
    """
    _require_lld(d)
    modes = _select_modes(model, corner)
    u_end = protocol.u_f if t is None else protocol.u(t)
    u_end = np.asarray(u_end, dtype=float)
    total = np.zeros_like(u_end)
    for m in modes:
        dz_i = m.dz(protocol.u_i)
        dz_end = m.dz(u_end)
        if dz_i * d.delta <= 0:
            raise PreconditionError(
                f"corner {m.label}: initial d_z={dz_i} puts the fermions on the lossy sublattice"
            )
        if np.any(dz_i * dz_end <= 0):
            raise PreconditionError(f"corner {m.label}: d_z changes sign during the ramp (KZ corner)")
        x = 1 / dz_end - 1 / dz_i
        with np.errstate(divide="ignore"):
            a = (d.gamma / 4) * x * protocol.tau_Q * m.slope**2
            if model.dimension == 1:
                total = total + m.weight / np.sqrt(4 * a) / math.sqrt(math.pi)
            else:
                total = total + m.weight * (math.pi / a) / brillouin_zone_measure(model)
    return float(total) if total.ndim == 0 else total


def pkz_plateau(protocol: QuenchProtocol, d: DissipationConfig) -> float:
    """Limit of the 1D pKZ law (unit slope) as u(t) -> -infinity."""
    return math.sqrt(abs(protocol.u_i)) / math.sqrt(math.pi * d.gamma * protocol.tau_Q)


def kz_prediction(model: ModelSpec, protocol: QuenchProtocol, d: DissipationConfig) -> ScalingPrediction:
    """Sum of per-corner contributions at the end of the ramp.

    Crossing corners give KZ, non-crossing corners that start on the
    lossless sublattice give pKZ, the rest give zero.
    """
    _require_lld(d)
    beta = kz_exponent(model.dimension)
    terms: dict[str, float] = {}
    kinds = []
    for m in critical_modes(model):
        dz_i, dz_f = m.dz(protocol.u_i), m.dz(protocol.u_f)
        if dz_i * d.delta <= 0:
            continue
        if dz_i * dz_f <= 0:
            val = kz_density(model, m, protocol.tau_Q)
            kind = f"KZ[{m.label}]"
        else:
            val = pkz_prediction(model, m, protocol, d)
            kind = f"pKZ[{m.label}]"
        terms[kind] = terms.get(kind, 0.0) + val
        if kind not in kinds:
            kinds.append(kind)
    total = math.fsum(terms.values())
    return ScalingPrediction(
        exponent=beta,
        prefactor=total * protocol.tau_Q**beta,
        formula_id="+".join(kinds) if kinds else "none",
        tau_Q=protocol.tau_Q,
        terms=terms,
        regime_warning=regime_warning(protocol, d),
    )


def exact_f_density(model: ModelSpec, mode: CriticalMode, protocol: QuenchProtocol, d: DissipationConfig) -> float:
    """Corner density with the full arctan exponent instead of its limits."""
    _require_lld(d)
    dz_i, dz_f = mode.dz(protocol.u_i), mode.dz(protocol.u_f)
    if dz_i * d.delta <= 0:
        return 0.0
    g = d.gamma
    f = math.atan(4 * dz_i / g) - math.atan(4 * dz_f / g)
    return gaussian_density(model, f * protocol.tau_Q * mode.slope**2, mode.weight)


def lld_mode_number(f: float, tau_Q: float, delta_sq):
    """Surviving fermion number exp(-f tau_Q |Delta_q|^2) of one mode."""
    return np.exp(-f * tau_Q * np.asarray(delta_sq, dtype=float))


# ---------------------------------------------------------------------------
# Loss-difference corrections g, h

def gh_functions(q, t_f: float, tau_Q: float, d: DissipationConfig):
    """Predicted g(q, t_f) and h(q, t_f) for a Rice-Mele ramp across q = 0."""
    if d.delta == 0:
        raise PreconditionError("g and h are defined only for gamma_a != gamma_b")
    gauss = np.exp(-math.pi * tau_Q * np.asarray(q, dtype=float) ** 2)
    return gauss, -gauss


def reconstruct_gh(
    model: ModelSpec,
    q,
    protocol: QuenchProtocol,
    d: DissipationConfig,
    cfg: IntegratorConfig = IntegratorConfig(),
):
    """g and h obtained from full ODE runs.

    Both are the deviation of the rescaled imbalances ``e^{gamma t/2} R`` and
    ``e^{gamma t/2} R'`` (``R' = rho11 - rho44``) from the equal-loss run with
    the same total rate, divided by ``e^{delta t_f / 2} - 1``.
    """
    if d.delta == 0:
        raise PreconditionError("g and h are defined only for gamma_a != gamma_b")
    q = np.atleast_1d(np.asarray(q, dtype=float))
    ref = DissipationConfig(d.gamma / 2, d.gamma / 2)
    _, y = evolve_modes(model, q, protocol, d, cfg)
    _, y0 = evolve_modes(model, q, protocol, ref, cfg)
    t_f = protocol.t_f
    scale = math.exp(d.gamma * t_f / 2)
    denom = math.expm1(d.delta * t_f / 2)
    r, r0 = y[:, -1, 2] - y[:, -1, 1], y0[:, -1, 2] - y0[:, -1, 1]
    rp, rp0 = y[:, -1, 0] - y[:, -1, 3], y0[:, -1, 0] - y0[:, -1, 3]
    return scale * (r - r0) / denom, scale * (rp - rp0) / denom
