"""Single-mode Lindblad dynamics under sublattice loss.

Each momentum sector lives in the Fock basis
``{|0>, c_a^dag|0>, c_b^dag|0>, c_a^dag c_b^dag|0>}`` and its density matrix
has six nonzero entries.  The state is carried as six reals
``(rho11, rho22, rho33, rho44, Re rho23, Im rho23)``; ``rho32`` is implied.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Literal

import numpy as np

from . import _dopri
from .errors import DomainError, SingularPointError, StiffnessError
from .models import (
    BlochVector,
    ModelSpec,
    QuenchProtocol,
    bloch_components,
    bloch_vector,
    bogoliubov_arrays,
)

Variant = Literal["full", "no_jump"]
InitialMode = Literal["exact_ground_state", "b_polarized"]


@dataclass(frozen=True)
class ModeState:
    rho11: float
    rho22: float
    rho33: float
    rho44: float
    rho23: complex

    @classmethod
    def from_array(cls, y) -> "ModeState":
        return cls(float(y[0]), float(y[1]), float(y[2]), float(y[3]), complex(y[4], y[5]))

    def to_array(self) -> np.ndarray:
        c = complex(self.rho23)
        return np.array([self.rho11, self.rho22, self.rho33, self.rho44, c.real, c.imag])

    def matrix(self) -> np.ndarray:
        """Dense 4x4 density matrix."""
        rho = np.diag([self.rho11, self.rho22, self.rho33, self.rho44]).astype(complex)
        rho[1, 2] = self.rho23
        rho[2, 1] = np.conj(self.rho23)
        return rho

    @property
    def trace(self) -> float:
        return self.rho11 + self.rho22 + self.rho33 + self.rho44

    @property
    def imbalance(self) -> float:
        """R_q = rho33 - rho22."""
        return self.rho33 - self.rho22


@dataclass(frozen=True)
class DissipationConfig:
    gamma_a: float = 0.0
    gamma_b: float = 0.0

    def __post_init__(self):
        if self.gamma_a < 0 or self.gamma_b < 0:
            raise DomainError(f"loss rates must be >= 0, got {self.gamma_a}, {self.gamma_b}")

    @property
    def gamma(self) -> float:
        return self.gamma_a + self.gamma_b

    @property
    def delta(self) -> float:
        return self.gamma_a - self.gamma_b

    @property
    def is_lld(self) -> bool:
        """Limit of loss difference: exactly one sublattice is lossy."""
        return self.gamma > 0 and min(self.gamma_a, self.gamma_b) == 0


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances and sampling for the Dormand-Prince integrator.

    The step is capped by ``max_step`` and by
    ``phase_step / max(1, |d^z(t)|, |Delta_q|, gamma)`` so the coherence
    phase, which winds at rate ``2 d^z``, stays resolved.
    """

    rtol: float = 1e-8
    atol: float = 1e-10
    max_step: float = 1.0
    sample_count: int = 2
    phase_step: float = 0.1

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0 and self.max_step > 0 and self.phase_step > 0):
            raise DomainError("rtol, atol, max_step and phase_step must be positive")
        if self.sample_count < 2:
            raise DomainError("sample_count must be >= 2 (both end points are sampled)")


@dataclass
class ModeTrajectory:
    times: np.ndarray
    values: np.ndarray  # (samples, 6)

    @property
    def states(self) -> list[ModeState]:
        return [ModeState.from_array(y) for y in self.values]

    @property
    def final(self) -> ModeState:
        return ModeState.from_array(self.values[-1])


def initial_state(b: BlochVector, mode: InitialMode = "exact_ground_state") -> ModeState:
    """Ground state of the mode (lower band filled) or the b-site product state."""
    if mode == "b_polarized":
        return ModeState(0.0, 0.0, 1.0, 0.0, 0j)
    if mode != "exact_ground_state":
        raise DomainError(f"unknown initial-state mode {mode!r}")
    if b.omega == 0:
        raise SingularPointError("ground state undefined at a gapless point")
    y = initial_arrays(np.array([b.dx]), np.array([b.dy]), np.array([b.dz]), mode)[0]
    return ModeState.from_array(y)


def initial_arrays(dx, dy, dz, mode: InitialMode = "exact_ground_state") -> np.ndarray:
    """Vectorized initial states, shape (n, 6)."""
    n = len(dx)
    y0 = np.zeros((n, 6))
    if mode == "b_polarized":
        y0[:, 2] = 1.0
        return y0
    if mode != "exact_ground_state":
        raise DomainError(f"unknown initial-state mode {mode!r}")
    u, v, omega = bogoliubov_arrays(dx, dy, dz)
    if np.any(omega == 0):
        raise SingularPointError("ground state undefined at a gapless point")
    # eta_2^dag |0> = -v |a> + u |b>
    rho23 = -v * np.conj(u)
    y0[:, 1] = np.abs(v) ** 2
    y0[:, 2] = np.abs(u) ** 2
    y0[:, 4] = rho23.real
    y0[:, 5] = rho23.imag
    return y0


def rhs(s: ModeState, b: BlochVector, d: DissipationConfig, jump: bool = True) -> ModeState:
    """Time derivative of a mode state under the loss Lindbladian."""
    g = d.gamma
    ga, gb = d.gamma_a, d.gamma_b
    delta = b.delta
    flow = 1j * delta * s.rho23 - 1j * np.conj(delta) * np.conj(s.rho23)
    j = 1.0 if jump else 0.0
    return ModeState(
        j * (ga * s.rho22 + gb * s.rho33),
        -ga * s.rho22 + j * gb * s.rho44 + flow.real,
        -gb * s.rho33 + j * ga * s.rho44 - flow.real,
        -g * s.rho44,
        -(g / 2) * s.rho23 - 2j * b.dz * s.rho23 - 1j * np.conj(delta) * (s.rho33 - s.rho22),
    )


def rhs_no_jump(s: ModeState, b: BlochVector, d: DissipationConfig) -> ModeState:
    """Same as :func:`rhs` with the quantum-jump (refilling) terms dropped."""
    return rhs(s, b, d, jump=False)


def _run_chunk(args):
    return _dopri.integrate_batch(*args)


def evolve_modes(
    model: ModelSpec,
    momenta,
    protocol: QuenchProtocol,
    d: DissipationConfig,
    cfg: IntegratorConfig = IntegratorConfig(),
    variant: Variant = "full",
    initial: InitialMode = "exact_ground_state",
    workers: int = 1,
):
    """Integrate every momentum in ``momenta`` over the quench.

    Returns ``(times, values)`` with ``values`` of shape
    ``(n_modes, sample_count, 6)``.  With ``workers > 1`` the momenta are split
    into contiguous blocks handled by a process pool; since every mode has
    its own step-size history the output does not depend on ``workers``.
    """
    if variant not in ("full", "no_jump"):
        raise DomainError(f"unknown variant {variant!r}")
    momenta = np.asarray(momenta, dtype=float)
    dx, dy, off = bloch_components(model, momenta)
    dx, dy, off = (np.ascontiguousarray(np.atleast_1d(a), dtype=float) for a in (dx, dy, off))
    y0 = initial_arrays(dx, dy, protocol.u_i + off, initial)
    times = np.linspace(0.0, protocol.t_f, cfg.sample_count)
    jump = 1.0 if variant == "full" else 0.0
    common = (
        protocol.u_i, protocol.tau_Q, d.gamma_a, d.gamma_b,
    )
    tail = (cfg.rtol, cfg.atol, cfg.max_step, cfg.phase_step, jump)
    n = len(dx)
    workers = max(1, min(int(workers), n))
    if workers == 1:
        out, status, fail_t, _ = _dopri.integrate_batch(dx, dy, off, *common, y0, times, *tail)
    else:
        blocks = np.array_split(np.arange(n), workers)
        jobs = [
            (dx[blk], dy[blk], off[blk], *common, y0[blk], times, *tail) for blk in blocks
        ]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, jobs))
        out = np.concatenate([p[0] for p in parts])
        status = np.concatenate([p[1] for p in parts])
        fail_t = np.concatenate([p[2] for p in parts])
    bad = np.flatnonzero(status != _dopri.STATUS_OK)
    if bad.size:
        k = bad[0]
        q = momenta.reshape(n, -1)[k]
        q = float(q[0]) if q.size == 1 else tuple(q)
        raise StiffnessError(
            f"step size underflow at t={fail_t[k]:.6g} for q={q} (tau_Q={protocol.tau_Q})",
            t=float(fail_t[k]), q=q, tau_Q=protocol.tau_Q,
        )
    return times, out


def evolve_mode(
    model: ModelSpec,
    q,
    protocol: QuenchProtocol,
    d: DissipationConfig,
    cfg: IntegratorConfig = IntegratorConfig(),
    variant: Variant = "full",
    initial: InitialMode = "exact_ground_state",
) -> ModeTrajectory:
    bloch_vector(model, q, protocol.u_i)  # domain check
    momenta = np.array([q], dtype=float)
    times, out = evolve_modes(model, momenta, protocol, d, cfg, variant, initial)
    return ModeTrajectory(times, out[0])


def default_workers() -> int:
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)
