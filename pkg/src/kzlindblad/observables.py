"""Mode observables and their Brillouin-zone averages."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import DomainError, SingularPointError, StiffnessError
from .lindblad import (
    DissipationConfig,
    InitialMode,
    IntegratorConfig,
    ModeState,
    Variant,
    evolve_modes,
)
from .models import (
    BlochVector,
    ModelSpec,
    MomentumGrid,
    QuenchProtocol,
    bloch_components,
    bogoliubov,
    bogoliubov_arrays,
    bz_grid,
)

Basis = Literal["final", "instantaneous"]
COLUMNS = ("n", "N_total", "N_a", "N_b", "trace")


def excitation_probability(s: ModeState, b_final: BlochVector) -> float:
    """Average of the upper-band occupation and the lower-band vacancy.

    With ``eta_1 = u c_a + v c_b``, ``<eta_1^dag eta_1>`` restricted to the
    single-particle block is ``|u|^2 rho22 + |v|^2 rho33 + 2 Re(u v* rho23)``
    and the doubly occupied state contributes 1; the lower-band vacancy has
    the same single-particle part and gets 1 from the vacuum instead.
    """
    u, v, _ = bogoliubov(b_final)
    x = abs(u) ** 2 * s.rho22 + abs(v) ** 2 * s.rho33 + 2 * (u * np.conj(v) * s.rho23).real
    return 0.5 * (x + s.rho44) + 0.5 * (x + s.rho11)


def excitation_probability_arrays(y, u, v):
    """Vectorized p_q for states ``y[..., 6]`` and coefficients broadcastable to ``y[..., 0]``."""
    rho23 = y[..., 4] + 1j * y[..., 5]
    x = np.abs(u) ** 2 * y[..., 1] + np.abs(v) ** 2 * y[..., 2] + 2 * (u * np.conj(v) * rho23).real
    return x + 0.5 * (y[..., 0] + y[..., 3])


def mode_fermion_numbers(s: ModeState) -> tuple[float, float]:
    return s.rho22 + s.rho44, s.rho33 + s.rho44


@dataclass
class ObservableSeries:
    """Zone-averaged observables along a time or tau_Q axis."""

    axis: Literal["time", "tau_Q"]
    axis_values: np.ndarray
    data: dict[str, np.ndarray]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.axis_values = np.asarray(self.axis_values, dtype=float)
        if len(self.axis_values) > 1 and np.any(np.diff(self.axis_values) <= 0):
            raise DomainError(f"{self.axis} axis must be strictly increasing")
        for k, v in self.data.items():
            if len(v) != len(self.axis_values):
                raise DomainError(f"column {k} has {len(v)} entries, axis has {len(self.axis_values)}")

    def __len__(self):
        return len(self.axis_values)

    def __getitem__(self, name: str) -> np.ndarray:
        if name == self.axis:
            return self.axis_values
        return self.data[name]

    @property
    def points(self) -> list[tuple]:
        """Rows ``(axis, n, N_total, N_a, N_b)``."""
        cols = [self.data[c] for c in ("n", "N_total", "N_a", "N_b")]
        return [(float(a), *(float(c[i]) for c in cols)) for i, a in enumerate(self.axis_values)]


def _weighted_sum(w: np.ndarray, x: np.ndarray) -> float:
    # compensated summation in fixed mode order
    return math.fsum((w * x).tolist())


def aggregate(
    times,
    values: np.ndarray,
    weights,
    u_coef,
    v_coef,
    metadata: dict | None = None,
    u_of_t=None,
) -> ObservableSeries:
    """Average mode observables over the grid at each sample time.

    ``values`` has shape (modes, samples, 6).  ``u_coef``/``v_coef`` are the
    Bogoliubov coefficients of the measurement basis, shape (modes,) for a
    fixed basis or (modes, samples) for the instantaneous one.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if values.ndim != 3 or values.shape[2] != 6:
        raise DomainError(f"values must have shape (modes, samples, 6), got {values.shape}")
    n_modes, n_samples, _ = values.shape
    if n_samples != len(times):
        raise DomainError(f"trajectories have {n_samples} samples but {len(times)} times were given")
    if weights.shape != (n_modes,):
        raise DomainError(f"expected {n_modes} weights, got shape {weights.shape}")
    u_coef = np.asarray(u_coef)
    v_coef = np.asarray(v_coef)
    if u_coef.ndim == 1:
        u_coef, v_coef = u_coef[:, None], v_coef[:, None]
    if u_coef.shape not in ((n_modes, 1), (n_modes, n_samples)) or v_coef.shape != u_coef.shape:
        raise DomainError("Bogoliubov coefficient arrays do not match the trajectories")
    p = excitation_probability_arrays(values, u_coef, v_coef)
    n_a = values[..., 1] + values[..., 3]
    n_b = values[..., 2] + values[..., 3]
    tr = values[..., :4].sum(axis=-1)
    per_mode = {"n": p, "N_total": n_a + n_b, "N_a": n_a, "N_b": n_b, "trace": tr}
    data = {k: np.array([_weighted_sum(weights, a[:, s]) for s in range(n_samples)])
            for k, a in per_mode.items()}
    if u_of_t is not None:
        data = {"u": np.asarray(u_of_t, dtype=float), **data}
    return ObservableSeries("time", times, data, dict(metadata or {}))


def _metadata(model, protocol, d, grid, cfg, variant, initial, basis):
    return {
        "model": {"type": type(model).__name__, **model.__dict__},
        "protocol": {"u_i": protocol.u_i, "u_f": protocol.u_f, "tau_Q": protocol.tau_Q},
        "dissipation": {"gamma_a": d.gamma_a, "gamma_b": d.gamma_b},
        "grid": {"dimension": grid.dimension, "modes": len(grid)},
        "integrator": cfg.__dict__.copy(),
        "variant": variant,
        "initial": initial,
        "basis": basis,
    }


def _basis_coefficients(model, momenta, protocol, times, basis):
    dx, dy, off = bloch_components(model, momenta)
    if basis == "final":
        u, v, omega = bogoliubov_arrays(dx, dy, protocol.u_f + off)
        if np.any(omega == 0):
            raise SingularPointError("a grid mode is gapless at the end of the ramp")
        return u, v
    if basis == "instantaneous":
        u_t = protocol.u(times)
        u, v, _ = bogoliubov_arrays(dx[:, None], dy[:, None], u_t[None, :] + off[:, None])
        return u, v
    raise DomainError(f"unknown measurement basis {basis!r}")


def run_quench(
    model: ModelSpec,
    protocol: QuenchProtocol,
    d: DissipationConfig,
    grid: MomentumGrid | int | None = None,
    cfg: IntegratorConfig = IntegratorConfig(),
    variant: Variant = "full",
    initial: InitialMode = "exact_ground_state",
    workers: int = 1,
    basis: Basis = "final",
) -> ObservableSeries:
    """Evolve every grid mode and return the time series of averages."""
    if not isinstance(grid, MomentumGrid):
        grid = bz_grid(model, grid)
    momenta = grid.momenta
    times, values = evolve_modes(model, momenta, protocol, d, cfg, variant, initial, workers)
    u, v = _basis_coefficients(model, momenta, protocol, times, basis)
    meta = _metadata(model, protocol, d, grid, cfg, variant, initial, basis)
    return aggregate(times, values, grid.weights, u, v, meta, u_of_t=protocol.u(times))


def sweep(
    model: ModelSpec,
    protocol: QuenchProtocol,
    d: DissipationConfig,
    grid: MomentumGrid | int | None,
    taus,
    cfg: IntegratorConfig = IntegratorConfig(),
    variant: Variant = "full",
    initial: InitialMode = "exact_ground_state",
    workers: int = 1,
    skip_failures: bool = False,
) -> ObservableSeries:
    """End-of-ramp observables for each quench time in ``taus``.

    ``protocol`` supplies ``u_i`` and ``u_f``; its own ``tau_Q`` is ignored.
    With ``skip_failures`` a stiff point is dropped and recorded in
    ``metadata['failures']`` instead of aborting the sweep.
    """
    taus = [float(t) for t in taus]
    if not taus:
        raise DomainError("tau_Q list is empty")
    if any(b <= a for a, b in zip(taus, taus[1:])):
        raise DomainError("tau_Q list must be strictly ascending")
    if not isinstance(grid, MomentumGrid):
        grid = bz_grid(model, grid)
    end_cfg = IntegratorConfig(cfg.rtol, cfg.atol, cfg.max_step, 2, cfg.phase_step)
    kept, rows, failures = [], [], []
    for tau in taus:
        try:
            s = run_quench(model, protocol.with_tau(tau), d, grid, end_cfg, variant, initial, workers)
        except StiffnessError as exc:
            if not skip_failures:
                raise
            failures.append({"tau_Q": tau, "t": exc.t, "q": exc.q, "message": str(exc)})
            continue
        kept.append(tau)
        rows.append({k: s.data[k][-1] for k in COLUMNS})
    meta = _metadata(model, protocol, d, grid, end_cfg, variant, initial, "final")
    meta["protocol"].pop("tau_Q")
    meta["failures"] = failures
    data = {k: np.array([r[k] for r in rows]) for k in COLUMNS}
    return ObservableSeries("tau_Q", np.array(kept), data, meta)
