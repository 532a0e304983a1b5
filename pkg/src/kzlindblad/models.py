"""Two-band lattice models as Bloch-vector providers.

Every model here has a Bloch Hamiltonian ``H_q = d(q) . sigma`` whose
z-component depends on the on-site energy as ``d^z = u + offset(q)``.  The
quench only moves ``u``, so the integrators consume the three arrays
``(d^x, d^y, offset)`` once and rebuild ``d^z`` on the fly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import ClassVar, Union

import numpy as np

from .errors import DomainError, PreconditionError, SingularPointError

SQRT3 = math.sqrt(3.0)

# Honeycomb geometry (nearest-neighbour distance 1): displacements b -> a.
NN_VECTORS = np.array([[0.0, 1.0], [SQRT3 / 2, -0.5], [-SQRT3 / 2, -0.5]])
# Next-nearest-neighbour vectors b1 = a2 - a3, b2 = a3 - a1, b3 = a1 - a2.
NNN_VECTORS = np.array(
    [
        NN_VECTORS[1] - NN_VECTORS[2],
        NN_VECTORS[2] - NN_VECTORS[0],
        NN_VECTORS[0] - NN_VECTORS[1],
    ]
)
# Bravais basis a1 - a3, a2 - a3 and its reciprocal (rows), A_i . B_j = 2 pi delta_ij.
LATTICE_BASIS = np.array([NN_VECTORS[0] - NN_VECTORS[2], NN_VECTORS[1] - NN_VECTORS[2]])
RECIPROCAL_BASIS = 2 * np.pi * np.linalg.inv(LATTICE_BASIS).T
CELL_AREA = abs(np.linalg.det(LATTICE_BASIS))
CORNER_RADIUS = 4 * np.pi / (3 * SQRT3)


@dataclass(frozen=True)
class RiceMele:
    """Rice-Mele chain: d = (v + w cos q, w sin q, u)."""

    v: float = 1.0
    w: float = -1.0
    dimension: ClassVar[int] = 1


@dataclass(frozen=True)
class Shockley:
    """Shockley chain: d = (0, 2w sin q, u - 2v cos q), with v, w >= 0."""

    v: float = 0.5
    w: float = 0.5
    dimension: ClassVar[int] = 1

    def __post_init__(self):
        if self.v < 0 or self.w < 0:
            raise DomainError(f"Shockley model needs v, w >= 0, got v={self.v}, w={self.w}")


@dataclass(frozen=True)
class Haldane:
    """Haldane model on the honeycomb lattice.

    ``d^x - i d^y`` is the nearest-neighbour structure factor and
    ``d^z = u - 2 t2 sin(phi) sum_i sin(q . b_i)``.  The ``t2 cos(phi)``
    part of the next-nearest-neighbour hopping is proportional to the
    identity and drops out of the dynamics, so it is omitted.
    """

    t1: float = 1.0
    t2: float = 0.5
    phi: float = np.pi / 2
    dimension: ClassVar[int] = 2


ModelSpec = Union[RiceMele, Shockley, Haldane]


@dataclass(frozen=True)
class BlochVector:
    dx: float
    dy: float
    dz: float

    @property
    def delta(self) -> complex:
        return complex(self.dx, self.dy)

    @property
    def omega(self) -> float:
        return math.sqrt(self.dx**2 + self.dy**2 + self.dz**2)


@dataclass(frozen=True)
class CriticalMode:
    """A gap-closing momentum.

    ``weight`` is the share of one Dirac cone carried by this momentum: the
    six hexagon corners of the Haldane zone each carry 1/3.
    """

    q: Union[float, tuple]
    u_c: float
    slope: float
    weight: float = 1.0
    label: str = ""

    def dz(self, u):
        """Corner value of d^z at on-site energy ``u``."""
        return u - self.u_c


@dataclass(frozen=True)
class QuenchProtocol:
    """Linear ramp u(t) = u_i - t / tau_Q on 0 <= t <= t_f."""

    u_i: float
    u_f: float
    tau_Q: float

    def __post_init__(self):
        if not self.u_i > self.u_f:
            raise DomainError(f"ramp must decrease u: u_i={self.u_i} <= u_f={self.u_f}")
        scale = max(1.0, abs(self.u_i), abs(self.u_f))
        if not self.tau_Q > 10 * np.finfo(float).eps * scale:
            raise DomainError(f"quench time tau_Q={self.tau_Q} is degenerate")

    @property
    def t_f(self) -> float:
        return (self.u_i - self.u_f) * self.tau_Q

    @property
    def u_bar(self) -> float:
        return abs(self.u_i - self.u_f) / 2

    def u(self, t):
        """On-site energy at time ``t``; exact at the end points."""
        t = np.asarray(t, dtype=float)
        out = np.where(t == self.t_f, self.u_f, self.u_i - t / self.tau_Q)
        return float(out) if out.ndim == 0 else out

    def with_tau(self, tau_Q: float) -> "QuenchProtocol":
        return QuenchProtocol(self.u_i, self.u_f, tau_Q)


@dataclass(frozen=True)
class MomentumGrid:
    """Uniform sampling of the Brillouin zone.

    For 2D grids ``points`` holds fractional coordinates in [0, 1)^2 with
    respect to ``basis`` (reciprocal vectors as rows); ``momenta`` maps them
    to Cartesian wave vectors.
    """

    dimension: int
    points: np.ndarray
    weight: float
    basis: np.ndarray | None = None

    def __len__(self):
        return len(self.points)

    @property
    def momenta(self) -> np.ndarray:
        if self.dimension == 1:
            return self.points
        return self.points @ self.basis

    @property
    def weights(self) -> np.ndarray:
        return np.full(len(self), self.weight)


def bloch_components(model: ModelSpec, q) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized ``(d^x, d^y, offset)`` with ``d^z = u + offset``.

    ``q`` is an array of scalars (1D) or of Cartesian pairs (2D).  No domain
    checking is done here.
    """
    q = np.asarray(q, dtype=float)
    if isinstance(model, RiceMele):
        dx = model.v + model.w * np.cos(q)
        dy = model.w * np.sin(q)
        return dx, dy, np.zeros_like(q)
    if isinstance(model, Shockley):
        return np.zeros_like(q), 2 * model.w * np.sin(q), -2 * model.v * np.cos(q)
    if isinstance(model, Haldane):
        qa = q @ NN_VECTORS.T
        qb = q @ NNN_VECTORS.T
        dx = -model.t1 * np.cos(qa).sum(axis=-1)
        dy = -model.t1 * np.sin(qa).sum(axis=-1)
        offset = -2 * model.t2 * math.sin(model.phi) * np.sin(qb).sum(axis=-1)
        return dx, dy, offset
    raise TypeError(f"unknown model {model!r}")


def _check_momentum(model: ModelSpec, q):
    tol = 1e-12
    if model.dimension == 1:
        if np.ndim(q) != 0:
            raise DomainError("1D models take a scalar momentum")
        if not -np.pi - tol <= q <= np.pi + tol:
            raise DomainError(f"momentum {q} outside [-pi, pi]")
    else:
        q = np.asarray(q, dtype=float)
        if q.shape != (2,):
            raise DomainError("2D models take a Cartesian momentum pair")
        frac = LATTICE_BASIS @ q / (2 * np.pi)
        if np.any(np.abs(frac) > 1 + tol):
            raise DomainError(f"momentum {tuple(q)} outside the Brillouin-zone cell")


def bloch_vector(model: ModelSpec, q, u: float) -> BlochVector:
    _check_momentum(model, q)
    dx, dy, off = bloch_components(model, q)
    return BlochVector(float(dx), float(dy), float(u + off))


def bogoliubov_arrays(dx, dy, dz):
    """Vectorized Bogoliubov coefficients ``(u_q, v_q, omega_q)``.

    Uses the cancellation-free branch on each side of ``d^z = 0``; where
    ``Delta_q = 0`` and ``d^z < 0`` the phase of ``v_q`` is fixed to 1.
    Gapless entries produce NaN.
    """
    dx, dy, dz = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (dx, dy, dz)))
    mod = np.hypot(dx, dy)
    omega = np.sqrt(mod**2 + dz**2)
    upper = dz >= 0
    with np.errstate(divide="ignore", invalid="ignore"):
        safe = np.where(mod > 0, mod, 1.0)
        # real divisions: a complex quotient overflows for subnormal |Delta|
        phase = np.where(mod > 0, dx / safe - 1j * (dy / safe), 1.0)
        u = np.where(upper, np.sqrt((omega + dz) / (2 * omega)), mod / np.sqrt(2 * omega * (omega - dz)))
        v = np.where(
            upper,
            (dx - 1j * dy) / np.sqrt(2 * omega * (omega + dz)),
            phase * np.sqrt((omega - dz) / (2 * omega)),
        )
    gapless = omega == 0
    u = np.where(gapless, np.nan, u)
    v = np.where(gapless, np.nan, v)
    return u.astype(complex), v.astype(complex), omega


def bogoliubov(b: BlochVector) -> tuple[complex, complex, float]:
    """Coefficients with ``eta_1 = u c_a + v c_b`` the upper-band annihilator."""
    if b.omega == 0:
        raise SingularPointError("Bogoliubov transform undefined at a gapless point")
    u, v, omega = bogoliubov_arrays(b.dx, b.dy, b.dz)
    return complex(u), complex(v), float(omega)


def haldane_corners() -> np.ndarray:
    """The six hexagon corners q_1..q_6 (rows), at angles k pi / 3."""
    k = np.arange(1, 7)
    return CORNER_RADIUS * np.stack([np.cos(k * np.pi / 3), np.sin(k * np.pi / 3)], axis=1)


def critical_modes(model: ModelSpec) -> list[CriticalMode]:
    if isinstance(model, RiceMele):
        if not np.isclose(abs(model.v), abs(model.w), rtol=0, atol=1e-14):
            return []
        q_c = 0.0 if np.isclose(model.v, -model.w, rtol=0, atol=1e-14) else np.pi
        return [CriticalMode(q_c, 0.0, abs(model.w), 1.0, "q=0" if q_c == 0 else "q=pi")]
    if isinstance(model, Shockley):
        if model.w == 0:
            return []
        slope = 2 * model.w
        return [
            CriticalMode(0.0, 2 * model.v, slope, 1.0, "0"),
            CriticalMode(np.pi, -2 * model.v, slope, 1.0, "pi"),
        ]
    if isinstance(model, Haldane):
        corners = haldane_corners()
        _, _, offset = bloch_components(model, corners)
        slope = 1.5 * abs(model.t1)
        return [
            CriticalMode(
                tuple(corners[k]),
                float(-offset[k]),
                slope,
                1 / 3,
                "odd" if (k + 1) % 2 else "even",
            )
            for k in range(6)
        ]
    raise TypeError(f"unknown model {model!r}")


def brillouin_zone_measure(model: ModelSpec) -> float:
    """Length (1D) or area (2D) of the Brillouin zone."""
    return 2 * np.pi if model.dimension == 1 else (2 * np.pi) ** 2 / CELL_AREA


def winding_number(model: ModelSpec, u: float, n: int = 1024) -> int:
    """Winding of the normalized Bloch vector around the zone.

    Shockley: the (d^y, d^z) loop, i.e. the x-component of d x d'.
    Rice-Mele: the (d^x, d^y) loop.  The loop integral is evaluated as the
    sum of wrapped angle increments on an ``n``-point grid.
    """
    if model.dimension != 1:
        raise DomainError("winding number is defined for 1D models only")
    for mode in critical_modes(model):
        if abs(u - mode.u_c) <= 1e-12 * max(1.0, abs(u)):
            raise SingularPointError(f"u={u} is a critical point")
    q = -np.pi + 2 * np.pi * np.arange(n) / n
    dx, dy, off = bloch_components(model, q)
    if isinstance(model, Shockley):
        plane = (dy, u + off)
    else:
        plane = (dx, dy)
    if np.min(np.hypot(*plane)) == 0:
        raise SingularPointError("Bloch vector projection vanishes on the loop")
    theta = np.arctan2(plane[1], plane[0])
    steps = np.diff(np.append(theta, theta[0]))
    steps = (steps + np.pi) % (2 * np.pi) - np.pi
    return int(round(steps.sum() / (2 * np.pi)))


def default_grid_size(model: ModelSpec) -> int:
    return 2048 if model.dimension == 1 else 140


def bz_grid(model: ModelSpec, n_per_dim: int | None = None) -> MomentumGrid:
    n = default_grid_size(model) if n_per_dim is None else int(n_per_dim)
    if n < 2:
        raise DomainError(f"grid needs at least 2 points per dimension, got {n}")
    if model.dimension == 1:
        return MomentumGrid(1, -np.pi + 2 * np.pi * np.arange(n) / n, 1.0 / n)
    frac = np.arange(n) / n
    f1, f2 = np.meshgrid(frac, frac, indexing="ij")
    points = np.stack([f1.ravel(), f2.ravel()], axis=1)
    return MomentumGrid(2, points, 1.0 / n**2, RECIPROCAL_BASIS.copy())


def require_1d(model: ModelSpec):
    if model.dimension != 1:
        raise PreconditionError("operation defined for 1D models only")
