"""Geodesics of the split metric.

The integrator works with velocities, matching the second-order equations

    x0'' + x0' x1' a_1 + (x0'^2 + x1'^2) a_0 / 2 = 0
    x1'' + (x0'^2 + x1'^2) a_1 / 2 + x0' x1' a_0 = 0

(a_i = d alpha / d x_i) and their elliptic counterparts; covariant momenta
p_a = g_aa x'^a are derived for the samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import integrator
from .errors import OutOfDomain, StepUnderflow
from .geometry import SplitMetric

NULL_TOLERANCE = 1e-12


class HamiltonianClass(str, Enum):
    TIMELIKE = "Timelike"
    NULL = "Null"
    SPACELIKE = "Spacelike"


class Termination(str, Enum):
    SPAN_END = "SpanEnd"
    COORDINATE_SINGULARITY_HIT = "CoordinateSingularityHit"
    STEP_UNDERFLOW = "StepUnderflow"


@dataclass(frozen=True)
class PhaseState:
    """A point of phase space: affine parameter, position, covariant momentum."""

    s: float
    x: Tuple[float, float, float, float]
    p: Tuple[float, float, float, float]

    @classmethod
    def from_velocity(cls, m: SplitMetric, s: float, x: Sequence[float], v: Sequence[float]):
        g = _diag(m, x)
        return cls(float(s), tuple(x), tuple(g * np.asarray(v)))

    def velocity(self, m: SplitMetric) -> np.ndarray:
        return np.asarray(self.p) / _diag(m, self.x)


def _diag(m: SplitMetric, x) -> np.ndarray:
    a, b = m.jets(x)
    ea, eb = np.exp(a.value), np.exp(b.value)
    return np.array([ea, -ea, -eb, -eb])


@dataclass
class Diagnostics:
    drift: float
    n_steps: int
    n_rejected: int
    n_rhs: int
    h_min: float
    h_max: float
    termination: Termination
    exit_s: Optional[float] = None
    exit_coordinate: Optional[str] = None


@dataclass
class GeodesicPath:
    """Sampled geodesic; arrays are indexed by sample along ``s``."""

    s: np.ndarray
    x: np.ndarray
    v: np.ndarray
    p: np.ndarray
    H: np.ndarray
    acceleration: np.ndarray = field(repr=False)
    tolerances: Tuple[float, float]
    diagnostics: Diagnostics

    @property
    def samples(self) -> List[PhaseState]:
        return [
            PhaseState(float(s), tuple(x), tuple(p)) for s, x, p in zip(self.s, self.x, self.p)
        ]

    def position_at(self, s: float) -> np.ndarray:
        """Cubic Hermite interpolation between accepted steps."""
        return integrator.hermite(self.s, self.x, self.v, s)

    def velocity_at(self, s: float) -> np.ndarray:
        return integrator.hermite(self.s, self.v, self.acceleration, s)


# --------------------------------------------------------------------------- RHS


def _acceleration(m: SplitMetric, x, v, jets=None):
    a, b = m.jets(x) if jets is None else jets
    v0, v1, v2, v3 = v
    a0, a1 = a.dx, a.dy
    b2, b3 = b.dx, b.dy
    return np.array(
        [
            -(0.5 * a0 * (v0 * v0 + v1 * v1) + a1 * v0 * v1),
            -(0.5 * a1 * (v0 * v0 + v1 * v1) + a0 * v0 * v1),
            -(0.5 * b2 * (v2 * v2 - v3 * v3) + b3 * v2 * v3),
            -(0.5 * b3 * (v3 * v3 - v2 * v2) + b2 * v2 * v3),
        ]
    )


def _chart_check(jets, x, coordinate_limit):
    """Raise OutOfDomain when a coordinate or a conformal factor degenerates."""
    for i in range(4):
        if not abs(x[i]) < coordinate_limit:
            raise OutOfDomain(f"x{i} reached the coordinate limit", coordinate=f"x{i}")
    log_limit = math.log(coordinate_limit)
    for jet, names in zip(jets, (("x0", "x1"), ("x2", "x3"))):
        if not abs(jet.value) < log_limit:
            coord = names[0] if abs(jet.dx) >= abs(jet.dy) else names[1]
            raise OutOfDomain(
                f"conformal factor exp({jet.value:.3g}) outside [1/L, L], L={coordinate_limit:g}",
                coordinate=coord,
            )


def geodesic_rhs(m: SplitMetric, state: PhaseState) -> np.ndarray:
    """d/ds of (x, x') as an 8-vector (velocity, acceleration)."""
    v = state.velocity(m)
    return np.concatenate([v, _acceleration(m, state.x, v)])


def _velocity_hamiltonian(m: SplitMetric, x, v):
    g = _diag(m, x)
    return float(np.sum(g * np.asarray(v) ** 2).real)


def hamiltonian(m: SplitMetric, state: PhaseState) -> Tuple[float, HamiltonianClass]:
    """g^ab p_a p_b and its causal class."""
    g = _diag(m, state.x)
    value = float(np.sum(np.asarray(state.p) ** 2 / g).real)
    return value, classify(value)


def classify(value: float) -> HamiltonianClass:
    if value > NULL_TOLERANCE:
        return HamiltonianClass.TIMELIKE
    if value < -NULL_TOLERANCE:
        return HamiltonianClass.SPACELIKE
    return HamiltonianClass.NULL


# --------------------------------------------------------------------------- integrate


def _check_tol(tol):
    atol, rtol = tol
    for name, t in (("abs", atol), ("rel", rtol)):
        if not 1e-14 <= t <= 1e-2:
            raise ValueError(f"{name} tolerance {t} outside [1e-14, 1e-2]")
    return float(atol), float(rtol)


def integrate(
    m: SplitMetric,
    init: PhaseState,
    s_span: Tuple[float, float],
    tol: Tuple[float, float] = (1e-12, 1e-10),
    s_eval: Optional[Sequence[float]] = None,
    coordinate_limit: float = 1e8,
) -> GeodesicPath:
    """Integrate the geodesic through ``init`` over ``s_span``.

    Leaving the chart ends the path with ``Termination.COORDINATE_SINGULARITY_HIT``:
    through a potential's domain, through ``|x_i| >= coordinate_limit``, or
    through a conformal factor e^alpha, e^beta leaving
    [1/coordinate_limit, coordinate_limit].
    """
    atol, rtol = _check_tol(tol)
    if s_span[0] != init.s:
        raise ValueError("s_span must start at the initial state's parameter")
    x0 = np.asarray(init.x, dtype=float)
    v0 = init.velocity(m)  # raises OutOfDomain for a bad initial point
    _chart_check(m.jets(x0), x0, coordinate_limit)
    y0 = np.concatenate([x0, v0]).astype(float)

    def rhs(s, y):
        x, v = y[:4], y[4:]
        jets = m.jets(x)
        _chart_check(jets, x, coordinate_limit)
        return np.concatenate([v, _acceleration(m, x, v, jets)])

    try:
        sol = integrator.solve(rhs, s_span, y0, atol, rtol, s_eval=s_eval)
        termination = {
            "span_end": Termination.SPAN_END,
            "coordinate_singularity": Termination.COORDINATE_SINGULARITY_HIT,
        }[sol.reason]
    except StepUnderflow as exc:
        raise StepUnderflow(str(exc), path=_build_path(m, exc.path, (atol, rtol),
                                                       Termination.STEP_UNDERFLOW)) from None
    return _build_path(m, sol, (atol, rtol), termination)


def _build_path(m, sol, tol, termination):
    Y = np.array(sol.y)
    dY = np.array(sol.dy)
    x, v = Y[:, :4], Y[:, 4:]
    g = np.array([_diag(m, xi) for xi in x])
    p = g * v
    H = np.sum(g * v * v, axis=1)
    h0 = H[0]
    drift = float(np.max(np.abs(H - h0)) / max(1.0, abs(h0)))
    diag = Diagnostics(
        drift=drift,
        n_steps=sol.n_steps,
        n_rejected=sol.n_rejected,
        n_rhs=sol.n_rhs,
        h_min=float(sol.h_min),
        h_max=float(sol.h_max),
        termination=termination,
        exit_s=sol.exit_s,
        exit_coordinate=sol.exit_coordinate,
    )
    return GeodesicPath(np.array(sol.s), x, v, p, H, dY[:, 4:], tol, diag)


# --------------------------------------------------------------------------- characteristics


def to_lightcone(state2d):
    """(x0, x1, x0', x1') -> (z0, z1, z0', z1') with z0 = x0 + x1, z1 = x0 - x1."""
    x0, x1, v0, v1 = state2d
    return (x0 + x1, x0 - x1, v0 + v1, v0 - v1)


def from_lightcone(state2d):
    z0, z1, w0, w1 = state2d
    return ((z0 + z1) / 2, (z0 - z1) / 2, (w0 + w1) / 2, (w0 - w1) / 2)


def to_complex_characteristics(state2d):
    """(x2, x3, x2', x3') -> (z2, z3, z2', z3') with x2 = (z2 + z3)/2i, x3 = (z2 - z3)/2."""
    x2, x3, v2, v3 = state2d
    return (x3 + 1j * x2, 1j * x2 - x3, v3 + 1j * v2, 1j * v2 - v3)


def from_complex_characteristics(state2d):
    z2, z3, w2, w3 = state2d
    return ((z2 + z3) / 2j, (z2 - z3) / 2, (w2 + w3) / 2j, (w2 - w3) / 2)
