"""Embedded Dormand-Prince 5(4) integrator with PI step control.

The right-hand side may raise :class:`DomainViolation` when a stage point
leaves the chart.  The step is then halved and retried, which bisects the
exit parameter; once the failing step is shorter than ``exit_resolution``
integration ends with reason ``"coordinate_singularity"``.  Real and complex
state vectors are supported.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from .errors import DomainViolation, StepUnderflow

# Dormand-Prince coefficients
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B_LOW = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)
_E = _B - _B_LOW

_SAFETY = 0.9
_PI_ALPHA = 0.7 / 5
_PI_BETA = 0.4 / 5
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0


@dataclass
class Solution:
    s: List[float] = field(default_factory=list)
    y: List[np.ndarray] = field(default_factory=list)
    dy: List[np.ndarray] = field(default_factory=list)
    reason: str = "span_end"
    exit_s: Optional[float] = None
    exit_coordinate: Optional[str] = None
    n_steps: int = 0
    n_rejected: int = 0
    n_rhs: int = 0
    h_min: float = np.inf
    h_max: float = 0.0


def _norm(err, y0, y1, atol, rtol):
    scale = atol + rtol * np.maximum(np.abs(y0), np.abs(y1))
    return float(np.sqrt(np.mean(np.abs(err / scale) ** 2)))


def _initial_step(fun, s0, y0, f0, direction, atol, rtol):
    scale = atol + rtol * np.abs(y0)
    d0 = np.sqrt(np.mean(np.abs(y0 / scale) ** 2))
    d1 = np.sqrt(np.mean(np.abs(f0 / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    try:
        f1 = fun(s0 + direction * h0, y0 + direction * h0 * f0)
    except DomainViolation:
        return h0
    d2 = np.sqrt(np.mean(np.abs((f1 - f0) / scale) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1)


def _step(fun, s, y, f0, h):
    k = [f0]
    for i in range(1, 7):
        yi = y + h * sum(a * kj for a, kj in zip(_A[i], k))
        k.append(fun(s + _C[i] * h, yi))
    y_new = y + h * sum(b * kj for b, kj in zip(_B, k) if b)
    err = h * sum(e * kj for e, kj in zip(_E, k) if e)
    return y_new, err, k[6]


def solve(
    fun: Callable[[float, np.ndarray], np.ndarray],
    s_span: Sequence[float],
    y0: np.ndarray,
    atol: float,
    rtol: float,
    s_eval: Optional[Sequence[float]] = None,
    exit_resolution: float = 1e-10,
    max_steps: int = 1_000_000,
) -> Solution:
    """Integrate ``y' = fun(s, y)`` over ``s_span``.

    Without ``s_eval`` every accepted step is recorded; with it the steps are
    clipped to land exactly on the requested parameters, which are the only
    samples stored (besides the initial point).
    """
    s0, s1 = float(s_span[0]), float(s_span[1])
    if s0 == s1:
        raise ValueError("degenerate s_span")
    direction = 1.0 if s1 > s0 else -1.0
    y = np.asarray(y0)
    f = fun(s0, y)
    sol = Solution(s=[s0], y=[y.copy()], dy=[f.copy()], n_rhs=1)

    targets = None
    if s_eval is not None:
        targets = sorted((float(t) for t in s_eval), key=lambda t: direction * t)
        targets = [t for t in targets if direction * (t - s0) > 0 and direction * (s1 - t) >= 0]
        if not targets or targets[-1] != s1:
            targets.append(s1)
    ti = 0

    h = _initial_step(fun, s0, y, f, direction, atol, rtol)
    s = s0
    err_prev = 1.0
    rejected_last = False
    count_rhs = [0]

    def counted(t, z):
        count_rhs[0] += 1
        return fun(t, z)

    while direction * (s1 - s) > 0:
        if sol.n_steps >= max_steps:
            raise StepUnderflow("maximum number of steps exceeded", path=sol)
        stop = targets[ti] if targets is not None else s1
        h = min(h, abs(stop - s))
        h_floor = 10 * np.finfo(float).eps * max(abs(s), 1.0)
        if h < h_floor:
            raise StepUnderflow(f"step size {h:.3e} underflow at s={s}", path=sol)
        hs = direction * h
        try:
            y_new, err, f_new = _step(counted, s, y, f, hs)
        except DomainViolation as exc:
            if h <= exit_resolution:
                sol.reason = "coordinate_singularity"
                sol.exit_s = s + hs
                sol.exit_coordinate = exc.coordinate
                break
            sol.n_rejected += 1
            h *= 0.5
            rejected_last = True
            continue
        en = _norm(err, y, y_new, atol, rtol)
        if not np.isfinite(en):
            en = 1e10
        if en <= 1.0:
            s_new = stop if h == abs(stop - s) else s + hs
            s, y, f = s_new, y_new, f_new
            sol.n_steps += 1
            sol.h_min = min(sol.h_min, h)
            sol.h_max = max(sol.h_max, h)
            if targets is None or s == targets[ti]:
                sol.s.append(s)
                sol.y.append(y.copy())
                sol.dy.append(f.copy())
                if targets is not None:
                    ti += 1
            en = max(en, 1e-10)
            factor = _SAFETY * en**-_PI_ALPHA * err_prev**_PI_BETA
            factor = min(_MAX_FACTOR, max(_MIN_FACTOR, factor))
            if rejected_last:
                factor = min(factor, 1.0)
            h = h * factor
            err_prev = en
            rejected_last = False
        else:
            sol.n_rejected += 1
            h = h * max(_MIN_FACTOR, _SAFETY * en ** (-1 / 5))
            rejected_last = True
    sol.n_rhs += count_rhs[0]
    return sol


def hermite(s_nodes, y_nodes, dy_nodes, s):
    """Cubic Hermite interpolation of sampled states at parameter ``s``."""
    s_nodes = np.asarray(s_nodes)
    if s_nodes[0] <= s_nodes[-1]:
        i = int(np.clip(np.searchsorted(s_nodes, s) - 1, 0, len(s_nodes) - 2))
    else:
        i = int(np.clip(np.searchsorted(-s_nodes, -s) - 1, 0, len(s_nodes) - 2))
    sa, sb = s_nodes[i], s_nodes[i + 1]
    h = sb - sa
    t = (s - sa) / h
    h00 = 2 * t**3 - 3 * t**2 + 1
    h10 = t**3 - 2 * t**2 + t
    h01 = -2 * t**3 + 3 * t**2
    h11 = t**3 - t**2
    return (
        h00 * y_nodes[i]
        + h10 * h * dy_nodes[i]
        + h01 * y_nodes[i + 1]
        + h11 * h * dy_nodes[i + 1]
    )
