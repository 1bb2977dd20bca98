"""Einstein-Maxwell algebra on the split metric.

The Faraday 2-form F = -2l e^alpha dx0^dx1 + 2m e^beta dx2^dx3 has, once an
index is raised, eigenvalues +-l and +-im.  Its invariants are
J = l^2 + m^2 and I1 = m^2 - l^2.  The field equations reduce to Liouville
equations with sources k1 = 2(kJ/c^4 + lambda) and k2 = kJ/c^4 - lambda.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence, Tuple

import numpy as np

from .errors import InvalidC, NonRealEigenvalue
from .geometry import SplitMetric, liouville_residual

GATE_TOLERANCE = 1e-14


def coupling_constants(k: float, J: float, lam: float, c: float, k2_factor: int = 1):
    """(k1, k2).  ``k2_factor=2`` gives the symmetric variant 2(kJ/c^4 - lambda)."""
    if not c > 0:
        raise InvalidC(f"speed of light must be positive, got {c}")
    if k2_factor not in (1, 2):
        raise ValueError("k2_factor must be 1 or 2")
    q = k * J / c**4
    return 2.0 * (q + lam), k2_factor * (q - lam)


def faraday_eigen(J: float, I1: float) -> Tuple[float, float]:
    """Non-negative (l, m) with l^2 = (J - I1)/2 and m^2 = (J + I1)/2."""
    a, b = (J - I1) / 2.0, (J + I1) / 2.0
    if a < 0 or b < 0:
        raise NonRealEigenvalue(
            f"(J - I1)/2 = {a} and (J + I1)/2 = {b} must both be non-negative"
        )
    return math.sqrt(a), math.sqrt(b)


def invariants(l: float, m: float) -> Tuple[float, float]:
    """(J, I1) from the eigenvalue parameters."""
    return l * l + m * m, m * m - l * l


@dataclass(frozen=True)
class MaxwellData:
    k: float
    c: float
    lam: float
    J: float
    I1: float
    k2_factor: int = 1

    def __post_init__(self):
        if not self.c > 0:
            raise InvalidC(f"speed of light must be positive, got {self.c}")
        faraday_eigen(self.J, self.I1)

    @classmethod
    def from_eigen(cls, l: float, m: float, k: float = 1.0, c: float = 1.0, lam: float = 0.0,
                   k2_factor: int = 1):
        if l < 0 or m < 0:
            raise ValueError("l and m are taken non-negative")
        J, I1 = invariants(l, m)
        return cls(k, c, lam, J, I1, k2_factor)

    @property
    def l(self) -> float:
        return faraday_eigen(self.J, self.I1)[0]

    @property
    def m(self) -> float:
        return faraday_eigen(self.J, self.I1)[1]

    @property
    def k1(self) -> float:
        return coupling_constants(self.k, self.J, self.lam, self.c, self.k2_factor)[0]

    @property
    def k2(self) -> float:
        return coupling_constants(self.k, self.J, self.lam, self.c, self.k2_factor)[1]


def faraday_form(data: MaxwellData, m: SplitMetric, point: Sequence[float]) -> Tuple[float, float]:
    """(F01, F23) = (-2l e^alpha, 2m e^beta); all other components vanish."""
    x0, x1, x2, x3 = point
    m.alpha.check_domain(x0, x1)
    m.beta.check_domain(x2, x3)
    a, b = m.jets(point)
    return -2.0 * data.l * math.exp(a.value), 2.0 * data.m * math.exp(b.value)


def faraday_tensor(data: MaxwellData, m: SplitMetric, point: Sequence[float]) -> np.ndarray:
    """Antisymmetric F_ab, normalising dx^a ^ dx^b = (dx^a dx^b - dx^b dx^a) / 2.

    With this normalisation F_01 is half the dx0 ^ dx1 coefficient.
    """
    F01, F23 = faraday_form(data, m, point)
    F = np.zeros((4, 4))
    F[0, 1], F[1, 0] = F01 / 2, -F01 / 2
    F[2, 3], F[3, 2] = F23 / 2, -F23 / 2
    return F


def faraday_operator(data: MaxwellData, m: SplitMetric, point: Sequence[float]) -> np.ndarray:
    """The mixed operator F^a_c = g^ab F_cb, whose eigenvalues are +-l, +-i m."""
    F = faraday_tensor(data, m, point)
    a, b = m.jets(point)
    ginv = 1.0 / np.array([math.exp(a.value), -math.exp(a.value),
                           -math.exp(b.value), -math.exp(b.value)])
    return ginv[:, None] * F.T


def operator_invariants(op: np.ndarray) -> Tuple[float, float]:
    """(I1, det) read off the characteristic polynomial x^4 + I1 x^2 + det."""
    coeffs = np.poly(op).real
    return float(coeffs[2]), float(coeffs[4])


class GateVerdict(NamedTuple):
    integrable: bool
    reason: str


def integrability_gate(J: float, lam: float) -> GateVerdict:
    """Geodesic integrability needs a vanishing field invariant and cosmological constant."""
    failures = []
    if abs(J) > GATE_TOLERANCE:
        failures.append("J≠0")
    if abs(lam) > GATE_TOLERANCE:
        failures.append("Λ≠0")
    if failures:
        return GateVerdict(False, "; ".join(failures))
    # J = l^2 + m^2 = 0 with real l, m forces l = m = 0
    k1, k2 = coupling_constants(1.0, 0.0, 0.0, 1.0)
    assert k1 == 0.0 and k2 == 0.0
    return GateVerdict(True, "k₁=k₂=0; F vanishes")


def einstein_maxwell_residuals(data: MaxwellData, m: SplitMetric, point: Sequence[float]):
    """Residuals of the reduced field equations for alpha (source k1) and beta (source k2)."""
    x0, x1, x2, x3 = point
    ra = liouville_residual(m.alpha, data.k1, (x0, x1))
    rb = liouville_residual(m.beta, data.k2, (x2, x3), elliptic_sign=1)
    return ra, rb
