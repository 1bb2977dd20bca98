"""Conformal-factor potentials alpha(x0, x1) and beta(x2, x3).

Every potential is evaluated through its *jet*: the value together with the
first and second partial derivatives, all computed in closed form.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Mapping, NamedTuple, Optional, Sequence, Tuple, Union

from .errors import DomainError, InvalidLambda, OutOfDomain, UnsupportedDerivative

LOG_FLOOR = 1e-300


class Block(str, Enum):
    HYPERBOLIC = "hyperbolic"
    ELLIPTIC = "elliptic"

    @property
    def coordinates(self) -> Tuple[str, str]:
        return ("x0", "x1") if self is Block.HYPERBOLIC else ("x2", "x3")

    @property
    def offset(self) -> int:
        return 0 if self is Block.HYPERBOLIC else 2

    @property
    def signature(self) -> int:
        """Sign in front of the second momentum squared: p0^2 - p1^2 or p2^2 + p3^2."""
        return -1 if self is Block.HYPERBOLIC else 1


class Kind(str, Enum):
    CONSTANT = "constant"
    LINEAR = "linear"
    TANH_CUBIC = "tanh_cubic"
    LIOUVILLE_ANSATZ = "liouville_ansatz"
    HYPERBOLIC_LIOUVILLE_BUILTIN = "hyperbolic_liouville_builtin"
    ELLIPTIC_LIOUVILLE_BUILTIN = "elliptic_liouville_builtin"
    USER_CALLABLE = "user_callable"


class Jet(NamedTuple):
    value: complex
    dx: complex
    dy: complex
    dxx: complex
    dyy: complex
    dxy: complex


DERIVATIVE_INDEX = {(0, 0): 0, (1, 0): 1, (0, 1): 2, (2, 0): 3, (0, 2): 4, (1, 1): 5}


# --------------------------------------------------------------------------- domains


@dataclass(frozen=True)
class Rectangle:
    """Open axis-aligned rectangle; infinite bounds allowed."""

    xmin: float = -math.inf
    xmax: float = math.inf
    ymin: float = -math.inf
    ymax: float = math.inf

    def violation(self, x, y) -> Tuple[int, ...]:
        bad = []
        if not (self.xmin < x.real < self.xmax):
            bad.append(0)
        if not (self.ymin < y.real < self.ymax):
            bad.append(1)
        return tuple(bad)

    def describe(self) -> str:
        return f"rectangle ({self.xmin}, {self.xmax}) x ({self.ymin}, {self.ymax})"


@dataclass(frozen=True)
class Disk:
    """Open disk."""

    cx: float = 0.0
    cy: float = 0.0
    radius: float = 1.0

    def violation(self, x, y) -> Tuple[int, ...]:
        if (x.real - self.cx) ** 2 + (y.real - self.cy) ** 2 < self.radius**2:
            return ()
        return (0, 1)

    def describe(self) -> str:
        return f"open disk centre ({self.cx}, {self.cy}) radius {self.radius}"


@dataclass(frozen=True)
class Excluding:
    """The plane minus the line ``coordinate[axis] == value``."""

    axis: int
    value: float = 0.0

    def violation(self, x, y) -> Tuple[int, ...]:
        c = (x, y)[self.axis]
        return () if c.real != self.value else (self.axis,)

    def describe(self) -> str:
        return f"local coordinate {self.axis} != {self.value}"


Domain = Union[Rectangle, Disk, Excluding]


# --------------------------------------------------------------------------- spec


@dataclass(frozen=True, eq=False)
class PotentialSpec:
    """An immutable potential on one 2D block.

    ``params`` holds the family constants, ``projection`` only matters for the
    elliptic tanh-cubic family, whose natural form is complex analytic: it is
    one of ``"re"``, ``"im"`` or ``"complex"``.
    """

    kind: Kind
    params: Tuple
    block: Block
    domain_hint: Optional[Domain] = None
    projection: str = "re"
    jet_fn: Callable[[float, float], Jet] = field(default=None, repr=False)

    @property
    def is_complex(self) -> bool:
        return self.projection == "complex"

    def check_domain(self, x, y) -> None:
        if self.domain_hint is None:
            return
        bad = self.domain_hint.violation(x, y)
        if bad:
            names = self.block.coordinates
            coord = ",".join(names[i] for i in bad)
            raise OutOfDomain(
                f"{coord} out of domain at ({x}, {y}): need {self.domain_hint.describe()}",
                coordinate=coord,
            )

    def jet(self, x, y) -> Jet:
        self.check_domain(x, y)
        return self.jet_fn(x, y)

    def in_domain(self, x, y) -> bool:
        return self.domain_hint is None or not self.domain_hint.violation(x, y)


def eval_potential(p: PotentialSpec, point: Sequence[float], deriv: Tuple[int, int] = (0, 0)):
    """Value of one partial derivative of ``p`` at a block point."""
    deriv = tuple(deriv)
    if len(deriv) != 2 or min(deriv) < 0 or deriv not in DERIVATIVE_INDEX:
        raise UnsupportedDerivative(f"derivative {deriv} not available (total order <= 2 only)")
    x, y = point
    return p.jet(x, y)[DERIVATIVE_INDEX[deriv]]


# --------------------------------------------------------------------------- families


def _math_for(*values):
    return cmath if any(isinstance(v, complex) for v in values) else math


def make_constant(c: float, block: Block) -> PotentialSpec:
    def jet(x, y):
        return Jet(c, 0.0, 0.0, 0.0, 0.0, 0.0)

    return PotentialSpec(Kind.CONSTANT, (c,), Block(block), jet_fn=jet)


def make_linear(A: float, B: float, C: float, block: Block) -> PotentialSpec:
    """A*x + B*y + C in the block's own coordinates (x0, x1) or (x2, x3)."""

    def jet(x, y):
        return Jet(A * x + B * y + C, A, B, 0.0, 0.0, 0.0)

    return PotentialSpec(Kind.LINEAR, (A, B, C), Block(block), jet_fn=jet)


def _cubic_in_tanh(u, C, D, E, F):
    """Return g, g', g'' for g(u) = F t^3 + E t^2 + D t + C with t = tanh(u)."""
    t = (cmath if isinstance(u, complex) else math).tanh(u)
    sech2 = 1.0 - t * t
    P = ((F * t + E) * t + D) * t + C
    P1 = (3.0 * F * t + 2.0 * E) * t + D
    P2 = 6.0 * F * t + 2.0 * E
    g1 = P1 * sech2
    g2 = P2 * sech2 * sech2 - 2.0 * t * P1 * sech2
    return P, g1, g2


def make_tanh_cubic(A, B, C, D, E, F, block: Block, projection: str = "re") -> PotentialSpec:
    """F t^3 + E t^2 + D t + C with t = tanh(B w + A).

    Hyperbolic block: w = x1 - x0.  Elliptic block: w = x3 - i x2 (the complex
    characteristic), and ``projection`` selects the real part, the imaginary
    part, or the complex-analytic field itself.
    """
    block = Block(block)
    if projection not in ("re", "im", "complex"):
        raise ValueError(f"unknown projection {projection!r}")
    params = (A, B, C, D, E, F)

    if block is Block.HYPERBOLIC:
        if any(isinstance(v, complex) for v in params):
            raise ValueError("hyperbolic tanh-cubic parameters must be real")

        def jet(x, y):
            g, g1, g2 = _cubic_in_tanh(B * (y - x) + A, C, D, E, F)
            return Jet(g, -B * g1, B * g1, B * B * g2, B * B * g2, -B * B * g2)

        return PotentialSpec(Kind.TANH_CUBIC, params, block, jet_fn=jet)

    # d/dx2 of u = B (x3 - i x2) + A is -iB, d/dx3 is B.
    def complex_jet(x, y):
        g, g1, g2 = _cubic_in_tanh(complex(B * (y - 1j * x) + A), C, D, E, F)
        return Jet(g, -1j * B * g1, B * g1, -B * B * g2, B * B * g2, -1j * B * B * g2)

    if projection == "complex":
        jet = complex_jet
        domain = None
    else:
        part = (lambda z: z.real) if projection == "re" else (lambda z: z.imag)
        if any(isinstance(v, complex) for v in params):
            raise ValueError("real projections need real parameters")

        def jet(x, y):
            return Jet(*(part(v) for v in complex_jet(x, y)))

        # tanh(u) has poles where Im u = pi/2 mod pi; Im u = -B x2
        domain = Rectangle(-math.pi / (2 * abs(B)), math.pi / (2 * abs(B))) if B else None
    return PotentialSpec(Kind.TANH_CUBIC, params, block, domain, projection, jet_fn=jet)


def make_liouville_ansatz(h: Callable, seed: Callable, block: Block) -> PotentialSpec:
    """ln(h(v) * (v_x^2 -+ v_y^2)) for a wave-equation (or harmonic) seed ``v``.

    ``h(v, order)`` returns the ``order``-th derivative of the profile (order
    0, 1, 2).  ``seed(x, y, i, j)`` returns d^{i+j} v / dx^i dy^j for total
    order up to three; third derivatives of the seed enter the second
    derivatives of the potential.
    """
    block = Block(block)
    sg = -1.0 if block is Block.HYPERBOLIC else 1.0

    def jet(x, y):
        v = seed(x, y, 0, 0)
        vx, vy = seed(x, y, 1, 0), seed(x, y, 0, 1)
        vxx, vyy, vxy = seed(x, y, 2, 0), seed(x, y, 0, 2), seed(x, y, 1, 1)
        vxxx, vxxy = seed(x, y, 3, 0), seed(x, y, 2, 1)
        vxyy, vyyy = seed(x, y, 1, 2), seed(x, y, 0, 3)

        G = vx * vx + sg * vy * vy
        Gx = 2 * (vx * vxx + sg * vy * vxy)
        Gy = 2 * (vx * vxy + sg * vy * vyy)
        Gxx = 2 * (vxx * vxx + vx * vxxx + sg * (vxy * vxy + vy * vxxy))
        Gyy = 2 * (vxy * vxy + vx * vxyy + sg * (vyy * vyy + vy * vyyy))
        Gxy = 2 * (vxy * vxx + vx * vxxy + sg * (vyy * vxy + vy * vxyy))

        h0, h1, h2 = h(v, 0), h(v, 1), h(v, 2)
        H = h0
        Hx, Hy = h1 * vx, h1 * vy
        Hxx = h2 * vx * vx + h1 * vxx
        Hyy = h2 * vy * vy + h1 * vyy
        Hxy = h2 * vx * vy + h1 * vxy

        arg = H * G
        if not arg >= LOG_FLOOR:
            raise DomainError(
                f"log argument h(v)*|grad v|^2 = {arg} is not positive at ({x}, {y})",
                coordinate=",".join(block.coordinates),
            )
        return Jet(
            math.log(arg),
            Hx / H + Gx / G,
            Hy / H + Gy / G,
            Hxx / H - (Hx / H) ** 2 + Gxx / G - (Gx / G) ** 2,
            Hyy / H - (Hy / H) ** 2 + Gyy / G - (Gy / G) ** 2,
            Hxy / H - Hx * Hy / H**2 + Gxy / G - Gx * Gy / G**2,
        )

    return PotentialSpec(Kind.LIOUVILLE_ANSATZ, (h, seed), block, jet_fn=jet)


def make_builtin_liouville(block: Block, lam: float) -> PotentialSpec:
    """Exact solutions of the Liouville equations with source 2*lam.

    Hyperbolic: -ln(lam x1^2) on x1 != 0.  Elliptic: ln(4 / (lam (1 - r^2)^2))
    on the open unit disk.
    """
    block = Block(block)
    if not lam > 0:
        raise InvalidLambda(f"built-in Liouville solutions need lambda > 0, got {lam}")

    if block is Block.HYPERBOLIC:
        log_lam = math.log(lam)

        def jet(x, y):
            return Jet(-log_lam - 2.0 * math.log(abs(y)), 0.0, -2.0 / y, 0.0, 2.0 / (y * y), 0.0)

        return PotentialSpec(
            Kind.HYPERBOLIC_LIOUVILLE_BUILTIN, (lam,), block, Excluding(axis=1), jet_fn=jet
        )

    const = math.log(4.0 / lam)

    def jet(x, y):
        q = 1.0 - x * x - y * y
        return Jet(
            const - 2.0 * math.log(q),
            4.0 * x / q,
            4.0 * y / q,
            4.0 / q + 8.0 * x * x / (q * q),
            4.0 / q + 8.0 * y * y / (q * q),
            8.0 * x * y / (q * q),
        )

    return PotentialSpec(Kind.ELLIPTIC_LIOUVILLE_BUILTIN, (lam,), block, Disk(), jet_fn=jet)


def make_user_callable(
    block: Block,
    derivatives: Mapping[Tuple[int, int], Callable[[float, float], float]],
    domain_hint: Optional[Domain] = None,
) -> PotentialSpec:
    """Wrap caller-supplied callables, one per multi-index (0,0) ... (1,1).

    No derivative is ever generated automatically.
    """
    missing = [d for d in DERIVATIVE_INDEX if d not in derivatives]
    if missing:
        raise ValueError(f"user potential lacks derivative callables for {missing}")
    fns = [derivatives[d] for d in DERIVATIVE_INDEX]

    def jet(x, y):
        return Jet(*(f(x, y) for f in fns))

    return PotentialSpec(Kind.USER_CALLABLE, (), Block(block), domain_hint, jet_fn=jet)


# --------------------------------------------------------------------------- helpers


class PolynomialSeed:
    """Bivariate polynomial with exact partial derivatives, usable as an ansatz seed.

    >>> v = PolynomialSeed({(1, 1): 1.0})   # v = x*y
    >>> v(2.0, 3.0, 1, 0)
    3.0
    """

    def __init__(self, terms: Mapping[Tuple[int, int], float]):
        self.terms = dict(terms)

    def __call__(self, x, y, i=0, j=0):
        total = 0.0
        for (a, b), c in self.terms.items():
            if a < i or b < j:
                continue
            total += c * _falling(a, i) * _falling(b, j) * x ** (a - i) * y ** (b - j)
        return total


class PolynomialProfile:
    """One-dimensional polynomial ``h(v) = sum c_k v^k`` with derivatives."""

    def __init__(self, coeffs: Sequence[float]):
        self.coeffs = list(coeffs)

    def __call__(self, v, order=0):
        return sum(
            c * _falling(k, order) * v ** (k - order)
            for k, c in enumerate(self.coeffs)
            if k >= order
        )


def _falling(n: int, k: int) -> int:
    out = 1
    for i in range(k):
        out *= n - i
    return out
