"""Closed-form geodesics of the four integrable families.

In characteristic coordinates each block decouples into z'' + (d pot/dz) z'^2 = 0.

* Linear potentials have constant gradients k, and each characteristic is
  z(s) = ln(k (D s + E)) / k (or D s + E when k = 0).
* Tanh-cubic potentials depend on one characteristic only, say z1.  The other
  one is affine, z0 = slope*s + J, and z1 solves the implicit equation
  int_0^{z1} exp(P(tanh(B a + A))) da + G s + H = 0,
  P(t) = F t^3 + E t^2 + D t + C.

Hyperbolic characteristics are z0 = x0 + x1, z1 = x0 - x1; elliptic ones are
z2 = x3 + i x2, z3 = i x2 - x3.  Linear potentials are A x + B y + C in the
block coordinates, so the gradients are (A+B)/2, (A-B)/2 (hyperbolic) and
(B - iA)/2, -(B + iA)/2 (elliptic).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Mapping, NamedTuple, Sequence, Tuple

import numpy as np
from scipy import integrate as sp_integrate
from scipy import optimize as sp_optimize

from .errors import BracketFailure, BranchCut, InvalidParameters, LogDomain, NonRealResult
from . import integrator
from .fields import Block, PotentialSpec, make_linear, make_tanh_cubic
from .geodesic import (
    GeodesicPath,
    from_complex_characteristics,
    from_lightcone,
    to_complex_characteristics,
    to_lightcone,
)


class Family(str, Enum):
    HYPERBOLIC_TANH = "HyperbolicTanh"
    HYPERBOLIC_LINEAR = "HyperbolicLinear"
    ELLIPTIC_TANH = "EllipticTanh"
    ELLIPTIC_LINEAR = "EllipticLinear"

    @property
    def block(self) -> Block:
        return Block.HYPERBOLIC if self.name.startswith("HYPERBOLIC") else Block.ELLIPTIC

    @property
    def is_linear(self) -> bool:
        return self.name.endswith("LINEAR")


LINEAR_DATA = ("D", "E", "F", "G")
TANH_DATA = ("slope", "G", "H", "J")


@dataclass(frozen=True)
class ClosedFormParams:
    """Constants of one closed-form family.

    ``potential`` is (A, B, C) for linear families and (A, B, C, D, E, F) for
    tanh-cubic ones.  ``data`` holds the initial-data constants: D, E, F, G
    for linear families (z_first from D, E; z_second from F, G) and slope, G,
    H, J for tanh-cubic families.
    """

    family: Family
    potential: Tuple
    data: Mapping[str, complex] = field(default_factory=dict)

    def __post_init__(self):
        fam = Family(self.family)
        object.__setattr__(self, "family", fam)
        n = 3 if fam.is_linear else 6
        if len(self.potential) != n:
            raise InvalidParameters(f"{fam.value} needs {n} potential constants")
        keys = LINEAR_DATA if fam.is_linear else TANH_DATA
        missing = [k for k in keys if k not in self.data]
        if missing:
            raise InvalidParameters(f"{fam.value} lacks data constants {missing}")
        A, B = self.potential[0], self.potential[1]
        if fam is Family.HYPERBOLIC_LINEAR and A + B == 0:
            raise InvalidParameters("HyperbolicLinear requires A+B != 0")
        if fam is Family.ELLIPTIC_LINEAR:
            if A - 1j * B == 0 or A + 1j * B == 0:
                raise InvalidParameters("EllipticLinear requires A-iB != 0 and A+iB != 0")
        if fam is Family.HYPERBOLIC_TANH and any(
            isinstance(v, complex) for v in list(self.potential) + list(self.data.values())
        ):
            raise InvalidParameters("HyperbolicTanh constants must be real")

    @property
    def gradients(self) -> Tuple[complex, complex]:
        """Constant characteristic gradients of a linear potential."""
        A, B = self.potential[0], self.potential[1]
        if self.family is Family.HYPERBOLIC_LINEAR:
            return (A + B) / 2, (A - B) / 2
        if self.family is Family.ELLIPTIC_LINEAR:
            return (B - 1j * A) / 2, -(B + 1j * A) / 2
        raise InvalidParameters("gradients only exist for linear families")

    def metric_potential(self) -> PotentialSpec:
        """The potential in block coordinates for which this closed form is exact."""
        block = self.family.block
        if self.family.is_linear:
            return make_linear(*self.potential, block)
        A, B, C, D, E, F = self.potential
        # the solved characteristic is -(w) of the tanh argument w, hence -B
        if block is Block.HYPERBOLIC:
            return make_tanh_cubic(A, -B, C, D, E, F, block)
        return make_tanh_cubic(A, -B, C, D, E, F, block, projection="complex")


# --------------------------------------------------------------------------- linear families


def _log_branch(k, a, b, s, real: bool):
    """z = ln(k (a s + b)) / k and its derivative; affine when k == 0."""
    if k == 0:
        return a * s + b, a
    q = k * (a * s + b)
    if real:
        if not q > 0:
            raise LogDomain(f"log argument {q} is not positive at s={s}")
        return math.log(q) / k, a / q
    q = complex(q)
    if q == 0:
        raise LogDomain(f"log argument vanishes at s={s}")
    q0 = complex(k * b)
    if _crosses_negative_axis(q0, q):
        raise BranchCut(f"log argument crosses the principal branch cut before s={s}")
    return cmath.log(q) / k, a / q


def _crosses_negative_axis(q0: complex, q1: complex) -> bool:
    """Does the segment q0 -> q1 jump across the cut of the principal log?

    The principal log is continuous when the negative axis is approached from
    above, so only a passage from above to below (or any passage from below)
    counts.
    """
    if q0.imag == 0:
        return q0.real < 0 and q1.imag < 0
    if q0.imag == q1.imag:
        return False
    t = q0.imag / (q0.imag - q1.imag)
    if not 0 < t <= 1 or (t == 1 and q0.imag > 0):
        return False
    return q0.real + t * (q1.real - q0.real) < 0


def _linear_state(params: ClosedFormParams, s):
    k1, k2 = params.gradients
    d = params.data
    real = params.family is Family.HYPERBOLIC_LINEAR
    z1, w1 = _log_branch(k1, d["D"], d["E"], s, real)
    z2, w2 = _log_branch(k2, d["F"], d["G"], s, real)
    return z1, z2, w1, w2


def eval_linear_closed_form(params: ClosedFormParams, s: float) -> Tuple[float, float]:
    """(z0, z1) of the hyperbolic linear family at ``s``."""
    if params.family is not Family.HYPERBOLIC_LINEAR:
        raise InvalidParameters("eval_linear_closed_form needs a HyperbolicLinear family")
    z0, z1, _, _ = _linear_state(params, s)
    return z0, z1


def fit_linear_closed_form(family, potential: Sequence, init: Sequence[float]) -> ClosedFormParams:
    """Data constants reproducing real block initial data (x_a, x_b, x_a', x_b') at s = 0."""
    family = Family(family)
    if not family.is_linear:
        raise InvalidParameters("fit_linear_closed_form needs a linear family")
    probe = ClosedFormParams(family, tuple(potential), dict(zip(LINEAR_DATA, (1, 1, 1, 1))))
    if family is Family.HYPERBOLIC_LINEAR:
        z1, z2, w1, w2 = to_lightcone(init)
    else:
        z1, z2, w1, w2 = to_complex_characteristics(init)
    data = {}
    for (kd, ke), k, z, w in zip((("D", "E"), ("F", "G")), probe.gradients, (z1, z2), (w1, w2)):
        if k == 0:
            data[kd], data[ke] = w, z
            continue
        kz = k * z
        if abs(complex(kz).imag) >= math.pi:
            raise BranchCut("initial data lie beyond the principal branch of the logarithm")
        e = cmath.exp(kz) if isinstance(kz, complex) else math.exp(kz)
        data[kd], data[ke] = e * w, e / k
    return ClosedFormParams(family, tuple(potential), data)


# --------------------------------------------------------------------------- tanh families


def _profile(params: ClosedFormParams):
    A, B, C, D, E, F = params.potential

    def pot(a):
        t = (cmath if isinstance(a, complex) else math).tanh(B * a + A)
        return ((F * t + E) * t + D) * t + C

    return pot


def _antiderivative(params: ClosedFormParams, z, tol: float):
    """int_0^z exp(P(tanh(B a + A))) da along the straight segment from 0."""
    pot = _profile(params)
    if not isinstance(z, complex):
        val, _ = sp_integrate.quad(
            lambda a: math.exp(pot(a)), 0.0, z, epsabs=tol / 10, epsrel=1e-13, limit=200
        )
        return val

    def part(fn):
        v, _ = sp_integrate.quad(
            lambda t: fn(z * cmath.exp(pot(z * t))), 0.0, 1.0, epsabs=tol / 10, epsrel=1e-13,
            limit=200,
        )
        return v

    return complex(part(lambda w: w.real), part(lambda w: w.imag))


def implicit_equation(params: ClosedFormParams, s, z, tol: float = 1e-12):
    """Left-hand side of the implicit equation for the solved characteristic."""
    d = params.data
    return _antiderivative(params, z, tol) + d["G"] * s + d["H"]


def _check_tol(tol):
    if not 1e-14 <= tol <= 1e-4:
        raise ValueError(f"root tolerance {tol} outside [1e-14, 1e-4]")


def _real_root(params: ClosedFormParams, s, tol, window):
    pot = _profile(params)
    c = params.data["G"] * s + params.data["H"]
    if c == 0:
        return 0.0

    def F(z):
        return _antiderivative(params, z, tol) + c

    direction = -1.0 if c > 0 else 1.0
    b = direction * abs(c) / math.exp(pot(0.0))
    a = 0.0
    while F(b) * c > 0:
        a = b
        b *= 2.0
        if abs(b) > window:
            raise BracketFailure(f"no sign change within |z| <= {window}")
    lo, hi = sorted((a, b))
    z = sp_optimize.brentq(F, lo, hi, xtol=tol * 1e-3, rtol=4 * np.finfo(float).eps, maxiter=500)
    for _ in range(3):
        r = F(z)
        if abs(r) < tol:
            return z
        z -= r / math.exp(pot(z))
    if abs(F(z)) >= tol:
        raise BracketFailure(f"root refinement stalled at |equation| = {abs(F(z))}")
    return z


def _complex_root(params: ClosedFormParams, s, tol, guess=None, max_iter=60):
    pot = _profile(params)
    c = complex(params.data["G"] * s + params.data["H"])
    z = complex(guess) if guess is not None else -c / cmath.exp(pot(0j))
    for _ in range(max_iter):
        r = _antiderivative(params, z, tol) + c
        if abs(r) < tol:
            return z
        z = z - r / cmath.exp(pot(z))
    raise BracketFailure(f"complex Newton iteration did not converge at s={s}")


def _tanh_state(params: ClosedFormParams, s, tol, window=1e6, guess=None):
    d = params.data
    pot = _profile(params)
    z_aff = d["slope"] * s + d["J"]
    if params.family is Family.HYPERBOLIC_TANH:
        z = _real_root(params, s, tol, window)
        return z_aff, z, d["slope"], -d["G"] / math.exp(pot(z))
    z = _complex_root(params, s, tol, guess)
    return z_aff, z, d["slope"], -d["G"] / cmath.exp(pot(z))


def eval_implicit_closed_form(
    params: ClosedFormParams, s: float, tol: float = 1e-12, window: float = 1e6
) -> Tuple[float, float]:
    """(z0, z1) of the hyperbolic tanh-cubic family; z1 by quadrature and root bracketing."""
    if params.family is not Family.HYPERBOLIC_TANH:
        raise InvalidParameters("eval_implicit_closed_form needs a HyperbolicTanh family")
    _check_tol(tol)
    z0, z1, _, _ = _tanh_state(params, s, tol, window)
    return z0, z1


def fit_tanh_closed_form(family, potential: Sequence, init: Sequence, tol: float = 1e-13):
    """Data constants reproducing block initial data at s = 0 (complex allowed for elliptic)."""
    family = Family(family)
    if family.is_linear:
        raise InvalidParameters("fit_tanh_closed_form needs a tanh family")
    if family is Family.HYPERBOLIC_TANH:
        za, zb, wa, wb = to_lightcone(init)
    else:
        za, zb, wa, wb = to_complex_characteristics(init)
    probe = ClosedFormParams(family, tuple(potential), dict(zip(TANH_DATA, (0, 0, 0, 0))))
    pot = _profile(probe)
    expo = cmath.exp if isinstance(zb, complex) else math.exp
    data = {
        "slope": wa,
        "J": za,
        "H": -_antiderivative(probe, zb, tol),
        "G": -expo(pot(zb)) * wb,
    }
    return ClosedFormParams(family, tuple(potential), data)


# --------------------------------------------------------------------------- block states


def characteristic_state(params: ClosedFormParams, s, tol: float = 1e-12, guess=None):
    """(z_a, z_b, z_a', z_b') of any family at ``s``."""
    if params.family.is_linear:
        return _linear_state(params, s)
    return _tanh_state(params, s, tol, guess=guess)


def block_state(params: ClosedFormParams, s, tol: float = 1e-12, guess=None):
    """Block coordinates and velocities (complex for elliptic families)."""
    z = characteristic_state(params, s, tol, guess)
    if params.family.block is Block.HYPERBOLIC:
        return from_lightcone(z)
    return from_complex_characteristics(tuple(complex(v) for v in z))


class EllipticPoint(NamedTuple):
    x2: float
    x3: float
    residue: float


def eval_elliptic_closed_form(
    params: ClosedFormParams, s: float, threshold: float = 1e-9, tol: float = 1e-12, guess=None
) -> EllipticPoint:
    """Real (x2, x3) of an elliptic family, with the imaginary residue."""
    if params.family.block is not Block.ELLIPTIC:
        raise InvalidParameters("eval_elliptic_closed_form needs an elliptic family")
    x2, x3, _, _ = block_state(params, s, tol, guess)
    residue = max(abs(x2.imag), abs(x3.imag))
    if residue > threshold:
        raise NonRealResult(
            f"imaginary residue {residue:.3e} exceeds threshold {threshold:.1e}", residue=residue
        )
    return EllipticPoint(x2.real, x3.real, residue)


def elliptic_path(params: ClosedFormParams, s_values: Sequence[float], tol: float = 1e-12):
    """Complex block states along ``s_values``, continuing Newton guesses for tanh families."""
    out, guess = [], None
    for s in s_values:
        z = characteristic_state(params, s, tol, guess)
        guess = z[1]
        out.append(from_complex_characteristics(tuple(complex(v) for v in z)))
    return np.array(out)


# --------------------------------------------------------------------------- comparison


def compare_paths(numeric: GeodesicPath, closed: Callable[[float], Sequence[float]]):
    """Max Euclidean position error over the numeric samples and where it occurs."""
    errs = [np.linalg.norm(np.asarray(x) - np.asarray(closed(s))) for s, x in zip(numeric.s, numeric.x)]
    i = int(np.argmax(errs))
    return float(errs[i]), float(numeric.s[i])


def integrate_block(params: ClosedFormParams, init: Sequence, s_span, tol=(1e-12, 1e-10),
                    s_eval=None):
    """Numerically integrate the block geodesic equations of the family's potential.

    The state (x_a, x_b, x_a', x_b') is complex for the complex elliptic
    tanh-cubic potential.  Returns the parameters and an (N, 4) state array.
    """
    pot = params.metric_potential()
    sg = pot.block.signature
    dtype = complex if pot.is_complex else float

    def rhs(s, y):
        x, yy, u, v = y
        j = pot.jet(x, yy)
        ax, ay = j.dx, j.dy
        # hyperbolic: sg = -1, elliptic: sg = +1
        if sg < 0:
            acc = (-(0.5 * ax * (u * u + v * v) + ay * u * v),
                   -(0.5 * ay * (u * u + v * v) + ax * u * v))
        else:
            acc = (-(0.5 * ax * (u * u - v * v) + ay * u * v),
                   -(0.5 * ay * (v * v - u * u) + ax * u * v))
        return np.array([u, v, *acc], dtype=dtype)

    sol = integrator.solve(rhs, s_span, np.asarray(init, dtype=dtype), tol[0], tol[1],
                           s_eval=s_eval)
    return np.array(sol.s), np.array(sol.y)


def composed_hamiltonian(hyper: ClosedFormParams, ell: ClosedFormParams, s_values, tol=1e-12):
    """g(x', x') along the 4D path built from one hyperbolic and one elliptic family.

    Complex-valued when the elliptic family is the complex tanh-cubic one.
    """
    if hyper.family.block is not Block.HYPERBOLIC or ell.family.block is not Block.ELLIPTIC:
        raise InvalidParameters("need one hyperbolic and one elliptic family")
    alpha, beta = hyper.metric_potential(), ell.metric_potential()
    ell_states = elliptic_path(ell, s_values, tol)
    out = []
    for s, (x2, x3, v2, v3) in zip(s_values, ell_states):
        x0, x1, v0, v1 = block_state(hyper, s, tol)
        ea = np.exp(alpha.jet(x0, x1).value)
        eb = np.exp(beta.jet(x2, x3).value)
        out.append(ea * (v0 * v0 - v1 * v1) - eb * (v2 * v2 + v3 * v3))
    return np.array(out)
