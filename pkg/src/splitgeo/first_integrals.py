"""First integrals polynomial in momenta, found by nullspace analysis.

On one block with coordinates (x, y) and momenta (p, q) the base Hamiltonian is
H0 = e^{s phi} (p^2 + sigma q^2), sigma = -1 (hyperbolic) or +1 (elliptic) and
s = +1 by default.  A candidate H1 = sum_k f_k(x, y) p^k q^{n-k} commutes with
H0 iff every coefficient of the degree n+1 bracket vanishes; those
coefficients are linear in the f_k and their first derivatives:

    c_j = e^{s phi} [ 2 f_{j-1,x} + 2 sigma f_{j,y}
                      - s phi_x ((j-1) f_{j-1} + sigma (j+1) f_{j+1})
                      - s phi_y ((n-j+2) f_{j-2} + sigma (n-j) f_j) ]

Expanding each f_k in a finite basis and sampling c_j on a grid gives a
linear system whose (numerical) nullspace holds the candidates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from . import integrator
from .errors import BlockMismatch, DegenerateBasis, GridTooSmall
from .fields import Block, PotentialSpec

# --------------------------------------------------------------------------- basis


@dataclass(frozen=True)
class BasisSpec:
    """Monomials x^i y^j with i + j <= degree, optionally plus t, t^2, ... with
    t = tanh(B (y - x) + A)."""

    degree: int = 3
    tanh: Optional[Tuple[float, float]] = None
    tanh_powers: int = 3

    def labels(self) -> List[str]:
        out = [f"x^{i} y^{d - i}" for d in range(self.degree + 1) for i in range(d, -1, -1)]
        if self.tanh is not None:
            out += [f"t^{k}" for k in range(1, self.tanh_powers + 1)]
        return out

    @property
    def size(self) -> int:
        return len(self.labels())

    def evaluate(self, x, y):
        """Values and first derivatives, each of shape (len(x), size)."""
        x = np.atleast_1d(np.asarray(x))
        y = np.atleast_1d(np.asarray(y))
        vals, dx, dy = [], [], []
        for d in range(self.degree + 1):
            for i in range(d, -1, -1):
                j = d - i
                vals.append(x**i * y**j)
                dx.append(i * x ** max(i - 1, 0) * y**j if i else np.zeros_like(x))
                dy.append(j * x**i * y ** max(j - 1, 0) if j else np.zeros_like(y))
        if self.tanh is not None:
            A, B = self.tanh
            t = np.tanh(B * (y - x) + A)
            dt = B * (1 - t * t)
            for k in range(1, self.tanh_powers + 1):
                vals.append(t**k)
                dx.append(-k * t ** (k - 1) * dt)
                dy.append(k * t ** (k - 1) * dt)
        return np.stack(vals, 1), np.stack(dx, 1), np.stack(dy, 1)

    def as_dict(self) -> dict:
        return {"degree": self.degree, "tanh": list(self.tanh) if self.tanh else None,
                "tanh_powers": self.tanh_powers if self.tanh else 0}


# --------------------------------------------------------------------------- fields


class CoefficientField:
    """A coefficient f(x, y); subclasses provide value and (usually) gradient."""

    def value(self, x, y):
        raise NotImplementedError

    def gradient(self, x, y):
        raise NotImplementedError(f"{type(self).__name__} has no gradient")


class ConstantField(CoefficientField):
    def __init__(self, c):
        self.c = c

    def value(self, x, y):
        return self.c

    def gradient(self, x, y):
        return 0.0, 0.0


class FunctionField(CoefficientField):
    def __init__(self, value_fn, gradient_fn=None):
        self._value = value_fn
        self._gradient = gradient_fn

    def value(self, x, y):
        return self._value(x, y)

    def gradient(self, x, y):
        if self._gradient is None:
            return super().gradient(x, y)
        return self._gradient(x, y)


class BasisField(CoefficientField):
    def __init__(self, basis: BasisSpec, weights):
        self.basis = basis
        self.weights = np.asarray(weights)

    def value(self, x, y):
        v, _, _ = self.basis.evaluate(x, y)
        return (v @ self.weights)[0]

    def gradient(self, x, y):
        _, dx, dy = self.basis.evaluate(x, y)
        return (dx @ self.weights)[0], (dy @ self.weights)[0]


class ExpPotentialField(CoefficientField):
    """scale * exp(sign * potential)."""

    def __init__(self, potential: PotentialSpec, scale=1.0, sign: int = 1):
        self.potential, self.scale, self.sign = potential, scale, sign

    def value(self, x, y):
        return self.scale * np.exp(self.sign * self.potential.jet(x, y).value)

    def gradient(self, x, y):
        j = self.potential.jet(x, y)
        e = self.scale * np.exp(self.sign * j.value)
        return self.sign * j.dx * e, self.sign * j.dy * e


# --------------------------------------------------------------------------- polynomials


@dataclass(frozen=True, eq=False)
class MomentumPolynomial:
    """sum_k f_k(x, y) p^k q^(n-k) on one block.

    For the hyperbolic block (p, q) = (p0, p1); for the elliptic block
    (p, q) = (p2, p3).  ``coefficients`` has shape (n+1, basis size) when the
    fields come from a basis expansion.
    """

    degree: int
    block: Block
    fields: Tuple[CoefficientField, ...]
    basis: Optional[BasisSpec] = None
    coefficients: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.degree < 0:
            raise ValueError("degree must be non-negative")
        if len(self.fields) != self.degree + 1:
            raise ValueError(f"degree {self.degree} needs {self.degree + 1} coefficient fields")
        if self.coefficients is not None and self.basis is not None:
            if np.shape(self.coefficients) != (self.degree + 1, self.basis.size):
                raise ValueError("coefficient array does not match (n+1) x basis size")

    @classmethod
    def from_basis(cls, block, degree: int, basis: BasisSpec, coefficients):
        c = np.asarray(coefficients).reshape(degree + 1, basis.size)
        fields = tuple(BasisField(basis, c[k]) for k in range(degree + 1))
        return cls(degree, Block(block), fields, basis, c)

    @classmethod
    def from_constants(cls, block, constants: Sequence):
        """Constant coefficients, ordered f_0 (q^n) ... f_n (p^n)."""
        fields = tuple(ConstantField(c) for c in constants)
        return cls(len(constants) - 1, Block(block), fields)

    def coefficient_values(self, x, y) -> np.ndarray:
        return np.array([f.value(x, y) for f in self.fields])

    def __call__(self, x: Sequence, p: Sequence):
        f = self.coefficient_values(*x)
        P, Q = p
        n = self.degree
        return sum(f[k] * P**k * Q ** (n - k) for k in range(n + 1))

    def combine(self, a, other: "MomentumPolynomial", b) -> "MomentumPolynomial":
        """a * self + b * other (same block and degree)."""
        if other.block is not self.block or other.degree != self.degree:
            raise BlockMismatch("can only combine polynomials of one block and degree")
        fields = tuple(
            FunctionField(
                lambda x, y, f=f, g=g: a * f.value(x, y) + b * g.value(x, y),
                lambda x, y, f=f, g=g: tuple(
                    a * u + b * v for u, v in zip(f.gradient(x, y), g.gradient(x, y))
                ),
            )
            for f, g in zip(self.fields, other.fields)
        )
        return MomentumPolynomial(self.degree, self.block, fields)


@dataclass(frozen=True)
class BaseHamiltonian:
    """e^{s phi} (p^2 + sigma q^2) for the block potential phi."""

    potential: PotentialSpec
    exponent_sign: int = 1

    @property
    def block(self) -> Block:
        return self.potential.block

    def __call__(self, x: Sequence, p: Sequence):
        j = self.potential.jet(*x)
        P, Q = p
        return np.exp(self.exponent_sign * j.value) * (P * P + self.block.signature * Q * Q)

    def flow(self, state):
        """Hamilton's equations for the 4-vector (x, y, p, q)."""
        x, y, P, Q = state
        j = self.potential.jet(x, y)
        s, sg = self.exponent_sign, self.block.signature
        e = np.exp(s * j.value)
        H = e * (P * P + sg * Q * Q)
        return np.array([2 * e * P, 2 * sg * e * Q, -s * j.dx * H, -s * j.dy * H])


def base_hamiltonian(p: PotentialSpec, exponent_sign: int = 1) -> BaseHamiltonian:
    """H0 = e^{alpha}(p0^2 - p1^2) or e^{beta}(p2^2 + p3^2).

    ``exponent_sign=-1`` gives the inverse-metric Hamiltonian of the block.
    """
    if exponent_sign not in (1, -1):
        raise ValueError("exponent_sign must be +1 or -1")
    return BaseHamiltonian(p, exponent_sign)


def _bracket_coefficients(h0: BaseHamiltonian, h1: MomentumPolynomial, x, y):
    n, sg, s = h1.degree, h0.block.signature, h0.exponent_sign
    j = h0.potential.jet(x, y)
    e = np.exp(s * j.value)
    px, py = s * j.dx, s * j.dy
    f = [fl.value(x, y) for fl in h1.fields]
    grads = [fl.gradient(x, y) for fl in h1.fields]

    def F(k):
        return f[k] if 0 <= k <= n else 0.0

    def Fx(k):
        return grads[k][0] if 0 <= k <= n else 0.0

    def Fy(k):
        return grads[k][1] if 0 <= k <= n else 0.0

    out = []
    for jj in range(n + 2):
        c = 2 * Fx(jj - 1) + 2 * sg * Fy(jj)
        c -= px * ((jj - 1) * F(jj - 1) + sg * (jj + 1) * F(jj + 1))
        c -= py * ((n - jj + 2) * F(jj - 2) + sg * (n - jj) * F(jj))
        out.append(e * c)
    return out


def poisson_bracket(h0: BaseHamiltonian, h1: MomentumPolynomial) -> MomentumPolynomial:
    """{H0, H1} = sum_i dH0/dp_i dH1/dx_i - dH0/dx_i dH1/dp_i, as a degree n+1 polynomial."""
    if h0.block is not h1.block:
        raise BlockMismatch(f"H0 lives on the {h0.block.value} block, H1 on {h1.block.value}")
    fields = tuple(
        FunctionField(lambda x, y, jj=jj: _bracket_coefficients(h0, h1, x, y)[jj])
        for jj in range(h1.degree + 2)
    )
    return MomentumPolynomial(h1.degree + 1, h1.block, fields)


# --------------------------------------------------------------------------- finder


@dataclass
class BracketResidualReport:
    candidate: MomentumPolynomial
    grid: np.ndarray
    max_residual: float
    nullspace_dimension: int
    singular_values: List[float]
    scale: float = 1.0
    verified: bool = True


@dataclass
class FinderResult:
    degree: int
    basis: BasisSpec
    singular_values: np.ndarray
    threshold: float
    nullspace: np.ndarray
    candidates: List[BracketResidualReport] = field(default_factory=list)
    rejected: List[BracketResidualReport] = field(default_factory=list)
    grid: np.ndarray = None
    verify_grid: np.ndarray = None

    @property
    def nullspace_dimension(self) -> int:
        return self.nullspace.shape[0]


def tensor_grid(rect: Sequence[float], n: int = 7, jitter: float = 0.01, seed: int = 0):
    """n x n grid on (xmin, xmax, ymin, ymax), jittered by ``jitter`` of the widths."""
    xmin, xmax, ymin, ymax = rect
    rng = np.random.default_rng(seed)
    gx, gy = np.meshgrid(np.linspace(xmin, xmax, n), np.linspace(ymin, ymax, n), indexing="ij")
    pts = np.stack([gx.ravel(), gy.ravel()], 1)
    pts[:, 0] += jitter * (xmax - xmin) * rng.uniform(-1, 1, len(pts))
    pts[:, 1] += jitter * (ymax - ymin) * rng.uniform(-1, 1, len(pts))
    return pts


def bracket_matrix(p: PotentialSpec, n: int, basis: BasisSpec, grid, exponent_sign: int = 1,
                   with_factor: bool = False):
    """Linear map from basis coefficients (k-major) to bracket coefficients at the grid.

    Rows are ordered (point, j).  Without ``with_factor`` the common positive
    factor e^{s phi} of each point is dropped.
    """
    sg, s = p.block.signature, exponent_sign
    grid = np.asarray(grid, dtype=float)
    m = basis.size
    jets = [p.jet(x, y) for x, y in grid]
    dtype = complex if p.is_complex else float
    B, Bx, By = basis.evaluate(grid[:, 0], grid[:, 1])
    M = np.zeros((len(grid), n + 2, n + 1, m), dtype)
    for ip, j in enumerate(jets):
        px, py = s * j.dx, s * j.dy
        for jj in range(n + 2):
            row = M[ip, jj]
            if 0 <= jj - 1 <= n:
                row[jj - 1] += 2 * Bx[ip] - px * (jj - 1) * B[ip]
            if jj <= n:
                row[jj] += 2 * sg * By[ip] - py * sg * (n - jj) * B[ip]
            if jj + 1 <= n:
                row[jj + 1] += -px * sg * (jj + 1) * B[ip]
            if 0 <= jj - 2:
                row[jj - 2] += -py * (n - jj + 2) * B[ip]
        if with_factor:
            M[ip] *= np.exp(s * j.value)
    return M.reshape(len(grid) * (n + 2), (n + 1) * m)


def nullspace_analysis(
    p: PotentialSpec,
    n: int,
    basis: BasisSpec = BasisSpec(),
    grid=None,
    svd_tol: float = 1e-10,
    rect: Optional[Sequence[float]] = None,
    exponent_sign: int = 1,
    verify_grid=None,
    seed: int = 0,
) -> FinderResult:
    """Assemble the bracket system, take its SVD nullspace, re-verify each vector."""
    if grid is None:
        if rect is None:
            raise ValueError("supply a grid or a rectangle")
        grid = tensor_grid(rect, seed=seed)
    grid = np.asarray(grid, dtype=float)
    m = basis.size
    if len(grid) * (n + 2) < (n + 1) * m:
        raise GridTooSmall(
            f"{len(grid)} points x {n + 2} equations < {(n + 1) * m} unknowns"
        )
    M = bracket_matrix(p, n, basis, grid, exponent_sign)
    # equilibrate columns so that basis functions of different size count alike
    col = np.linalg.norm(M, axis=0)
    col[col == 0] = 1.0
    _, S, Vh = np.linalg.svd(M / col, full_matrices=False)
    if S.size == 0 or S[0] == 0:
        raise DegenerateBasis("bracket matrix has rank 0")
    thr = svd_tol * S[0]
    rank = int(np.sum(S > thr))
    null = Vh[rank:].conj() / col
    null = np.array([_normalise(v) for v in null]).reshape(-1, M.shape[1])

    if verify_grid is None:
        lo, hi = grid.min(0), grid.max(0)
        rng = np.random.default_rng(seed + 7919)
        verify_grid = lo + (hi - lo) * rng.uniform(size=grid.shape)
    verify_grid = np.asarray(verify_grid, dtype=float)
    Mv = bracket_matrix(p, n, basis, verify_grid, exponent_sign, with_factor=True)
    scale = float(np.max(np.linalg.norm(Mv, axis=1)))

    h0 = base_hamiltonian(p, exponent_sign)
    result = FinderResult(n, basis, S, thr, null, grid=grid, verify_grid=verify_grid)
    for v in null:
        cand = MomentumPolynomial.from_basis(p.block, n, basis, v)
        res = bracket_residual(h0, cand, verify_grid)
        report = BracketResidualReport(
            cand, verify_grid, res, len(null), [float(x) for x in S], scale,
            verified=res < 10 * svd_tol * scale,
        )
        (result.candidates if report.verified else result.rejected).append(report)
    return result


def find_first_integrals(
    p: PotentialSpec,
    n: int,
    basis: BasisSpec = BasisSpec(),
    grid=None,
    svd_tol: float = 1e-10,
    **kwargs,
) -> List[BracketResidualReport]:
    """Candidates H1 of degree ``n`` with {H0, H1} = 0, verified on a fresh grid."""
    return nullspace_analysis(p, n, basis, grid, svd_tol, **kwargs).candidates


def _normalise(v):
    v = v / np.linalg.norm(v)
    k = int(np.argmax(np.abs(v)))
    return v * (abs(v[k]) / v[k])


def bracket_residual(h0: BaseHamiltonian, h1: MomentumPolynomial, points) -> float:
    """max |bracket coefficient| over ``points``."""
    worst = 0.0
    for x, y in points:
        worst = max(worst, float(np.max(np.abs(_bracket_coefficients(h0, h1, x, y)))))
    return worst


def project_onto_nullspace(result: FinderResult, coefficients) -> float:
    """Relative distance of a coefficient vector from the span of the nullspace."""
    c = np.asarray(coefficients, dtype=complex).ravel()
    N = result.nullspace.T
    if N.size == 0:
        return 1.0
    sol, *_ = np.linalg.lstsq(N, c, rcond=None)
    return float(np.linalg.norm(N @ sol - c) / np.linalg.norm(c))


# --------------------------------------------------------------------------- along paths


@dataclass
class FlowPath:
    """Integral curve of H0 on one block: positions (x, y) and momenta (p, q)."""

    block: Block
    s: np.ndarray
    x: np.ndarray
    p: np.ndarray
    H: np.ndarray

    @property
    def drift(self) -> float:
        return float(np.max(np.abs(self.H - self.H[0])) / max(1.0, abs(self.H[0])))


def hamiltonian_flow(
    h0: BaseHamiltonian,
    x: Sequence,
    p: Sequence,
    s_span: Tuple[float, float],
    tol: Tuple[float, float] = (1e-12, 1e-10),
    s_eval=None,
) -> FlowPath:
    """Integrate Hamilton's equations of H0 (complex states allowed)."""
    dtype = complex if h0.potential.is_complex else float
    y0 = np.array([*x, *p], dtype=dtype)
    sol = integrator.solve(lambda s, y: h0.flow(y).astype(dtype), s_span, y0, tol[0], tol[1],
                           s_eval=s_eval)
    Y = np.array(sol.y)
    H = np.array([h0(y[:2], y[2:]) for y in Y])
    return FlowPath(h0.block, np.array(sol.s), Y[:, :2], Y[:, 2:], H)


def verify_conservation(candidate: MomentumPolynomial, path, m=None) -> float:
    """max |H1(s) - H1(s0)| / max(1, |H1(s0)|) along a flow or geodesic path."""
    if isinstance(path, FlowPath):
        if path.block is not candidate.block:
            raise BlockMismatch("path and candidate live on different blocks")
        X, P = path.x, path.p
    else:
        o = candidate.block.offset
        X, P = path.x[:, o:o + 2], path.p[:, o:o + 2]
    vals = np.array([candidate(x, p) for x, p in zip(X, P)])
    return float(np.max(np.abs(vals - vals[0])) / max(1.0, abs(vals[0])))
