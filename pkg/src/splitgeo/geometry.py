"""Split metric e^alpha (dx0^2 - dx1^2) - e^beta (dx2^2 + dx3^2) and its curvature.

Riemann convention: R^a_{bcd} = d_c Gamma^a_{db} - d_d Gamma^a_{cb}
+ Gamma^a_{ce} Gamma^e_{db} - Gamma^a_{de} Gamma^e_{cb}, Ricci R_{bd} = R^a_{bad}.
With it both blocks of a solution of the Liouville equations have scalar
curvature 2*lambda.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .errors import BlockMismatch
from .fields import Block, Jet, PotentialSpec

# cached d g_aa / d x_c etc. per point are deliberately not kept between calls


@dataclass(frozen=True)
class SplitMetric:
    alpha: PotentialSpec
    beta: PotentialSpec
    lam: float = 0.0

    def __post_init__(self):
        if self.alpha.block is not Block.HYPERBOLIC:
            raise BlockMismatch("alpha must be a hyperbolic-block potential")
        if self.beta.block is not Block.ELLIPTIC:
            raise BlockMismatch("beta must be an elliptic-block potential")

    def jets(self, point: Sequence[float]) -> Tuple[Jet, Jet]:
        x0, x1, x2, x3 = point
        return self.alpha.jet(x0, x1), self.beta.jet(x2, x3)

    def in_domain(self, point) -> bool:
        x0, x1, x2, x3 = point
        return self.alpha.in_domain(x0, x1) and self.beta.in_domain(x2, x3)


def _dtype(*jets):
    return complex if any(isinstance(v, complex) for j in jets for v in j) else float


def _exp(v):
    return np.exp(v)


def metric_components(m: SplitMetric, point: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    """Diagonal metric g_ab and its inverse g^ab as 4x4 arrays."""
    a, b = m.jets(point)
    ea, eb = _exp(a.value), _exp(b.value)
    g = np.array([ea, -ea, -eb, -eb])
    return np.diag(g), np.diag(1.0 / g)


def _metric_jet(m: SplitMetric, point):
    """Diagonal g_aa, dg[c, a] = d_c g_aa and ddg[c, d, a] = d_c d_d g_aa."""
    a, b = m.jets(point)
    dtype = _dtype(a, b)
    g = np.zeros(4, dtype)
    dg = np.zeros((4, 4), dtype)
    ddg = np.zeros((4, 4, 4), dtype)
    for jet, idx, signs in ((a, (0, 1), (1.0, -1.0)), (b, (2, 3), (-1.0, -1.0))):
        e = _exp(jet.value)
        grad = (jet.dx, jet.dy)
        hess = ((jet.dxx, jet.dxy), (jet.dxy, jet.dyy))
        for comp, sign in zip(idx, signs):
            g[comp] = sign * e
            for i, ci in enumerate(idx):
                dg[ci, comp] = sign * e * grad[i]
                for j, cj in enumerate(idx):
                    ddg[ci, cj, comp] = sign * e * (hess[i][j] + grad[i] * grad[j])
    return g, dg, ddg


def _full(g, dg, ddg):
    """Expand diagonal storage to full index arrays."""
    eye = np.eye(4)
    G = np.einsum("a,ab->ab", g, eye)
    dG = np.einsum("ca,ab->cab", dg, eye)
    ddG = np.einsum("cda,ab->cdab", ddg, eye)
    return G, dG, ddG


def _connection(m: SplitMetric, point):
    g, dg, ddg = _metric_jet(m, point)
    ginv = 1.0 / g
    _, dG, ddG = _full(g, dg, ddg)
    # T[d, b, c] = d_b g_dc + d_c g_db - d_d g_bc
    T = np.einsum("bdc->dbc", dG) + np.einsum("cdb->dbc", dG) - dG
    gamma = 0.5 * ginv[:, None, None] * T
    # d_e g^aa = -g^aa^2 d_e g_aa
    dginv = -(ginv**2)[None, :] * dg
    dT = np.einsum("ebdc->edbc", ddG) + np.einsum("ecdb->edbc", ddG) - ddG
    dgamma = 0.5 * (dginv[:, :, None, None] * T[None] + ginv[None, :, None, None] * dT)
    return g, ginv, gamma, dgamma


def christoffel(m: SplitMetric, point: Sequence[float]) -> np.ndarray:
    """Gamma[a, b, c] = Gamma^a_{bc}."""
    return _connection(m, point)[2]


def riemann(m: SplitMetric, point: Sequence[float]) -> np.ndarray:
    """R[a, b, c, d] = R^a_{bcd}."""
    return _riemann(*_connection(m, point)[2:])


def _riemann(gamma, dgamma):
    # dgamma[e, a, b, c] = d_e Gamma^a_{bc}
    R = np.einsum("cadb->abcd", dgamma) - np.einsum("dacb->abcd", dgamma)
    R = R + np.einsum("ace,edb->abcd", gamma, gamma) - np.einsum("ade,ecb->abcd", gamma, gamma)
    return R


def kretschmann(m: SplitMetric, point: Sequence[float]):
    """R_abcd R^abcd."""
    g, ginv, gamma, dgamma = _connection(m, point)
    R_up = _riemann(gamma, dgamma)
    R_down = g[:, None, None, None] * R_up
    R_all_up = np.einsum("a,b,c,d,abcd->abcd", ginv, ginv, ginv, ginv, R_down)
    K = np.einsum("abcd,abcd->", R_down, R_all_up)
    return K.item()


def block_scalar_curvatures(m: SplitMetric, point: Sequence[float]):
    """(R^H, R^E): sum of R^{ij}_{ij} over the indices of each block."""
    _, ginv, gamma, dgamma = _connection(m, point)
    R = _riemann(gamma, dgamma)
    mixed = ginv[None, :, None, None] * R  # R^{ab}_{cd}
    out = []
    for idx in ((0, 1), (2, 3)):
        out.append(sum(mixed[i, j, i, j] for i in idx for j in idx).item())
    return tuple(out)


def liouville_residual(
    p: PotentialSpec, coefficient: float, point: Sequence[float], elliptic_sign: int = -1
):
    """Residual of the Liouville equation for ``p`` with source ``coefficient``.

    Hyperbolic: alpha_xx - alpha_yy + c e^alpha.
    Elliptic: beta_xx + beta_yy + elliptic_sign * c e^beta; the default -1 is
    the cosmological-constant form (c = 2 lambda), +1 the Einstein-Maxwell
    form (c = k2).
    """
    x, y = point
    j = p.jet(x, y)
    if p.block is Block.HYPERBOLIC:
        return j.dxx - j.dyy + coefficient * np.exp(j.value)
    if elliptic_sign not in (-1, 1):
        raise ValueError("elliptic_sign must be +1 or -1")
    return j.dxx + j.dyy + elliptic_sign * coefficient * np.exp(j.value)
