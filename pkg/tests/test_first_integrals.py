import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from splitgeo.errors import BlockMismatch, DegenerateBasis, GridTooSmall
from splitgeo.fields import Block, make_constant, make_linear, make_tanh_cubic
from splitgeo.geodesic import PhaseState, integrate
from splitgeo.geometry import SplitMetric
from splitgeo.first_integrals import (
    BasisSpec,
    ConstantField,
    ExpPotentialField,
    MomentumPolynomial,
    base_hamiltonian,
    bracket_residual,
    find_first_integrals,
    hamiltonian_flow,
    nullspace_analysis,
    poisson_bracket,
    project_onto_nullspace,
    tensor_grid,
    verify_conservation,
)

H, E = Block.HYPERBOLIC, Block.ELLIPTIC
RECT = (-1, 1, -1, 1)
PTS = tensor_grid(RECT, 5, seed=3)


def test_base_hamiltonian_examples():
    assert base_hamiltonian(make_constant(0.0, H))((0, 0), (1, 1)) == 0
    assert base_hamiltonian(make_constant(0.0, H))((0, 0), (2, 1)) == 3
    assert base_hamiltonian(make_constant(0.0, E))((0, 0), (2, 1)) == 5
    h = base_hamiltonian(make_linear(1, 0, 0, H))
    assert h((0.5, 0), (1, 0)) == pytest.approx(np.exp(0.5))


def test_bracket_of_h0_with_itself_vanishes():
    p = make_tanh_cubic(0.2, 0.7, 0.1, 0.3, -0.2, 0.4, H)
    e = ExpPotentialField(p)
    h0_poly = MomentumPolynomial(2, H, (ExpPotentialField(p, scale=-1.0), ConstantField(0.0), e))
    assert bracket_residual(base_hamiltonian(p), h0_poly, PTS) < 1e-12


def test_ignorable_coordinate_gives_conserved_momentum():
    # alpha depends on x0 only, so p1 commutes with H0
    p = make_linear(0.8, 0.0, 0.3, H)
    p1 = MomentumPolynomial.from_constants(H, [1.0, 0.0])
    assert bracket_residual(base_hamiltonian(p), p1, PTS) == 0
    p0 = MomentumPolynomial.from_constants(H, [0.0, 1.0])
    assert bracket_residual(base_hamiltonian(p), p0, PTS) > 0.1


def test_flat_boost_commutes():
    basis = BasisSpec(1)
    boost = MomentumPolynomial.from_basis(H, 1, basis, [0, 1, 0, 0, 0, 1])  # x q + y p
    assert bracket_residual(base_hamiltonian(make_constant(0.0, H)), boost, PTS) < 1e-15
    # in the elliptic block the rotation y p - x q commutes instead
    rot = MomentumPolynomial.from_basis(E, 1, basis, [0, -1, 0, 0, 0, 1])
    assert bracket_residual(base_hamiltonian(make_constant(0.0, E)), rot, PTS) < 1e-15


def test_bracket_matches_hand_expansion():
    # {H0, f p} with H0 = e^a (p^2 - q^2), f = x, a = A x + B y
    A, B = 0.4, -0.7
    h0 = base_hamiltonian(make_linear(A, B, 0, H))
    h1 = MomentumPolynomial.from_basis(H, 1, BasisSpec(1), [0, 0, 0, 0, 1, 0])
    br = poisson_bracket(h0, h1)
    x, y, P, Q = 0.3, -0.2, 0.7, 0.4
    e = np.exp(A * x + B * y)
    # dH0/dp * d(xP)/dx - dH0/dx * d(xP)/dP
    want = 2 * e * P * P - A * e * (P * P - Q * Q) * x
    assert br((x, y), (P, Q)) == pytest.approx(want, rel=1e-14)


def test_block_mismatch():
    with pytest.raises(BlockMismatch):
        poisson_bracket(base_hamiltonian(make_constant(0.0, H)),
                        MomentumPolynomial.from_constants(E, [1.0, 0.0]))


@settings(max_examples=30, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.integers(0, 2**16))
def test_bracket_is_linear(a, b, seed):
    rng = np.random.default_rng(seed)
    basis = BasisSpec(2)
    p = make_tanh_cubic(*rng.uniform(-1, 1, 6), H)
    h0 = base_hamiltonian(p)
    c1, c2 = rng.normal(size=(2, 3 * basis.size))
    h1 = MomentumPolynomial.from_basis(H, 2, basis, c1)
    h2 = MomentumPolynomial.from_basis(H, 2, basis, c2)
    lhs = poisson_bracket(h0, h1.combine(a, h2, b))
    b1, b2 = poisson_bracket(h0, h1), poisson_bracket(h0, h2)
    for x in PTS[:5]:
        mom = rng.normal(size=2)
        want = a * b1(x, mom) + b * b2(x, mom)
        assert abs(lhs(x, mom) - want) <= 1e-12 * max(1.0, abs(want))


@pytest.mark.parametrize("block", [H, E])
def test_bracket_equals_derivative_along_flow(block):
    p = make_tanh_cubic(0.2, 0.7, 0.1, 0.3, -0.2, 0.4, block, "re")
    h0 = base_hamiltonian(p)
    rng = np.random.default_rng(8)
    h1 = MomentumPolynomial.from_basis(block, 2, BasisSpec(2), rng.normal(size=18))
    br = poisson_bracket(h0, h1)
    dt = 1e-4
    path = hamiltonian_flow(h0, (0.1, 0.2), (0.6, 0.3), (0, 0.3),
                            tol=(1e-13, 1e-13), s_eval=[0.15 - dt, 0.15, 0.15 + dt])
    vals = [h1(x, q) for x, q in zip(path.x[1:], path.p[1:])]
    d = (vals[2] - vals[0]) / (2 * dt)
    assert d == pytest.approx(br(path.x[2], path.p[2]), rel=1e-6, abs=1e-8)


def test_grid_too_small_and_degenerate():
    p = make_constant(0.0, H)
    with pytest.raises(GridTooSmall):
        find_first_integrals(p, 2, BasisSpec(3), grid=[(0.1, 0.2), (0.3, 0.4)])
    with pytest.raises(DegenerateBasis):
        # a constant basis on flat space has a zero bracket map
        nullspace_analysis(p, 1, BasisSpec(0), rect=RECT)


def _exact_flat_nullspace():
    """Brute force: the bracket map with exact rational arithmetic on a lattice."""
    import sympy as sp

    x, y = sp.symbols("x y")
    c = sp.symbols("c0:6")
    f0 = c[0] + c[1] * x + c[2] * y
    f1 = c[3] + c[4] * x + c[5] * y
    P, Q = sp.symbols("P Q")
    h1 = f0 * Q + f1 * P
    h0 = P**2 - Q**2
    br = sp.expand(sp.diff(h0, P) * sp.diff(h1, x) + sp.diff(h0, Q) * sp.diff(h1, y)
                   - sp.diff(h0, x) * sp.diff(h1, P) - sp.diff(h0, y) * sp.diff(h1, Q))
    eqs = sp.Poly(br, x, y, P, Q).coeffs()
    M = sp.Matrix([[sp.diff(e, ci) for ci in c] for e in eqs])
    return [np.array(v, dtype=float).ravel() for v in M.nullspace()]


def test_flat_control_nullspace():
    p = make_constant(0.7, H)
    res = nullspace_analysis(p, 1, BasisSpec(1), rect=RECT)
    assert res.nullspace_dimension >= 3
    known = {"p0": [0, 0, 0, 1, 0, 0], "p1": [1, 0, 0, 0, 0, 0], "boost": [0, 1, 0, 0, 0, 1]}
    for v in known.values():
        assert project_onto_nullspace(res, v) < 1e-10
    exact = _exact_flat_nullspace()
    assert len(exact) == res.nullspace_dimension == 3
    for v in exact:
        assert project_onto_nullspace(res, v) < 1e-10


def test_finder_soundness_and_report_shape():
    p = make_tanh_cubic(1, 1, 1, 1, 1, 1, H)
    res = nullspace_analysis(p, 1, rect=RECT)
    assert res.candidates
    for r in res.candidates + res.rejected:
        assert r.max_residual >= 0
        assert r.nullspace_dimension <= 2 * res.basis.size
        assert len(r.singular_values) == len(res.singular_values)
    for r in res.candidates:
        assert r.max_residual < 10 * 1e-10 * r.scale
        assert r.max_residual < 1e-10
        # the verification grid is independent of the assembly grid
        assert not np.any(np.all(np.isclose(r.grid[:, None], res.grid[None]), axis=2))


def test_linear_family_example_degree3():
    assert find_first_integrals(make_linear(1, 2, 0, H), 3, rect=RECT)


def test_verify_conservation_flat_momentum():
    m = SplitMetric(make_constant(0.0, H), make_constant(0.0, E))
    path = integrate(m, PhaseState.from_velocity(m, 0, (0.1, 0.2, 0.3, 0.4), (1, 0.3, 0.2, 0.1)), (0, 2))
    assert verify_conservation(MomentumPolynomial.from_constants(H, [1.0, 0.0]), path, m) < 1e-12
    assert verify_conservation(MomentumPolynomial.from_constants(E, [1.0, 0.0]), path, m) < 1e-12
    flow = hamiltonian_flow(base_hamiltonian(make_constant(0.0, H)), (0, 0), (1, 0.3), (0, 1))
    with pytest.raises(BlockMismatch):
        verify_conservation(MomentumPolynomial.from_constants(E, [1.0, 0.0]), flow)


def test_candidate_conserved_and_perturbed_is_not():
    p = make_tanh_cubic(1, 1, 1, 1, 1, 1, H)
    flow = hamiltonian_flow(base_hamiltonian(p), (0.1, 0.2), (1.0, 0.5), (0, 0.2))
    (cand, *_) = find_first_integrals(p, 1, rect=RECT)
    assert verify_conservation(cand.candidate, flow) < 1e-8
    c = cand.candidate.coefficients.copy()
    k = np.unravel_index(np.argmax(np.abs(c)), c.shape)
    c[k] += 0.1
    pert = MomentumPolynomial.from_basis(H, 1, cand.candidate.basis, c)
    assert verify_conservation(pert, flow) > 1e-3


def test_invariants_of_momentum_polynomial():
    with pytest.raises(ValueError):
        MomentumPolynomial(2, H, (ConstantField(1.0),))
    with pytest.raises(ValueError):
        MomentumPolynomial.from_basis(H, 1, BasisSpec(1), np.zeros(5))
    assert BasisSpec(3).size == 10
    assert BasisSpec(2, tanh=(1.0, 1.0)).size == 9
