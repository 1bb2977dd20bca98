import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from splitgeo.errors import DomainError, InvalidLambda, OutOfDomain, UnsupportedDerivative
from splitgeo.fields import (
    Block,
    PolynomialProfile,
    PolynomialSeed,
    eval_potential,
    make_builtin_liouville,
    make_constant,
    make_linear,
    make_liouville_ansatz,
    make_tanh_cubic,
    make_user_callable,
)

H, E = Block.HYPERBOLIC, Block.ELLIPTIC
ORDERS = [(0, 0), (1, 0), (0, 1), (2, 0), (0, 2), (1, 1)]


def test_linear_value_and_gradient():
    p = make_linear(1, 2, 0, H)
    assert eval_potential(p, (1, 1)) == 3
    assert eval_potential(p, (0.3, -7.0), (1, 0)) == 1
    assert eval_potential(p, (0.3, -7.0), (2, 0)) == 0


def test_unsupported_derivative():
    with pytest.raises(UnsupportedDerivative):
        eval_potential(make_linear(1, 2, 0, H), (0, 0), (2, 1))


def test_tanh_cubic_constant_case():
    p = make_tanh_cubic(0.4, 1.3, 2.5, 0, 0, 0, H)
    for pt in [(0, 0), (1.2, -3.0)]:
        assert eval_potential(p, pt) == 2.5
        assert eval_potential(p, pt, (1, 0)) == 0
        assert eval_potential(p, pt, (0, 1)) == 0


def test_tanh_cubic_at_origin():
    p = make_tanh_cubic(0, 1, 0, 1, 0, 0, H)
    assert eval_potential(p, (0, 0)) == 0
    assert eval_potential(p, (0, 0), (0, 1)) == pytest.approx(1.0, abs=1e-15)


def _sympy_tanh(A, B, C, D, E_, F, w):
    t = sp.tanh(B * w + A)
    return F * t**3 + E_ * t**2 + D * t + C


def test_tanh_cubic_against_sympy_hyperbolic():
    x, y = sp.symbols("x y", real=True)
    expr = _sympy_tanh(1, 2, 3, 4, 5, 6, y - x)
    p = make_tanh_cubic(1, 2, 3, 4, 5, 6, H)
    for i, j in ORDERS:
        d = sp.diff(expr, x, i, y, j) if i + j else expr
        want = float(d.subs({x: 0.3, y: 0.7}))
        assert eval_potential(p, (0.3, 0.7), (i, j)) == pytest.approx(want, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("projection", ["re", "im"])
def test_tanh_cubic_against_sympy_elliptic(projection):
    x, y = sp.symbols("x y", real=True)
    expr = sp.expand_complex(_sympy_tanh(1, 2, 3, 4, 5, 6, y - sp.I * x))
    part = sp.re(expr) if projection == "re" else sp.im(expr)
    p = make_tanh_cubic(1, 2, 3, 4, 5, 6, E, projection=projection)
    pt = (0.2, 0.7)
    for i, j in ORDERS:
        d = sp.diff(part, x, i, y, j) if i + j else part
        want = float(sp.N(d.subs({x: pt[0], y: pt[1]}), 30))
        assert eval_potential(p, pt, (i, j)) == pytest.approx(want, rel=1e-10, abs=1e-10)


def test_tanh_cubic_elliptic_strip_domain():
    p = make_tanh_cubic(0, 2, 0, 1, 0, 0, E)
    with pytest.raises(OutOfDomain):
        eval_potential(p, (math.pi / 4 + 0.1, 0.0))


def test_ansatz_trivial_seeds():
    one = PolynomialProfile([1.0])
    pa = make_liouville_ansatz(one, PolynomialSeed({(1, 0): 1.0}), H)
    pb = make_liouville_ansatz(one, PolynomialSeed({(1, 0): 1.0}), E)
    for pt in [(0.3, 0.1), (-2.0, 5.0)]:
        for order in ORDERS:
            assert eval_potential(pa, pt, order) == 0
            assert eval_potential(pb, pt, order) == 0


def test_ansatz_affine_seed_is_zero():
    seed = PolynomialSeed({(1, 0): 0.6, (0, 1): 0.8, (0, 0): 3.0})
    p = make_liouville_ansatz(PolynomialProfile([1.0]), seed, E)
    assert abs(eval_potential(p, (0.5, -0.2))) < 1e-15


def test_ansatz_lightlike_seed_raises():
    seed = PolynomialSeed({(1, 0): 1.0, (0, 1): 1.0})
    p = make_liouville_ansatz(PolynomialProfile([0, 0, 1.0]), seed, H)
    with pytest.raises(DomainError):
        eval_potential(p, (0.3, 0.4))


def test_ansatz_against_sympy():
    # hyperbolic seed v = x0^2 + x1^2 ... must solve the wave equation: v = x0 x1 + x0^3 + 3 x0 x1^2
    x, y = sp.symbols("x y", real=True)
    v = x * y + x**3 + 3 * x * y**2
    assert sp.simplify(sp.diff(v, x, 2) - sp.diff(v, y, 2)) == 0
    h = 1 + v**2
    expr = sp.log(h * (sp.diff(v, x) ** 2 - sp.diff(v, y) ** 2))
    seed = PolynomialSeed({(1, 1): 1.0, (3, 0): 1.0, (1, 2): 3.0})
    p = make_liouville_ansatz(PolynomialProfile([1.0, 0.0, 1.0]), seed, H)
    pt = (0.7, 0.2)
    for i, j in ORDERS:
        d = sp.diff(expr, x, i, y, j) if i + j else expr
        want = float(d.subs({x: pt[0], y: pt[1]}))
        assert eval_potential(p, pt, (i, j)) == pytest.approx(want, rel=1e-11)


def test_builtin_values_and_errors():
    assert eval_potential(make_builtin_liouville(H, 1.0), (0, 1)) == 0
    assert eval_potential(make_builtin_liouville(E, 1.0), (0, 0)) == pytest.approx(math.log(4))
    with pytest.raises(OutOfDomain):
        eval_potential(make_builtin_liouville(E, 1.0), (1, 0))
    with pytest.raises(OutOfDomain) as exc:
        eval_potential(make_builtin_liouville(H, 1.0), (0.4, 0.0))
    assert "x1" in str(exc.value)
    for lam in (0.0, -1.0):
        with pytest.raises(InvalidLambda):
            make_builtin_liouville(H, lam)


def test_user_callable():
    derivs = {
        (0, 0): lambda x, y: x * x * y,
        (1, 0): lambda x, y: 2 * x * y,
        (0, 1): lambda x, y: x * x,
        (2, 0): lambda x, y: 2 * y,
        (0, 2): lambda x, y: 0.0,
        (1, 1): lambda x, y: 2 * x,
    }
    p = make_user_callable(H, derivs)
    assert eval_potential(p, (2, 3)) == 12
    assert eval_potential(p, (2, 3), (1, 1)) == 4
    with pytest.raises(ValueError):
        make_user_callable(H, {(0, 0): derivs[(0, 0)]})


def _fd_first(p, pt, h=1e-5):
    x, y = pt
    dx = (eval_potential(p, (x + h, y)) - eval_potential(p, (x - h, y))) / (2 * h)
    dy = (eval_potential(p, (x, y + h)) - eval_potential(p, (x, y - h))) / (2 * h)
    dxy = (eval_potential(p, (x, y + h), (1, 0)) - eval_potential(p, (x, y - h), (1, 0))) / (2 * h)
    return dx, dy, dxy


def _random_points(p, rng, n=100):
    pts = []
    while len(pts) < n:
        pt = rng.uniform(-0.8, 0.8, 2)
        if p.in_domain(*pt) and (p.block is not H or abs(pt[1]) > 0.2):
            pts.append(tuple(pt))
    return pts


BUILTINS = [
    make_linear(0.3, -1.2, 0.5, H),
    make_tanh_cubic(1, 2, 3, 4, 5, 6, H),
    make_tanh_cubic(0.2, 0.7, 0.1, -0.3, 0.4, 0.5, E, "re"),
    make_tanh_cubic(0.2, 0.7, 0.1, -0.3, 0.4, 0.5, E, "im"),
    make_builtin_liouville(H, 1.5),
    make_builtin_liouville(E, 0.7),
]


@pytest.mark.parametrize("p", BUILTINS, ids=lambda p: f"{p.kind.value}-{p.block.value}")
def test_derivatives_match_finite_differences(p):
    rng = np.random.default_rng(1)
    for pt in _random_points(p, rng):
        dx, dy, dxy = _fd_first(p, pt)
        for got, want in ((eval_potential(p, pt, (1, 0)), dx), (eval_potential(p, pt, (0, 1)), dy),
                          (eval_potential(p, pt, (1, 1)), dxy)):
            assert abs(got - want) <= 1e-6 * max(1.0, abs(want))


@settings(max_examples=50, deadline=None)
@given(
    st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2),
    st.floats(-1, 1), st.floats(-1, 1),
)
def test_tanh_mixed_partials_commute(A, B, F, x, y):
    p = make_tanh_cubic(A, B, 0.3, 0.2, -0.1, F, H)
    h = 1e-5
    fd = (eval_potential(p, (x + h, y), (0, 1)) - eval_potential(p, (x - h, y), (0, 1))) / (2 * h)
    assert abs(eval_potential(p, (x, y), (1, 1)) - fd) <= 1e-6 * max(1.0, abs(fd))


def test_complex_projection_is_analytic():
    p = make_tanh_cubic(0.3, 0.8, 0.1, 0.2, 0.3, 0.4, E, projection="complex")
    j = p.jet(0.1, 0.2)
    # Cauchy-Riemann in the form d/dx2 = -i d/dx3 for a function of x3 - i x2
    assert abs(j.dx + 1j * j.dy) < 1e-14
    assert p.is_complex
