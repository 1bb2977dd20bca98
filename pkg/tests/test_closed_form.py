import math

import numpy as np
import pytest

from splitgeo import closed_form as cf
from splitgeo.closed_form import ClosedFormParams, Family
from splitgeo.errors import BracketFailure, InvalidParameters, LogDomain, NonRealResult
from splitgeo.fields import Block, make_constant
from splitgeo.geodesic import PhaseState, integrate
from splitgeo.geometry import SplitMetric

LIN = dict(zip(cf.LINEAR_DATA, (1.0, 1.0, 1.0, 1.0)))


def test_linear_examples():
    p = ClosedFormParams(Family.HYPERBOLIC_LINEAR, (1, 1, 0), LIN)
    assert cf.eval_linear_closed_form(p, 0.0)[0] == pytest.approx(0.0, abs=1e-15)
    assert cf.eval_linear_closed_form(p, 1.0)[0] == pytest.approx(math.log(2), rel=1e-15)
    # z0 = ln(s + 1), so z0' = 1 / (s + 1)
    assert cf.characteristic_state(p, 1.0)[2] == pytest.approx(0.5, rel=1e-15)


def test_linear_fit_reproduces_initial_velocity():
    init = (0.1, -0.2, 0.4, 0.3)
    for pot in [(0.7, -0.3, 0.2), (2.0, 0.5, 0.0)]:
        p = cf.fit_linear_closed_form("HyperbolicLinear", pot, init)
        assert np.allclose(cf.block_state(p, 0.0), init, atol=1e-15)
        q = cf.fit_linear_closed_form("EllipticLinear", pot, init)
        assert np.allclose(cf.block_state(q, 0.0), init, atol=1e-15)


def test_invariants():
    with pytest.raises(InvalidParameters, match="A\\+B"):
        ClosedFormParams(Family.HYPERBOLIC_LINEAR, (1, -1, 0), LIN)
    with pytest.raises(InvalidParameters):
        ClosedFormParams(Family.ELLIPTIC_LINEAR, (1j, 1, 0), LIN)
    with pytest.raises(InvalidParameters):
        ClosedFormParams(Family.HYPERBOLIC_TANH, (1, 1, 0), dict(zip(cf.TANH_DATA, (0, 0, 0, 0))))


def test_log_domain():
    p = ClosedFormParams(Family.HYPERBOLIC_LINEAR, (1, 1, 0), {"D": 1.0, "E": 1.0, "F": 1.0, "G": 1.0})
    with pytest.raises(LogDomain):
        cf.eval_linear_closed_form(p, -2.0)


def _fd_residual(params, s, k_pair, h=1e-5):
    """z'' + k z'^2 for both characteristics, differencing the returned z'."""
    state = lambda t: np.array(cf.characteristic_state(params, t, tol=1e-14))
    zp = state(s)[2:]
    # the returned z' must itself be the derivative of z
    fd_z = (state(s + h)[:2] - state(s - h)[:2]) / (2 * h)
    assert np.allclose(fd_z, zp, rtol=1e-8, atol=1e-8)
    zpp = (state(s + h)[2:] - state(s - h)[2:]) / (2 * h)
    return zpp + np.array(k_pair) * zp**2


def test_linear_closed_form_solves_lightcone_ode():
    rng = np.random.default_rng(0)
    for _ in range(20):
        A, B = rng.uniform(0.2, 1.5, 2)
        if abs(A - B) < 0.1:
            continue
        D, E, F, G = rng.uniform(0.5, 1.5, 4)
        # admissible: both log arguments k (a s + b) positive on the window
        sgn = math.copysign(1.0, A - B)
        data = {"D": D, "E": E, "F": sgn * F, "G": sgn * G}
        p = ClosedFormParams(Family.HYPERBOLIC_LINEAR, (A, B, 0.0), data)
        res = _fd_residual(p, 0.5, p.gradients)
        assert np.max(np.abs(res)) < 1e-8


def test_implicit_trivial_integrands():
    d = {"slope": 0.5, "G": 0.3, "H": -0.2, "J": 0.1}
    p = ClosedFormParams(Family.HYPERBOLIC_TANH, (0.2, 1.0, 0, 0, 0, 0), d)
    for s in (0.0, 0.4, 1.0):
        z0, z1 = cf.eval_implicit_closed_form(p, s)
        assert z0 == pytest.approx(0.5 * s + 0.1)
        assert z1 == pytest.approx(-(0.3 * s - 0.2), abs=1e-12)
    p = ClosedFormParams(Family.HYPERBOLIC_TANH, (0.2, 1.0, math.log(2), 0, 0, 0), d)
    assert cf.eval_implicit_closed_form(p, 0.7)[1] == pytest.approx(-(0.3 * 0.7 - 0.2) / 2, abs=1e-12)


def test_implicit_generic():
    p = ClosedFormParams(Family.HYPERBOLIC_TANH, (1, 1, 1, 1, 1, 1),
                         {"slope": 1, "G": 1, "H": 1, "J": 1})
    z0, z1 = cf.eval_implicit_closed_form(p, 0.5, tol=1e-12)
    assert abs(cf.implicit_equation(p, 0.5, z1)) < 1e-12
    pot = cf._profile(p)
    # z1 solves z'' + dP/dz z'^2 = 0; dP/dz by central difference of the profile
    h = 1e-6
    dP = (pot(z1 + h) - pot(z1 - h)) / (2 * h)
    res = _fd_residual(p, 0.5, (0.0, dP))
    assert abs(res[0]) < 1e-8 and abs(res[1]) < 1e-8


def test_implicit_root_is_unique():
    p = ClosedFormParams(Family.HYPERBOLIC_TANH, (0.3, -0.8, 0.2, 1.1, -0.7, 0.9),
                         {"slope": 1, "G": 0.4, "H": -0.3, "J": 0})
    z = np.linspace(-20, 20, 801)
    vals = np.array([cf.implicit_equation(p, 0.5, zi) for zi in z])
    assert np.all(np.diff(vals) > 0)
    assert np.count_nonzero(np.diff(np.sign(vals))) == 1


def test_implicit_tolerance_range_and_bracket_failure():
    p = ClosedFormParams(Family.HYPERBOLIC_TANH, (1, 1, 1, 1, 1, 1),
                         {"slope": 1, "G": 1, "H": 1, "J": 1})
    with pytest.raises(ValueError):
        cf.eval_implicit_closed_form(p, 0.5, tol=1e-3)
    # exp(P) is bounded below, so a huge right-hand side needs a huge root
    far = ClosedFormParams(Family.HYPERBOLIC_TANH, (1, 1, 1, 1, 1, 1),
                           {"slope": 1, "G": 1, "H": 1e12, "J": 1})
    with pytest.raises(BracketFailure):
        cf.eval_implicit_closed_form(far, 0.0, window=10.0)


def test_elliptic_non_real_example():
    p = ClosedFormParams(Family.ELLIPTIC_LINEAR, (1.0, 0.0, 0.0), {"D": 0.7, "E": 1.2, "F": 0.7, "G": 1.2})
    with pytest.raises(NonRealResult) as exc:
        cf.eval_elliptic_closed_form(p, 0.3)
    assert exc.value.residue > 1e-3


@pytest.mark.parametrize("family,pot", [("EllipticLinear", (0.6, -0.4, 0.2)),
                                        ("EllipticTanh", (0.3, 0.8, 0.1, 0.2, -0.1, 0.3))])
def test_elliptic_fit_matches_numerics(family, pot):
    init = (0.1, 0.2, 0.3, -0.2)
    params = (cf.fit_linear_closed_form if family.endswith("Linear") else cf.fit_tanh_closed_form)(
        family, pot, init)
    s = np.linspace(0, 1, 11)
    closed = cf.elliptic_path(params, s)
    s_num, num = cf.integrate_block(params, init, (0, 1), s_eval=s[1:])
    assert np.allclose(num, closed, atol=1e-9)
    if family == "EllipticLinear":
        for t in s:
            pt = cf.eval_elliptic_closed_form(params, t)
            assert pt.residue < 1e-9
        # and against the real 4D integrator
        m = SplitMetric(make_constant(0.0, Block.HYPERBOLIC), params.metric_potential())
        path = integrate(m, PhaseState.from_velocity(m, 0, (0, 0, *init[:2]), (0, 0, *init[2:])),
                         (0, 1), s_eval=s[1:])
        assert np.allclose(path.x[:, 2:], closed[:, :2].real, atol=1e-9)


def test_compare_paths_trivial():
    m = SplitMetric(make_constant(0.0, Block.HYPERBOLIC), make_constant(0.0, Block.ELLIPTIC))
    init = PhaseState.from_velocity(m, 0, (0.1, 0.2, 0.3, 0.4), (1, 0.5, -0.2, 0.1))
    path = integrate(m, init, (0, 1))
    err, _ = cf.compare_paths(path, lambda s: np.array([0.1, 0.2, 0.3, 0.4]) + s * np.array([1, 0.5, -0.2, 0.1]))
    assert err < 1e-12
    err, _ = cf.compare_paths(path, lambda s: path.position_at(s))
    assert err == 0


def test_composed_hamiltonian_constant():
    s = np.linspace(0, 1, 11)
    hyp = [cf.fit_linear_closed_form("HyperbolicLinear", (1, 1, 0), (0.1, 0.2, 0.3, 0.1)),
           cf.fit_tanh_closed_form("HyperbolicTanh", (1, 1, 1, 1, 1, 1), (0.1, 0.2, 0.3, 0.1))]
    ell = [cf.fit_linear_closed_form("EllipticLinear", (1, 1, 1), (0.1, 0.2, 0.3, -0.2)),
           cf.fit_tanh_closed_form("EllipticTanh", (1, 1, 1, 1, 1, 1), (0.1, 0.2, 0.3, -0.2))]
    for h in hyp:
        for e in ell:
            vals = cf.composed_hamiltonian(h, e, s)
            assert np.max(np.abs(vals - vals[0])) < 1e-9 * max(1, abs(vals[0]))
