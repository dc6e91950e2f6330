import math

import numpy as np
import pytest

from bowtie_cap import weights as wm
from bowtie_cap.errors import MalformedSpec, NonIntegrable


def test_constant_profiles_in_the_plane():
    w, w_hat, w_tilde = wm.constant(2).profiles(1.0)
    assert w == pytest.approx(1.0, rel=1e-15)
    assert w_hat == pytest.approx(2 * math.pi, rel=1e-15)
    assert w_tilde == pytest.approx(1.0, rel=1e-15)


def test_inverse_radius_cancels_in_line_weight():
    W = wm.power_log(2, -1.0, 0.0)
    w, w_hat, w_tilde = W.profiles(math.exp(-2.0))
    assert w == pytest.approx(math.e**2, rel=1e-14)
    assert w_hat == pytest.approx(2 * math.pi, rel=1e-14)
    assert w_tilde == pytest.approx(1.0, rel=1e-14)


def test_non_integrable_power_rejected():
    with pytest.raises(NonIntegrable):
        wm.power_log(2, -2.5, 0.0)
    with pytest.raises(NonIntegrable):
        wm.power_log(2, -2.0, 0.0)


def test_staircase_middle_branch():
    W = wm.dyadic_staircase()
    assert W.profiles(0.4)[0] == pytest.approx(0.32, rel=1e-13)
    # the outer branch w = rho starts at 1/2 and the middle branch meets it there
    assert W.profiles(0.5)[0] == pytest.approx(0.5, rel=1e-13)


@pytest.mark.parametrize("k", range(0, 7))
def test_staircase_continuity(k):
    W = wm.dyadic_staircase()
    for x in (wm.staircase_log_radius(k, "alpha"), wm.staircase_log_radius(k, "beta")):
        left, right = W.log_w(x - 1e-9), W.log_w(x + 1e-9)
        assert abs(left - right) < 1e-7


def test_staircase_levels_square():
    for k in range(0, 20):
        assert wm.staircase_log_radius(k + 1) == 2 * wm.staircase_log_radius(k)
        a, b, a1 = wm.staircase_log_radius(k), wm.staircase_log_radius(k, "beta"), wm.staircase_log_radius(k + 1)
        assert a1 < b < a


def test_staircase_depth_bounds():
    with pytest.raises(MalformedSpec):
        wm.dyadic_staircase(2, 0)
    with pytest.raises(MalformedSpec):
        wm.dyadic_staircase(2, 1001)


@pytest.mark.parametrize("n,alpha,beta", [(1, 0.5, -1.0), (2, -1.5, 2.0), (3, 1.0, 0.5)])
def test_profile_identities(n, alpha, beta):
    W = wm.power_log(n, alpha, beta)
    rho = np.logspace(-8, 4, 37)
    assert np.allclose(W.omega * W.w_tilde(rho), W.w_hat(rho), rtol=1e-14)
    assert np.allclose(W.w_tilde(rho), W.w_tilde(-rho), rtol=0)
    expected = rho**alpha * np.maximum(1.0, -np.log(rho)) ** beta
    assert np.allclose(W.w(rho), expected, rtol=1e-12)


def test_sphere_areas():
    assert wm.sphere_area(1) == 2.0
    assert wm.sphere_area(2) == pytest.approx(2 * math.pi)
    assert wm.sphere_area(3) == pytest.approx(4 * math.pi)


def test_approximately_decreasing_power_log():
    # alpha < 0 or alpha = 0 <= beta: w(r) >= c w(r') for r < r'
    rng = np.random.default_rng(3)
    for alpha, beta in ((-0.5, -2.0), (-1.0, 3.0), (0.0, 0.0), (0.0, 2.0)):
        W = wm.power_log(2, alpha, beta)
        r = np.exp(rng.uniform(-30, 5, 400))
        rp = r * np.exp(rng.uniform(0, 20, 400))
        ratio = W.w(r) / W.w(rp)
        # phi**beta with beta < 0 dips at most down to sigma = beta / alpha in sigma = -log rho
        s = beta / alpha if alpha < 0 else 0.0
        c = math.exp(alpha - beta + beta * math.log(s)) if s > 1 else 1.0
        assert ratio.min() >= c * (1 - 1e-12)


def test_piecewise_and_tabulated():
    W = wm.piecewise(
        1,
        [{"lo": 0, "hi": 1, "coef": 2.0, "power": 1.0}, {"lo": 1, "hi": None, "coef": 2.0}],
    )
    assert W.profiles(0.25)[0] == pytest.approx(0.5)
    assert W.profiles(3.0)[0] == pytest.approx(2.0)
    T = wm.tabulated(2, [[0.1, 0.01], [1.0, 1.0], [10.0, 1.0]])
    assert T.profiles(0.01)[0] == pytest.approx(1e-4, rel=1e-12)
    assert T.profiles(0.5)[0] == pytest.approx(0.25, rel=1e-12)
    assert T.profiles(100.0)[0] == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize(
    "spec",
    [
        {"family": "nope"},
        {"family": "power_log", "n": 0},
        {"family": "power_log", "gamma": 1},
        {"family": "piecewise", "n": 1, "segments": [{"lo": 0.5, "hi": None}]},
        {"family": "piecewise", "n": 1, "segments": [{"lo": 0, "hi": 1}, {"lo": 2, "hi": None}]},
        {"family": "piecewise", "n": 1, "segments": [{"lo": 0, "hi": None, "coef": 0}]},
        {"family": "tabulated", "n": 1, "samples": [[1, 1], [0.5, 1]]},
        {"family": "tabulated", "n": 1},
        [1, 2],
    ],
)
def test_malformed_specs(spec):
    with pytest.raises(MalformedSpec):
        wm.build_weight(spec)


def test_load_weight(tmp_path):
    path = tmp_path / "w.json"
    path.write_text('{"family": "power_log", "n": 3, "alpha": 0.5, "beta": -1}')
    W = wm.load_weight(path)
    assert W.summary() == {"family": "power_log", "n": 3, "alpha": 0.5, "beta": -1.0}


def test_weights_are_immutable():
    W = wm.constant(2)
    with pytest.raises(Exception):
        W.n = 3
