import numpy as np
import pytest

from contractionkit.certificates import certify_contraction, example1_weight
from contractionkit.models import (
    Box,
    DiffusionSpec,
    build_system,
    example1,
    example2,
    fd_jacobian,
    linear_system,
    validate_jacobian,
)


def test_example1_jacobian_at_saturation():
    sys = example1(1, 1, 1, 1, 1)
    np.testing.assert_allclose(sys.jac(np.array([0.0, 1.0])), [[-1, 1], [0, -1]])


def test_example1_jacobian_at_origin():
    S_Y, k1, k2, delta = 2.0, 0.7, 1.3, 0.4
    sys = example1(S_Y, k1, k2, delta, 1.0)
    expected = [[-delta - k2 * S_Y, k1], [k2 * S_Y, -k1]]
    np.testing.assert_allclose(sys.jac(np.array([0.0, 0.0])), expected)


def test_example1_decoupled_equilibrium():
    z, delta = 2.0, 0.5
    sys = example1(S_Y=1.0, k1=1.0, k2=0.0, delta=delta, z=z)
    F = sys(np.array([z / delta, 0.0]))
    np.testing.assert_allclose(F, [0.0, 0.0], atol=1e-15)


@pytest.mark.parametrize("bad", [dict(S_Y=0), dict(k1=-1), dict(delta=0), dict(k2=-0.1), dict(z=-1)])
def test_example1_rejects_bad_parameters(bad):
    with pytest.raises(ValueError):
        example1(**bad)


def test_example1_field_formula(rng):
    S_Y, k1, k2, delta, z = 1.5, 0.8, 1.2, 0.6, 0.3
    sys = example1(S_Y, k1, k2, delta, z)
    for _ in range(20):
        x, y = rng.uniform(0, 5), rng.uniform(0, S_Y)
        F = sys(np.array([x, y]))
        assert F[0] == pytest.approx(z - delta * x + k1 * y - k2 * (S_Y - y) * x)
        assert F[1] == pytest.approx(-k1 * y + k2 * (S_Y - y) * x)


def test_example2_jacobian_at_zero():
    sys = example2(0.5, 0.1, 1.0)
    np.testing.assert_allclose(sys.jac(np.array([3.0, 0.0])), [[-1, 0], [0.5, -1]])


def test_example2_condition_one_value():
    dec = example2(0.5, 0.1, 1.0).decomposition
    xs = np.linspace(0, 10, 11)
    np.testing.assert_allclose(-dec.df1(xs) + dec.df2(xs), -0.5)


def test_example2_field_and_jacobian(rng):
    delta, eps, d = 0.3, 0.2, 2.0
    sys = example2(delta, eps, d)
    x, y = 1.7, 2.3
    F = sys(np.array([x, y]))
    assert F[0] == pytest.approx(-x + y ** (2 + eps))
    assert F[1] == pytest.approx(delta * x - (y**3 + y ** (2 + eps) + d * y))
    J = sys.jac(np.array([x, y]))
    np.testing.assert_allclose(J, [[-1, (2 + eps) * y ** (1 + eps)],
                                   [delta, -(3 * y**2 + (2 + eps) * y ** (1 + eps) + d)]])


@pytest.mark.parametrize("bad", [dict(delta=1.0), dict(delta=0.0), dict(epsilon=0.0),
                                 dict(epsilon=0.6), dict(d=0.0)])
def test_example2_rejects_bad_parameters(bad):
    with pytest.raises(ValueError):
        example2(**bad)


def test_linear_system_examples():
    sys = linear_system(np.diag([-1.0, -2.0]), [1.0, 2.0])
    np.testing.assert_allclose(sys(np.array([1.0, 1.0])), [0.0, 0.0])
    np.testing.assert_array_equal(sys.jac(np.zeros((3, 2))), np.broadcast_to(np.diag([-1.0, -2.0]), (3, 2, 2)))
    with pytest.raises(ValueError):
        linear_system(np.ones((2, 3)))
    with pytest.raises(ValueError):
        linear_system(np.eye(2), [1.0, 2.0, 3.0])


def test_validate_jacobian_linear_is_exact(rng):
    # no truncation error for an affine map; what remains is roundoff ~ eps |F| / step
    A = rng.standard_normal((3, 3))
    sys = linear_system(A, rng.standard_normal(3))
    assert validate_jacobian(sys, h=1e-4).max_rel_dev <= 1e-10
    rep = validate_jacobian(sys)
    assert rep.passed and rep.max_rel_dev <= 1e-8


@pytest.mark.parametrize("sys", [example1(), example2(),
                                 example1(2.0, 0.5, 3.0, 0.2, 1.0), example2(0.9, 0.5, 0.1)],
                         ids=lambda s: s.label)
def test_builtin_systems_pass_validation(sys):
    rep = validate_jacobian(sys, samples=200, seed=1)
    assert rep.passed, rep


def test_validate_jacobian_catches_wrong_jacobian():
    good = example1()
    bad = type(good)(n=2, box=good.box, F=good.F, jac=lambda u, t=0.0: good.jac(u, t) * 1.01,
                     params=good.params, label="broken")
    assert not validate_jacobian(bad).passed


def test_example1_entry_ranges(rng):
    S_Y, k1, k2 = 2.0, 0.5, 1.5
    sys = example1(S_Y, k1, k2, 1.0, 1.0)
    pts = sys.box.sample_interior(rng, 1000)
    pts[:10, 1] = [0, S_Y] * 5
    J = sys.jac(pts)
    a, b = J[:, 1, 0], J[:, 0, 1]
    assert np.all((a >= 0) & (a <= k2 * S_Y))
    assert np.all(b >= k1)


def test_example2_decomposition_signs(rng):
    d = 0.7
    sys = example2(0.5, 0.1, d)
    pts = sys.box.sample_interior(rng, 1000)
    x, y = pts[:, 0], pts[:, 1]
    dec = sys.decomposition
    for f in (dec.f1(x), dec.f2(x), dec.g1(y), dec.g2(y)):
        assert np.all(f >= 0)
    assert np.all(dec.dg2(y) >= d)
    assert np.all(dec.dg2(np.array([0.0])) == d)


def test_inflow_is_certificate_neutral():
    w = example1_weight(1.0, 1.0, 0.25)
    D = DiffusionSpec.uniform(2)
    mus = [certify_contraction(example1(z=z), w, D).mu_sup for z in (0.0, 1.0, 7.5)]
    assert mus[0] == mus[1] == mus[2]


def test_box_sampling_respects_window(rng):
    box = Box([0.0, 1.0], [np.inf, 2.0])
    pts = box.sample_interior(rng, 500, window=(0.01, 100.0))
    assert np.all(pts[:, 0] >= 0.01) and np.all(pts[:, 0] <= 100.0)
    assert np.all((pts[:, 1] > 1.0) & (pts[:, 1] < 2.0))
    with pytest.raises(ValueError):
        Box([1.0], [0.0])


def test_fd_jacobian_matches_on_example2():
    sys = example2()
    x = np.array([1.0, 3.0])
    np.testing.assert_allclose(fd_jacobian(sys, x), sys.jac(x), rtol=1e-6)


def test_build_system_registry():
    assert build_system("example1", {"k1": 2.0}).params["k1"] == 2.0
    with pytest.raises(ValueError):
        build_system("nope")


def test_diffusion_spec_positive():
    with pytest.raises(ValueError):
        DiffusionSpec([1.0, 0.0])
    np.testing.assert_array_equal(DiffusionSpec([1.0, 2.0]).matrix, np.diag([1.0, 2.0]))
