import numpy as np
import pytest

from src.errors import LeafCertificationError
from src.geometry import principal_angle, torus_distance
from src.structure import (
    Leg,
    UsPath,
    backward_points,
    build_quadrilateral,
    build_us_loop,
    compute_splitting,
    concatenate,
    forward_points,
    frame_from_plane,
    homoclinic_points,
    hyperbolicity_estimates,
    invariance_defect,
    leaf_membership,
    leaf_pair,
    pair_membership,
    sobol_sample,
)
from src.structure.memo import BoundedCache

from .conftest import ALPHA, UNSTABLE_MODULUS


def test_linear_splitting_is_the_eigenspace(linear):
    s = compute_splitting(linear, [0.3, 0.7, 0.1])
    lin = linear.linear
    assert principal_angle(s.stable_direction, lin.stable_direction) < 1e-9
    assert principal_angle(s.unstable_plane, lin.unstable_frame) < 1e-9


def test_dissipative_splitting_is_invariant(dissipative_map):
    for x in sobol_sample(4, seed=3):
        assert invariance_defect(dissipative_map, x) < 1e-8


def test_frame_is_orthonormal(dissipative_map):
    s = compute_splitting(dissipative_map, [0.2, 0.4, 0.9])
    frame = frame_from_plane(s.unstable_plane, dissipative_map.linear.unstable_frame)
    assert np.allclose(frame.T @ frame, np.eye(2), atol=1e-12)
    assert principal_angle(frame, s.unstable_plane) < 1e-10


def test_linear_hyperbolicity_constants(linear):
    est = hyperbolicity_estimates(linear, sample_size=4, jobs=1)
    assert est.nu_minus == pytest.approx(UNSTABLE_MODULUS, abs=1e-6)
    assert est.nu_plus == pytest.approx(UNSTABLE_MODULUS, abs=1e-6)
    assert est.alpha == pytest.approx(ALPHA, abs=1e-6)
    assert est.stable_bunching == pytest.approx(3.0, abs=1e-5)
    assert est.unstable_bunching == pytest.approx(1.5, abs=1e-5)


def test_sobol_sample_is_deterministic():
    a = sobol_sample(5, seed=11)
    assert a.shape == (5, 3)
    assert np.array_equal(a, sobol_sample(5, seed=11))
    assert np.all((a >= 0.0) & (a < 1.0))


def test_membership_along_eigendirections(linear):
    x = np.array([0.25, 0.5, 0.125])
    stable = 0.05 * linear.linear.stable_direction
    unstable = 0.05 * linear.linear.unstable_frame[:, 0]
    assert leaf_membership(linear, x, "s", displacement=stable).passed
    assert leaf_membership(linear, x, "u", displacement=unstable).passed
    assert not leaf_membership(linear, x, "s", displacement=unstable).passed


def test_leaf_pair_partner_is_on_the_leaf(dissipative_map):
    x = np.array([0.31, 0.62, 0.18])
    pair = leaf_pair(dissipative_map, x, "unstable", parameter=[0.04, -0.02])
    assert pair_membership(pair).passed
    assert leaf_membership(dissipative_map, x, "u", displacement=pair.displacement).passed
    again = leaf_pair(dissipative_map, x, "unstable", displacement=pair.displacement)
    assert np.allclose(again.parameter, pair.parameter, atol=1e-9)


def test_leaf_pair_rejects_off_leaf_displacement(dissipative_map):
    x = np.array([0.31, 0.62, 0.18])
    off = 0.03 * dissipative_map.linear.unstable_frame[:, 0] + 0.02 * dissipative_map.linear.stable_direction
    with pytest.raises(LeafCertificationError):
        leaf_pair(dissipative_map, x, "unstable", displacement=off)


def test_leg_reverse_and_push(linear):
    leg = Leg.local("s", [0.1, 0.2, 0.3], [0.1, 0.2, 0.3] + 0.01 * linear.linear.stable_direction)
    back = leg.reversed()
    assert np.allclose(back.displacement, -leg.displacement)
    assert torus_distance(back.start, leg.end) < 1e-14
    pushed = leg.pushed(linear)
    assert np.allclose(pushed.displacement, linear.linear.matrix @ leg.displacement, atol=1e-14)
    assert pushed.length == pytest.approx(linear.linear.stable_eigenvalue * leg.length)


def test_us_path_requires_shared_endpoints():
    first = Leg.local("s", [0.1, 0.1, 0.1], [0.12, 0.1, 0.1])
    second = Leg.local("u", [0.5, 0.5, 0.5], [0.52, 0.5, 0.5])
    with pytest.raises(LeafCertificationError, match="endpoint"):
        UsPath((first, second))
    with pytest.raises(LeafCertificationError):
        concatenate(UsPath((first,)), UsPath((second,)))


def test_quadrilateral_legs_alternate(dissipative_map):
    quad = build_quadrilateral(dissipative_map, [0.4, 0.3, 0.6], 0.02, (0.03, 0.01))
    assert tuple(leg.kind for leg in quad.legs) == ("s", "u", "s", "u")
    path = quad.validate(dissipative_map)
    assert path.is_loop
    assert all(c.passed for c in path.certificates)


def test_homoclinic_points_lie_on_both_leaves(linear):
    found = homoclinic_points(linear, [0.0, 0.0, 0.0], count=3)
    assert 1 <= len(found) <= 3
    for z in found:
        assert torus_distance(z.u_pair.partner, z.s_pair.partner) < 1e-9
        loop = build_us_loop(linear, [0.0, 0.0, 0.0], z)
        assert loop.is_loop
        assert [leg.kind for leg in loop.legs] == ["u", "s"]


def test_fixed_point_orbits_stay_put(dissipative_map, dissipative_fixed_point):
    back = backward_points(dissipative_map, dissipative_fixed_point, 80)
    fwd = forward_points(dissipative_map, dissipative_fixed_point, 80)
    assert back.shape == fwd.shape == (81, 3)
    assert np.array_equal(back, np.repeat(back[:1], 81, axis=0))
    assert np.array_equal(fwd, back)
    assert torus_distance(back[0], dissipative_fixed_point) < 1e-12


def test_bounded_cache_evicts_the_least_recent_entry():
    cache = BoundedCache(2)
    assert cache.setdefault("a", 1) == 1
    cache.setdefault("b", 2)
    assert cache.get("a") == 1
    cache.setdefault("c", 3)
    assert len(cache) == 2
    assert cache.get("b") is None
    assert cache.setdefault("a", 10) == 1
    cache.clear()
    assert len(cache) == 0
