import math
import warnings

import numpy as np
import pytest

from ampmask.errors import ConsistencyError, PreconditionError, ValidationError
from ampmask.gaussian import (
    GaussianParams,
    UncodedScheme,
    cd_curve,
    cd_gaussian,
    gap_ra,
    gap_rl,
    matched_sigma_x,
    outer_point,
    outer_region,
    rarl_difference_bound,
    scheme_grid,
    uncoded_point,
    uncoded_region,
)

from conftest import GAUSS_CD

GP = GaussianParams(10.0, 1.0, 5.0, 10.0)


def _schemes(gp, n):
    for rho in np.linspace(-1, 1, n):
        for sx in np.sqrt(np.linspace(0, gp.power, n)):
            yield UncodedScheme(float(rho), float(sx))


def test_validation():
    with pytest.raises(ValidationError):
        GaussianParams(0.0, 1.0, 1.0, 1.0)
    with pytest.raises(ValidationError):
        UncodedScheme(1.5, 1.0)
    with pytest.raises(ValidationError):
        uncoded_point(GP, UncodedScheme(0.0, 4.0))


def test_cd_value():
    assert cd_gaussian(GP).c_d == pytest.approx(GAUSS_CD, abs=1e-12)
    assert cd_gaussian(GP).c_d == pytest.approx(0.5 * math.log2(41 / 9), abs=1e-12)
    with pytest.raises(PreconditionError):
        cd_gaussian(GaussianParams(10.0, 5.0, 1.0, 10.0))


def test_cd_is_max_of_difference_bound():
    rho = np.linspace(-1, 1, 401)
    sx = np.sqrt(GP.power) * np.linspace(0, 1, 401)
    best = max(rarl_difference_bound(GP, UncodedScheme(float(r), float(s)))
               for r in rho[::8] for s in sx[::8])
    # the maximiser sits on the grid corner rho = 1, sigma_x = sqrt(P)
    assert best == pytest.approx(cd_gaussian(GP).c_d, abs=1e-6)


def test_cd_curve_monotone():
    rows = cd_curve(10.0, 1.0, 5.0, np.linspace(-10, 20, 16))
    vals = [c for _, _, c in rows]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    assert rows[0][1] == pytest.approx(0.1)


def test_inner_inside_outer():
    for gp in (GP, GaussianParams(1.0, 2.0, 0.5, 3.0)):
        for sch in _schemes(gp, 25):
            u = uncoded_point(gp, sch)
            o = outer_point(gp, sch).point
            assert o.r_a >= u.r_a - 1e-12
            assert o.r_l <= u.r_l + 1e-12


def test_gap_identity():
    for sch in _schemes(GP, 50):
        diff = outer_point(GP, sch).point.r_a - uncoded_point(GP, sch).r_a
        assert gap_ra(GP, sch) == pytest.approx(diff, abs=1e-12)


def test_gap_zero_at_full_correlation():
    for rho in (-1.0, 1.0):
        for sx in np.sqrt(np.linspace(0, GP.power, 11)):
            sch = UncodedScheme(rho, float(sx))
            assert abs(gap_ra(GP, sch)) <= 1e-12
            assert abs(gap_rl(GP, sch)) <= 1e-12


def test_half_bit_gaps():
    gp = GaussianParams(4.0, 2.0, 3.0, 1.5)
    assert max(gap_ra(gp, s) for s in _schemes(gp, 60)) <= 0.5 + 1e-9
    assert max(gap_rl(gp, s) for s in _schemes(gp, 60)) <= 0.5 + 1e-9


def test_uncoded_region_below_cd():
    f = uncoded_region(GP, grid=101)
    assert f.max_difference() <= GAUSS_CD + 1e-9
    assert f.max_difference() >= GAUSS_CD - 1e-3


def test_zero_leakage_scheme_in_grid():
    rho, sx = scheme_grid(GP, 5)
    assert rho[-1] == -1.0 and sx[-1] == pytest.approx(GP.sigma_s)
    u = uncoded_point(GP, UncodedScheme(-1.0, GP.sigma_s))
    assert u.r_l == pytest.approx(0.0, abs=1e-12)
    assert uncoded_region(GP, grid=11).r_l.min() == pytest.approx(0.0, abs=1e-12)


def test_outer_region_covers_uncoded():
    inner = uncoded_region(GP, grid=41)
    outer = outer_region(GP, grid=41)
    for p in inner:
        assert outer.covers(p, tol=1e-9)


def test_matched_sigma_examples():
    gp = GaussianParams(1.0, 1.0, 2.0, 4.0)
    assert matched_sigma_x(gp, UncodedScheme(1.0, 2.0)) == pytest.approx(2.0, abs=1e-12)
    assert matched_sigma_x(gp, UncodedScheme(1.0, 0.0)) == pytest.approx(0.0, abs=1e-15)
    assert matched_sigma_x(gp, UncodedScheme(0.5, 1.0)) == pytest.approx(math.sqrt(3) - 1, abs=1e-12)


def test_matched_sigma_reproduces_outer_amplification():
    for sch in _schemes(GP, 30):
        if sch.rho <= 0:
            continue
        t = matched_sigma_x(GP, sch)
        pure = uncoded_point(GP, UncodedScheme(1.0, t))
        assert pure.r_a == pytest.approx(outer_point(GP, sch).point.r_a, abs=1e-12)


def test_matched_sigma_rho_zero_warns():
    gp = GaussianParams(1.0, 1.0, 2.0, 4.0)
    with pytest.warns(RuntimeWarning):
        t = matched_sigma_x(gp, UncodedScheme(0.0, 1.0))
    assert t**2 + 2 * t == pytest.approx(1.0, abs=1e-12)


def test_matched_sigma_negative_rho_without_root():
    # t^2 - 2t = 6 needs t = 1 + sqrt(7) > sqrt(P) = 3
    gp = GaussianParams(1.0, 1.0, 2.0, 9.0)
    with pytest.raises(ConsistencyError):
        matched_sigma_x(gp, UncodedScheme(-0.5, 3.0))


def test_matched_sigma_negative_rho_with_root():
    gp = GaussianParams(1.0, 1.0, 2.0, 9.0)
    sch = UncodedScheme(-0.5, 1.0)
    # t^2 - 2t = 0: both 0 and 2 are admissible, the smaller one is returned
    t = matched_sigma_x(gp, sch)
    assert t == pytest.approx(0.0, abs=1e-12)
    pure = uncoded_point(gp, UncodedScheme(-1.0, t))
    assert pure.r_a == pytest.approx(outer_point(gp, sch).point.r_a, abs=1e-12)
