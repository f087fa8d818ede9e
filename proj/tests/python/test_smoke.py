import math
import os
import sys

sys.path.insert(0, os.environ.get("KPERT_PKG_DIR", "python"))

import kpert


def test_beta_kernel_value():
    k = kpert.beta_kernel(0.5)
    assert abs(k(0.0, 0.0, 1.0, 0.0) - 1.0 / math.sqrt(math.pi)) < 1e-12


def test_series_matches_closed_form():
    eng = kpert.SeriesEngine(
        kpert.beta_kernel(0.5),
        kpert.constant_potential(1.0),
        kpert.StateSpace.single_point(),
    )
    for n in range(5):
        got = eng.eval_kn(n, 0.0, 0.0, 1.0, 0.0)
        want = kpert.beta_kernel_closed_form(0.5, 1.0, n, 0.0, 1.0)
        assert abs(got.value - want) <= 1e-6 * want


def test_certificate_and_envelope():
    eng = kpert.SeriesEngine(
        kpert.beta_kernel(0.5),
        kpert.constant_potential(1.0),
        kpert.StateSpace.single_point(),
    )
    grid = kpert.SpaceTimeGrid(
        kpert.StateSpace.single_point(), [0.0, 0.5, 1.0], [0.0]
    )
    cert = kpert.fit_affine_control(eng, grid)
    assert cert.valid
    table = eng.eval_series(grid, 6)
    rep = kpert.verify_envelope(table, cert.control)
    assert rep.violations == 0
    assert abs(kpert.envelope(0.0, 1.0) - math.e) < 1e-12
    assert kpert.envelope(0.5, 0.0) == 2.0


def test_three_p():
    grid = kpert.SpaceTimeGrid(
        kpert.StateSpace.single_point(), [i / 8.0 for i in range(9)], [0.0]
    )
    res = kpert.three_p_constant(kpert.beta_kernel(0.5), grid)
    assert abs(res.sup - math.sqrt(2.0)) < 1e-9


def test_weyl_residual():
    phi = kpert.bump(-1.0, 1.0)
    res = kpert.left_inverse_residual(phi, 0.5, [-2.0, -1.0, 0.0, 0.5])
    assert res < 1e-3


def test_forward_guard_raises():
    k = kpert.beta_kernel(0.5)
    try:
        k(1.0, 0.0, 0.5, 0.0)
    except kpert.PreconditionError:
        pass
    else:
        raise AssertionError("expected PreconditionError")
