import itertools
import math

import numpy as np
import pytest
from conftest import interior_points

from minsurf import assembly, curvature, geometry2d, surfaces
from minsurf.assembly import (AssemblyConfig, assemble, conformal_factor,
                              log_domain_ok, signature)
from minsurf.geometry2d import SurfaceFrame, TwoMetricSample, sample
from minsurf.jets import DomainError
from minsurf.surfaces import bi_wave, plane, scherk


def test_config_constraints_and_dimension():
    cfg = AssemblyConfig(3, (1, -1, 1), 0.3, 0.7, 0.4)
    assert cfg.m1 + cfg.m2 == 0.0
    assert cfg.n1 + cfg.n2 == pytest.approx((cfg.n - 1) / 2.0)
    assert cfg.dim == 2 + 2 * cfg.n == 8
    # dimension count 2N = 4 + 4 (n1 + n2)
    assert cfg.dim == pytest.approx(4 + 4 * (cfg.n1 + cfg.n2))


def test_config_validation_errors():
    with pytest.raises(ValueError):
        AssemblyConfig(0, ())
    with pytest.raises(ValueError):
        AssemblyConfig(2, (1,))
    with pytest.raises(ValueError):
        AssemblyConfig(1, (2,))


def test_conformal_factor_instanton_is_one():
    cfg = AssemblyConfig(1, (1,), 0.0, 0.0, 0.0)
    for spec in (scherk(), plane(), bi_wave()):
        for x, y in interior_points(spec, 10, seed=2):
            s = sample(spec, (x, y))
            assert conformal_factor(s, cfg, 123.0) == 1.0


def test_conformal_factor_plane_n3_closed_form():
    cfg = AssemblyConfig(3, (1, 1, 1), 0.0, 0.0, 1.0)  # n2 = 0
    spec = plane()  # constant gradient (0.5, -0.25)
    s = sample(spec, (0.1, 0.9))
    expected = s.rho ** 1.0 * s.w1 ** -2.0 * s.w2 ** 0.0
    assert conformal_factor(s, cfg, 0.0) == pytest.approx(expected, rel=1e-14)


def test_conformal_factor_scherk_n2_closed_form():
    cfg = AssemblyConfig(2, (1, 1), 0.0, 0.0, 0.5)  # n2 = 0
    s = sample(scherk(), (0.3, 0.2))
    expected = math.sqrt(s.rho) / (1.0 / math.cos(0.3) ** 2)
    assert conformal_factor(s, cfg, 0.0) == pytest.approx(expected, rel=1e-13)
    assert conformal_factor(s, cfg, 0.0) == pytest.approx(math.sqrt(1.13678) / (1 / math.cos(0.3) ** 2), abs=1e-5)


def test_conformal_factor_domain_error_on_negative_base():
    bad = TwoMetricSample(h=np.eye(2), rho=1.0, h_inv=np.eye(2), g=np.eye(2),
                          g_inv=np.eye(2), r=np.zeros((2, 2)), K=0.0, H=0.0,
                          lambda0=0.0, xi1=1.0, xi2=1.0, w1=1.0, w2=-0.5, psi0=0.0)
    cfg = AssemblyConfig(2, (1, 1), 0.0, 0.0, 0.25)  # fractional w2 exponent
    with pytest.raises(DomainError):
        conformal_factor(bad, cfg, 0.0)
    # integer exponents accept negative bases
    cfg_int = AssemblyConfig(3, (1, 1, 1), 0.0, 0.0, 0.5)  # exponents -1, -1, 1
    assert conformal_factor(bad, cfg_int, 0.0) == pytest.approx(1.0 / (1.0 * -0.5), rel=1e-14)


def test_log_domain_mask():
    cfg = AssemblyConfig(2, (1, 1), 0.0, 0.0, 0.25)
    ok = log_domain_ok(np.array([1.0, 1.0]), np.array([1.0, -1.0]), np.array([1.0, 1.0]), cfg)
    np.testing.assert_array_equal(ok, [True, False])
    cfg_int = AssemblyConfig(1, (1,), 0.0, 1.0, 0.0)
    assert log_domain_ok(np.array([1.0]), np.array([-2.0]), np.array([3.0]), cfg_int).all()


def test_assemble_plane_has_constant_metric():
    # w1, w2, rho and g are constant on a plane; with e0 = 0 the whole
    # assembled metric is constant (e0 != 0 makes e^{2 e0 phi} vary)
    m = assemble(plane(), AssemblyConfig(2, (1, -1), 0.0, 1.0, 0.5), (0.3, -0.2))
    assert np.abs(m.d1).max() == 0.0
    assert np.abs(m.d2).max() == 0.0
    assert m.dim == 6
    varying = assemble(plane(), AssemblyConfig(2, (1, -1), 0.3, 1.0, 0.5), (0.3, -0.2))
    assert np.abs(varying.d1).max() > 0.0


def test_assemble_scherk_instanton_blocks():
    s = sample(scherk(), (0.3, 0.2))
    m = assemble(scherk(), AssemblyConfig(1, (1,), 0.0, 0.0, 0.0), (0.3, 0.2))
    expected = np.zeros((4, 4))
    expected[:2, :2] = s.g
    expected[2:, 2:] = s.g
    np.testing.assert_allclose(m.components, expected, rtol=1e-14, atol=1e-16)


def test_assemble_derivatives_match_finite_differences():
    """d1/d2 vs central differences of the components at steps 1e-3 and
    1e-4: the finer step matches to 1e-5 relative, and the error shrinks
    with the step (Richardson direction)."""
    spec = scherk()
    cfg = AssemblyConfig(2, (1, -1), 0.3, 1.0, 0.25)
    p = (0.3, 0.2)
    m = assemble(spec, cfg, p)

    def comp(x, y):
        return assemble(spec, cfg, (x, y)).components

    for axis in (0, 1):
        errs = {}
        for s in (1e-3, 1e-4):
            dp = (s, 0.0) if axis == 0 else (0.0, s)
            fd = (comp(p[0] + dp[0], p[1] + dp[1]) - comp(p[0] - dp[0], p[1] - dp[1])) / (2 * s)
            errs[s] = np.abs(fd - m.d1[axis]).max()
        scale = max(1.0, np.abs(m.d1[axis]).max())
        assert errs[1e-4] <= 1e-5 * scale
        assert errs[1e-3] > errs[1e-4]

    for (a, b) in ((0, 0), (1, 1), (0, 1)):
        errs = {}
        for s in (1e-3, 1e-4):
            if a == b:
                dp = (s, 0.0) if a == 0 else (0.0, s)
                fd = (comp(p[0] + dp[0], p[1] + dp[1]) - 2 * comp(*p)
                      + comp(p[0] - dp[0], p[1] - dp[1])) / s ** 2
            else:
                fd = (comp(p[0] + s, p[1] + s) - comp(p[0] + s, p[1] - s)
                      - comp(p[0] - s, p[1] + s) + comp(p[0] - s, p[1] - s)) / (4 * s ** 2)
            errs[s] = np.abs(fd - m.d2[a, b]).max()
        scale = max(1.0, np.abs(m.d2[a, b]).max())
        assert errs[1e-3] <= 1e-5 * scale  # 1e-4 second differences hit round-off
        np.testing.assert_allclose(m.d2[a, b], m.d2[b, a])


def test_determinant_invariant():
    cases = [
        (scherk(), AssemblyConfig(2, (1, -1), 0.3, 1.0, 0.25), (0.3, 0.2)),
        (surfaces.helicoid(), AssemblyConfig(2, (1, 1), 0.3, 0.0, 0.5), (0.7, 0.4)),
        (surfaces.catenoid(), AssemblyConfig(1, (-1,), 0.3, 1.0, 0.0), (1.5, 0.3)),
        (bi_wave(), AssemblyConfig(3, (1, -1, 1), 0.0, 0.0, 0.25), (0.7, 0.5)),
    ]
    for spec, cfg, p in cases:
        m = assemble(spec, cfg, p)
        fr = geometry2d.SurfaceFrame(spec, np.atleast_1d(p[0]), np.atleast_1d(p[1]))
        e2 = assembly.conformal_factor_jet(fr, cfg).value[0]
        predicted = e2 ** 2 * abs(spec.ambient.det) ** (1 + cfg.n)
        assert abs(np.linalg.det(m.components)) == pytest.approx(predicted, rel=1e-10)


def test_assembled_metrics_ricci_flat_spot_checks():
    cases = [
        (scherk(), AssemblyConfig(1, (-1,), 0.3, 1.0, 0.0), (0.3, 0.2)),
        (surfaces.helicoid(), AssemblyConfig(2, (1, 1), 0.3, 0.0, 0.5), (0.7, 0.4)),
        (bi_wave(), AssemblyConfig(2, (1, -1), 0.3, 1.0, 0.25), (0.7, 0.5)),
        (plane(), AssemblyConfig(3, (1, -1, -1), 0.3, 1.0, 0.25), (0.1, 0.8)),
    ]
    for spec, cfg, p in cases:
        rep = curvature.ricci(assemble(spec, cfg, p))
        assert rep.normalized_ricci < 1e-12, spec.name


def test_signature_formula_and_constancy():
    assert signature(scherk(), AssemblyConfig(1, (1,), 0.0, 0.0, 0.0), (0.3, 0.2)) == 4
    assert signature(scherk(), AssemblyConfig(1, (-1,), 0.0, 0.0, 0.0), (0.3, 0.2)) == 0
    assert signature(bi_wave(), AssemblyConfig(2, (1, -1), 0.0, 0.0, 0.0), (0.7, 0.5)) == 0
    # constant across admissible sample points for a fixed (spec, cfg);
    # catenoid is Euclidean (surface signature 2): 2 (1 - 1 + 1) = 2
    spec = surfaces.catenoid()
    cfg = AssemblyConfig(2, (-1, 1), 0.3, 1.0, 0.25)
    sigs = {signature(spec, cfg, p) for p in interior_points(spec, 10, seed=9)}
    assert sigs == {2}


def test_signature_all_eps_patterns_scherk_n2():
    for eps in itertools.product((1, -1), repeat=2):
        cfg = AssemblyConfig(2, eps, 0.0, 0.0, 0.0)
        expected = 2 * (1 + sum(eps))
        assert signature(scherk(), cfg, (0.5, -0.4)) == expected
