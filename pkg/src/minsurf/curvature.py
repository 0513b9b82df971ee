"""Generic curvature engine: Christoffel symbols, Ricci tensor and scalar
curvature of a metric known together with its first and second derivatives
along the first two coordinates (all remaining directions are flat by
construction), plus an independent finite-difference Ricci oracle.

Index conventions: R^a_{bcd} = d_c Gamma^a_{db} - d_d Gamma^a_{cb}
+ Gamma^a_{ce} Gamma^e_{db} - Gamma^a_{de} Gamma^e_{cb}, Ricci contracted on
the first and third slots.  The round sphere then has positive scalar
curvature (2/a^2), which the test suite pins.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class SingularMetric(ValueError):
    """Metric is not invertible (or numerically indistinguishable from it)."""


@dataclass(frozen=True)
class MetricJet:
    """A metric at one point with derivatives along x^1, x^2.

    components: (dim, dim) symmetric; d1[e] = d_e g; d2[e1, e2] = d_e1 d_e2 g.
    Derivatives along all other coordinate directions vanish.
    """

    dim: int
    components: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    point: tuple = (0.0, 0.0)


@dataclass(frozen=True)
class CurvatureReport:
    christoffel: np.ndarray  # Gamma^a_{bc}, shape (dim, dim, dim)
    ricci: np.ndarray        # R_{ab}, shape (dim, dim)
    scalar: float
    max_abs_ricci: float
    normalized_ricci: float
    point: tuple


def _pad1(comp, d1):
    """Embed the two x-direction first derivatives into a full-dim array."""
    dim = comp.shape[-1]
    dfull = np.zeros(comp.shape[:-2] + (dim, dim, dim))
    dfull[..., :2, :, :] = d1
    return dfull


def _pad2(comp, d2):
    dim = comp.shape[-1]
    d2full = np.zeros(comp.shape[:-2] + (dim, dim, dim, dim))
    d2full[..., :2, :2, :, :] = d2
    return d2full


def _inverse(comp):
    det = np.linalg.det(comp)
    if not np.all(np.isfinite(det)) or np.any(np.abs(det) < 1e-300):
        raise SingularMetric("metric determinant vanishes")
    return np.linalg.inv(comp)


def christoffel_arrays(comp, d1):
    """Batched Gamma^a_{bc} = 1/2 g^{ad} (d_b g_{dc} + d_c g_{db} - d_d g_{bc})."""
    gi = _inverse(comp)
    dfull = _pad1(comp, d1)
    S = (np.einsum("...bdc->...dbc", dfull) + np.einsum("...cdb->...dbc", dfull) - dfull)
    return 0.5 * np.einsum("...ad,...dbc->...abc", gi, S)


def ricci_arrays(comp, d1, d2):
    """Batched Ricci computation.

    Returns (gamma, ricci, scalar, denom) where denom is the conditioning
    scale 1 + max|d2 g| + max|Gamma|^2 used for normalized residuals.
    """
    gi = _inverse(comp)
    dfull, d2full = _pad1(comp, d1), _pad2(comp, d2)
    S = (np.einsum("...bdc->...dbc", dfull) + np.einsum("...cdb->...dbc", dfull) - dfull)
    gamma = 0.5 * np.einsum("...ad,...dbc->...abc", gi, S)
    dgi = -np.einsum("...ab,...ebc,...cd->...ead", gi, dfull, gi)
    dS = (np.einsum("...ebdc->...edbc", d2full) + np.einsum("...ecdb->...edbc", d2full) - d2full)
    dgamma = 0.5 * (np.einsum("...ead,...dbc->...eabc", dgi, S)
                    + np.einsum("...ad,...edbc->...eabc", gi, dS))
    # R_{bd} = d_a Gamma^a_{db} - d_d Gamma^a_{ab} + Gamma^a_{ae} Gamma^e_{db}
    #          - Gamma^a_{de} Gamma^e_{ab}
    ricci = (np.einsum("...iidb->...bd", dgamma)
             - np.einsum("...diib->...bd", dgamma)
             + np.einsum("...iie,...edb->...bd", gamma, gamma)
             - np.einsum("...ide,...eib->...bd", gamma, gamma))
    scalar = np.einsum("...bd,...bd->...", gi, ricci)
    batch_axes = tuple(range(-4, 0)), tuple(range(-3, 0))
    denom = (1.0 + np.abs(d2).max(axis=batch_axes[0])
             + np.abs(gamma).max(axis=batch_axes[1]) ** 2)
    return gamma, ricci, scalar, denom


def christoffel(m: MetricJet) -> np.ndarray:
    return christoffel_arrays(m.components, m.d1)


def ricci(m: MetricJet) -> CurvatureReport:
    """Full curvature report for one metric point."""
    gamma, ric, scalar, denom = ricci_arrays(m.components, m.d1, m.d2)
    max_abs = float(np.abs(ric).max())
    return CurvatureReport(
        christoffel=gamma,
        ricci=ric,
        scalar=float(scalar),
        max_abs_ricci=max_abs,
        normalized_ricci=max_abs / float(denom),
        point=m.point,
    )


# ---------------------------------------------------------------------------
# built-in test metrics with textbook curvature
# ---------------------------------------------------------------------------

def flat_metric(p, signs=(1, 1)) -> MetricJet:
    """Constant diagonal metric; identically zero curvature."""
    dim = len(signs)
    return MetricJet(dim, np.diag(np.asarray(signs, dtype=float)),
                     np.zeros((2, dim, dim)), np.zeros((2, 2, dim, dim)), tuple(p))


def polar_metric(p) -> MetricJet:
    """diag(1, x^2): flat plane in polar form, x playing the radius."""
    x, _ = p
    comp = np.diag([1.0, x ** 2])
    d1 = np.zeros((2, 2, 2))
    d1[0, 1, 1] = 2.0 * x
    d2 = np.zeros((2, 2, 2, 2))
    d2[0, 0, 1, 1] = 2.0
    return MetricJet(2, comp, d1, d2, tuple(p))


def sphere_metric(p, a=1.0) -> MetricJet:
    """diag(a^2, a^2 sin^2 x): round sphere of radius a; scalar 2/a^2."""
    x, _ = p
    comp = np.diag([a ** 2, (a * np.sin(x)) ** 2])
    d1 = np.zeros((2, 2, 2))
    d1[0, 1, 1] = a ** 2 * np.sin(2.0 * x)
    d2 = np.zeros((2, 2, 2, 2))
    d2[0, 0, 1, 1] = 2.0 * a ** 2 * np.cos(2.0 * x)
    return MetricJet(2, comp, d1, d2, tuple(p))


def ricci_fd(metric_field, p, step: float) -> np.ndarray:
    """Independent Ricci oracle: second-order central differences of the
    metric components, fed through the same tensor algebra.

    ``metric_field(x, y)`` must return the (dim, dim) component matrix; the
    metric may depend on the first two coordinates only.
    """
    x, y = p
    s = float(step)

    def m(dx=0.0, dy=0.0):
        return np.asarray(metric_field(x + dx, y + dy), dtype=float)

    g0 = m()
    dim = g0.shape[0]
    d1 = np.stack([(m(dx=s) - m(dx=-s)) / (2 * s), (m(dy=s) - m(dy=-s)) / (2 * s)])
    dxx = (m(dx=s) - 2 * g0 + m(dx=-s)) / s ** 2
    dyy = (m(dy=s) - 2 * g0 + m(dy=-s)) / s ** 2
    dxy = (m(s, s) - m(s, -s) - m(-s, s) + m(-s, -s)) / (4 * s ** 2)
    d2 = np.array([[dxx, dxy], [dxy, dyy]])
    _, ric, _, _ = ricci_arrays(g0, d1, d2)
    return ric
