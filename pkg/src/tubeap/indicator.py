"""Radial growth indicator h_f(y): the sup over x of the growth rate of
log|f(x + i r y)| in r.

For a finite exponential sum the indicator is exact: the dominant
exponential along y cannot be cancelled by terms at distinct frequencies,
so h_f(y) = max_n <-y, lambda_n>, which equals the support function of the
spectrum evaluated at -y.  The empirical estimate probes log|f|/r at finite
r for cross-validation.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptySpectrum
from .expsum import ExpSum, evaluate_grid

DEFAULT_R_MAX = 50.0
DEFAULT_PROBES = 64
PL_SLACK = 1e-9


@dataclass(frozen=True)
class IndicatorEstimate:
    y: np.ndarray
    exact: float
    empirical: float
    r_max: float
    x_probes: int


def p_indicator_exact(f: ExpSum, y) -> float:
    """max over term and limit frequencies of <-y, lambda>."""
    y = np.asarray(y, dtype=float)
    if y.shape != (f.dimension,):
        raise DimensionMismatch("direction dimension does not match the sum")
    if np.linalg.norm(y) == 0.0:
        raise ValueError("direction must be nonzero")
    neg_y = -y
    vals = [float(np.dot(lam, neg_y)) for lam in f.frequencies]
    vals += [float(np.dot(lam, neg_y)) for lam in f.limit_frequencies]
    if not vals:
        raise EmptySpectrum("sum has no frequencies")
    return max(vals)


def p_indicator_empirical(
    f: ExpSum,
    y,
    r_max: float = DEFAULT_R_MAX,
    x_probes: int = DEFAULT_PROBES,
    seed: int = 42,
    x_box: float = 50.0,
) -> IndicatorEstimate:
    """max over seeded x-probes of log|f(x + i r_max y)| / r_max."""
    y = np.asarray(y, dtype=float)
    if x_probes < 1:
        raise ValueError("need at least one probe")
    rng = np.random.default_rng(seed)
    X = rng.uniform(-x_box, x_box, size=(x_probes, f.dimension))
    vals = np.abs(evaluate_grid(f, X, r_max * y))
    with np.errstate(divide="ignore"):
        emp = float(np.max(np.log(vals)) / r_max)
    return IndicatorEstimate(
        y=y,
        exact=p_indicator_exact(f, y),
        empirical=emp,
        r_max=r_max,
        x_probes=x_probes,
    )


def normalize(f: ExpSum, y0, sup_bound: float = None) -> ExpSum:
    """Indicator-flattening renormalization along the unit direction y0.

    Multiplies f by e^{i<z, h y0>} with h = h_f(y0) (shifting every
    frequency by h*y0) and divides by a sup bound of |f| on the real
    subspace.  Default bound: sum |b_n|, which is rigorous; with it the sum
    of the new coefficient moduli is <= 1, hence |F| <= 1 on the closed
    tube over directions where the indicator is nonpositive.
    """
    y0 = np.asarray(y0, dtype=float)
    if abs(np.linalg.norm(y0) - 1.0) > 1e-9:
        raise ValueError("y0 must be a unit vector")
    total = float(np.sum(np.abs(f.coefficients)))
    if sup_bound is None:
        sup_bound = total
    else:
        if sup_bound <= 0:
            raise ValueError("sup_bound must be positive")
        if sup_bound < np.max(np.abs(f.coefficients)) - 1e-12:
            raise ValueError(
                "sup_bound is below a single coefficient modulus; it cannot "
                "bound sup |f|"
            )
    h = p_indicator_exact(f, y0)
    shift = h * y0
    lfreqs = (
        f.limit_frequencies + shift if f.limit_frequencies.size else None
    )
    return ExpSum(f.frequencies + shift, f.coefficients / sup_bound, lfreqs)


def pl_bound_check(
    F: ExpSum,
    y,
    t_list,
    x_probes: int = DEFAULT_PROBES,
    seed: int = 42,
    x_box: float = 50.0,
):
    """Check log|F(x + i t y)| <= h_F(y) * t at seeded probes.

    F is expected to be normalized (sum of coefficient moduli <= 1).
    Returns the list of violating probes; an empty list is a pass.
    """
    y = np.asarray(y, dtype=float)
    h = p_indicator_exact(F, y)
    rng = np.random.default_rng(seed)
    violations = []
    for t in t_list:
        if t <= 0:
            raise ValueError("t values must be positive")
        X = rng.uniform(-x_box, x_box, size=(x_probes, F.dimension))
        mags = np.abs(evaluate_grid(F, X, t * y))
        with np.errstate(divide="ignore"):
            logs = np.log(mags)
        bound = h * t + PL_SLACK
        for k in np.flatnonzero(logs > bound):
            violations.append(
                {
                    "t": float(t),
                    "x": X[k].tolist(),
                    "log_abs": float(logs[k]),
                    "bound": float(bound),
                }
            )
    return violations
