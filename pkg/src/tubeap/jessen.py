"""Large-box mean of log|f| (the Jessen function) and its derivatives.

J_f(y) = lim_S (2S)^{-p} int_{[-S,S]^p} log|f(x+iy)| dx.  The integrand is
almost periodic but not band-limited, so estimation uses a seeded
low-discrepancy point set rather than a uniform grid (grids resonate with
the frequencies).  The secular vector is -grad J_f; its one-variable
counterpart is the mean motion of arg f along a horizontal line.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from .errors import AllClipped, DimensionMismatch, NotNegative, StepTooSmall, ZeroOnPath
from .expsum import ExpSum, _term_weights, evaluate_grid

N_BATCHES = 16


@dataclass(frozen=True)
class QuadSpec:
    """Quadrature parameters shared by all Jessen-type estimates."""

    S: float = 2000.0
    n_samples: int = 65536
    seed: int = 42
    clip: float = -40.0


@dataclass(frozen=True)
class JessenEstimate:
    y: np.ndarray
    value: float
    S: float
    n_samples: int
    clipped_fraction: float
    stderr: float


@dataclass(frozen=True)
class SecularEstimate:
    """-grad J_f(y) by central differences, with per-component noise."""

    y: np.ndarray
    vector: np.ndarray
    stderr: np.ndarray
    h: float


@dataclass(frozen=True)
class MeanMotionResult:
    y: np.ndarray
    direction: np.ndarray
    value: float
    x_span: float
    n_steps: int


@dataclass(frozen=True)
class ConvexityReport:
    y1: np.ndarray
    y2: np.ndarray
    left: JessenEstimate
    mid: JessenEstimate
    right: JessenEstimate
    slack: float
    passed: bool


def _low_discrepancy(p, n, seed):
    sampler = qmc.Sobol(d=p, scramble=True, seed=seed)
    m = int(round(math.log2(n)))
    if 2**m == n:
        return sampler.random_base2(m)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return sampler.random(n)


def jessen_estimate(
    f: ExpSum,
    y,
    S: float = QuadSpec.S,
    n_samples: int = QuadSpec.n_samples,
    seed: int = QuadSpec.seed,
    clip: float = QuadSpec.clip,
) -> JessenEstimate:
    """Clipped QMC mean of log|f(x+iy)| over [-S, S]^p.

    Samples with log|f| below clip/2 get one local-refinement level (2^p
    children on the sample's cell) before clipping; this bounds the bias of
    the integrable log singularity near zeros of f.  stderr comes from the
    variance of 16 consecutive sample batches.
    """
    y = np.asarray(y, dtype=float)
    if y.shape != (f.dimension,):
        raise DimensionMismatch("height dimension does not match the sum")
    if S <= 0:
        raise ValueError("S must be positive")
    if n_samples < 100:
        raise ValueError("need at least 100 samples")
    if clip >= 0:
        raise ValueError("clip must be a negative log-floor")
    p = f.dimension
    X = (_low_discrepancy(p, n_samples, seed) - 0.5) * (2.0 * S)
    vals = _log_abs_grid(f, X, y)

    final = vals.copy()
    clipped = np.zeros(n_samples, dtype=bool)
    low = vals < clip / 2.0
    if np.any(low):
        h = 2.0 * S * n_samples ** (-1.0 / p)
        corners = np.stack(
            np.meshgrid(*([np.array([-h / 4.0, h / 4.0])] * p), indexing="ij"),
            axis=-1,
        ).reshape(-1, p)
        idx = np.flatnonzero(low)
        children = (X[idx][:, None, :] + corners[None, :, :]).reshape(-1, p)
        cvals = _log_abs_grid(f, children, y).reshape(len(idx), -1)
        child_clip = cvals < clip
        final[idx] = np.mean(np.maximum(cvals, clip), axis=1)
        clipped[idx] = np.any(child_clip, axis=1)
    plain_clip = (~low) & (vals < clip)
    final[plain_clip] = clip
    clipped |= plain_clip

    if np.all(clipped):
        raise AllClipped("every sample hit the log floor; y sits on a zero set?")
    value = float(np.mean(final))
    batches = final[: (n_samples // N_BATCHES) * N_BATCHES].reshape(N_BATCHES, -1)
    bmeans = batches.mean(axis=1)
    stderr = float(np.std(bmeans, ddof=1) / math.sqrt(N_BATCHES))
    return JessenEstimate(
        y=y,
        value=value,
        S=S,
        n_samples=n_samples,
        clipped_fraction=float(np.mean(clipped)),
        stderr=stderr,
    )


def _log_abs_grid(f, X, y):
    mags = np.abs(evaluate_grid(f, X, y))
    with np.errstate(divide="ignore"):
        return np.log(mags)


def jessen_profile(f: ExpSum, y, R_schedule, quad: QuadSpec = QuadSpec()):
    """Normalized values J_f(R y)/R along the ray through y.

    Returns a list of (R, estimate) pairs; estimate.value is J_f(Ry), not
    yet divided by R.
    """
    y = np.asarray(y, dtype=float)
    if np.linalg.norm(y) == 0.0:
        raise ValueError("profile direction must be nonzero")
    rows = []
    for R in R_schedule:
        if R <= 0:
            raise ValueError("R_schedule must be positive")
        est = jessen_estimate(
            f, R * y, S=quad.S, n_samples=quad.n_samples, seed=quad.seed, clip=quad.clip
        )
        rows.append((float(R), est))
    return rows


def secular_vector(
    f: ExpSum,
    y,
    h: float = None,
    quad: QuadSpec = QuadSpec(),
    noise_floor: float = None,
) -> SecularEstimate:
    """-grad J_f(y) by central differences with step h on each axis.

    Uses one common sample set for both sides of every difference.  The
    guard fires only when a component's difference is below noise while the
    implied gradient noise itself is large on the scale of the spectrum;
    a tight "0 +- tiny" measurement is a valid result, not an error.
    """
    y = np.asarray(y, dtype=float)
    if h is None:
        h = 0.05 * float(np.linalg.norm(y))
    if h <= 0:
        raise ValueError("step h must be positive")
    if noise_floor is None:
        noise_floor = 0.25 * max(1.0, float(np.max(np.abs(f.frequencies))))
    p = f.dimension
    vec = np.zeros(p)
    se = np.zeros(p)
    for j in range(p):
        e = np.zeros(p)
        e[j] = h
        plus = jessen_estimate(
            f, y + e, S=quad.S, n_samples=quad.n_samples, seed=quad.seed, clip=quad.clip
        )
        minus = jessen_estimate(
            f, y - e, S=quad.S, n_samples=quad.n_samples, seed=quad.seed, clip=quad.clip
        )
        diff = plus.value - minus.value
        noise = math.hypot(plus.stderr, minus.stderr)
        se[j] = noise / (2.0 * h)
        if abs(diff) < 3.0 * noise and se[j] > noise_floor:
            raise StepTooSmall(
                f"component {j}: |dJ| = {abs(diff):.3g} below noise {noise:.3g} "
                f"with gradient noise {se[j]:.3g}; increase h or n_samples"
            )
        vec[j] = -diff / (2.0 * h)
    return SecularEstimate(y=y, vector=vec, stderr=se, h=h)


def mean_motion(
    f: ExpSum,
    y,
    direction=None,
    x_span: float = 1e4,
    initial_step: float = None,
) -> MeanMotionResult:
    """Average drift of a continuous branch of arg f along x = t*direction.

    Phase increments are accumulated (never reduced mod 2pi); the step is
    halved wherever a single increment exceeds pi/2.
    """
    y = np.asarray(y, dtype=float)
    if direction is None:
        direction = np.zeros(f.dimension)
        direction[0] = 1.0
    direction = np.asarray(direction, dtype=float)
    if abs(np.linalg.norm(direction) - 1.0) > 1e-9:
        raise ValueError("direction must be a unit vector")
    if x_span <= 0:
        raise ValueError("x_span must be positive")
    fmax = float(np.max(np.abs(f.frequencies @ direction)))
    if initial_step is None:
        initial_step = 0.5 / max(fmax, 1e-6)
    scale = float(np.max(_term_weights(f, y)))

    def values(ts):
        return evaluate_grid(f, np.outer(ts, direction), y)

    t = np.linspace(0.0, x_span, int(math.ceil(x_span / initial_step)) + 1)
    v = values(t)
    _check_off_zero(v, scale, y)
    for _ in range(20):
        d = np.angle(v[1:] / v[:-1])
        bad = np.flatnonzero(np.abs(d) > math.pi / 2.0)
        if bad.size == 0:
            break
        mid_t = 0.5 * (t[bad] + t[bad + 1])
        mid_v = values(mid_t)
        _check_off_zero(mid_v, scale, y)
        t = np.insert(t, bad + 1, mid_t)
        v = np.insert(v, bad + 1, mid_v)
    d = np.angle(v[1:] / v[:-1])
    if np.any(np.abs(d) > math.pi / 2.0):
        # a jump that survives 20 halvings means the branch cannot be
        # continued: f vanishes (or almost) on the tracked line
        raise ZeroOnPath(
            f"phase jump persists after refinement at y = {y.tolist()}; "
            "f has a zero on the tracked line, perturb y"
        )
    return MeanMotionResult(
        y=y,
        direction=direction,
        value=float(np.sum(d) / x_span),
        x_span=x_span,
        n_steps=len(t) - 1,
    )


def _check_off_zero(vals, scale, y):
    bad = np.abs(vals) < 1e-12 * scale
    if np.any(bad):
        raise ZeroOnPath(
            f"|f| below 1e-12 * scale while tracking arg at y = {y.tolist()}; "
            "perturb y"
        )


def convexity_check(f: ExpSum, y1, y2, quad: QuadSpec = QuadSpec()) -> ConvexityReport:
    """Midpoint convexity J((y1+y2)/2) <= (J(y1)+J(y2))/2 up to noise."""
    y1 = np.asarray(y1, dtype=float)
    y2 = np.asarray(y2, dtype=float)
    kw = dict(S=quad.S, n_samples=quad.n_samples, seed=quad.seed, clip=quad.clip)
    left = jessen_estimate(f, y1, **kw)
    right = jessen_estimate(f, y2, **kw)
    mid = jessen_estimate(f, 0.5 * (y1 + y2), **kw)
    slack = 3.0 * (mid.stderr + 0.5 * (left.stderr + right.stderr))
    passed = mid.value <= 0.5 * (left.value + right.value) + slack
    return ConvexityReport(
        y1=y1, y2=y2, left=left, mid=mid, right=right, slack=slack, passed=passed
    )


def lemma2_bound(samples, tolerance: float = None) -> bool:
    """Midpoint vs. mean bound for a convex negative function on [-a, a].

    Checks g(0) >= a^{-1} * (trapezoid integral of g) - tolerance.  Samples
    must include both endpoints; kinks of piecewise-linear g should be
    sampled for the trapezoid rule to be exact.
    """
    pts = sorted((float(t), float(g)) for t, g in samples)
    if len(pts) < 3:
        raise ValueError("need at least 3 samples")
    ts = np.array([t for t, _ in pts])
    gs = np.array([g for _, g in pts])
    if np.any(gs >= 0.0):
        k = int(np.argmax(gs >= 0.0))
        raise NotNegative(f"sample g({ts[k]}) = {gs[k]} is not negative")
    alpha = ts[-1]
    if alpha <= 0 or abs(ts[0] + alpha) > 1e-12 * max(alpha, 1.0):
        raise ValueError("samples must cover a symmetric interval [-a, a]")
    if tolerance is None:
        tolerance = 1e-12 * max(1.0, float(np.max(np.abs(gs))))
    zero_idx = np.flatnonzero(ts == 0.0)
    if zero_idx.size:
        g0 = gs[zero_idx[0]]
    else:
        k = int(np.searchsorted(ts, 0.0))
        t0, t1 = ts[k - 1], ts[k]
        g0 = gs[k - 1] + (gs[k] - gs[k - 1]) * (0.0 - t0) / (t1 - t0)
    integral = float(np.sum(0.5 * np.diff(ts) * (gs[:-1] + gs[1:])))
    return bool(g0 >= integral / alpha - tolerance)
