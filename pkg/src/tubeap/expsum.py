"""Finite exponential sums f(z) = sum_n b_n exp(i<z, lambda_n>) on tube domains.

The modelled class is finite sums plus truncated series that carry their
accumulation frequencies as metadata (``limit_frequencies``).  Limit
frequencies never contribute to evaluation; they only enter spectrum
classification and support-function computations.
"""

import math
from dataclasses import dataclass

import numpy as np

from .cone import PointSet
from .errors import (
    BadGrid,
    CollidingFrequencies,
    DimensionMismatch,
    NotFound,
    OverflowGuard,
)

# exp() of anything beyond this leaves double range; callers treat the guard
# as a tube-boundary signal.
OVERFLOW_EXPONENT = 700.0


@dataclass(frozen=True)
class TubePoint:
    """Point z = x + iy of the tube, split into real and imaginary parts."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.atleast_1d(np.asarray(self.x, dtype=float)))
        object.__setattr__(self, "y", np.atleast_1d(np.asarray(self.y, dtype=float)))
        if self.x.shape != self.y.shape:
            raise DimensionMismatch("real and imaginary parts differ in shape")


@dataclass(frozen=True)
class CoeffEstimate:
    """Numerical Fourier coefficient a(y) at one frequency.

    ``stderr`` is the analytic cross-term bound of the midpoint rule, so the
    true coefficient always lies within ``stderr`` of ``value``.
    """

    value: complex
    lam: np.ndarray
    y: np.ndarray
    S: float
    n_samples: int
    stderr: float


class ExpSum:
    """Immutable finite exponential sum with optional limit-frequency metadata."""

    def __init__(self, frequencies, coefficients, limit_frequencies=None):
        freqs = np.asarray(frequencies, dtype=float)
        if freqs.ndim == 1:
            freqs = freqs.reshape(-1, 1)
        coefs = np.asarray(coefficients, dtype=complex).reshape(-1)
        if freqs.shape[0] != coefs.shape[0]:
            raise DimensionMismatch("frequency and coefficient counts differ")
        if freqs.shape[0] == 0:
            raise ValueError("an exponential sum needs at least one term")
        if np.any(coefs == 0):
            raise ValueError("zero coefficients are not allowed; drop the term")
        seen = set()
        for row in freqs:
            key = tuple(row.tolist())
            if key in seen:
                raise ValueError(f"duplicate frequency {key}")
            seen.add(key)
        if limit_frequencies is None:
            lfreqs = np.zeros((0, freqs.shape[1]))
        else:
            lfreqs = np.asarray(limit_frequencies, dtype=float)
            if lfreqs.size == 0:
                lfreqs = np.zeros((0, freqs.shape[1]))
            elif lfreqs.ndim == 1:
                lfreqs = lfreqs.reshape(-1, freqs.shape[1])
        if lfreqs.shape[1] != freqs.shape[1]:
            raise DimensionMismatch("limit frequencies live in the wrong dimension")
        self.frequencies = freqs
        self.coefficients = coefs
        self.limit_frequencies = lfreqs
        self.dimension = freqs.shape[1]
        self.n_terms = freqs.shape[0]

    def spectrum(self) -> PointSet:
        return PointSet(points=self.frequencies, limit_points=self.limit_frequencies)

    def coefficient_at(self, lam):
        """Declared coefficient at a frequency, 0 if absent."""
        lam = np.asarray(lam, dtype=float)
        for row, b in zip(self.frequencies, self.coefficients):
            if np.array_equal(row, lam):
                return complex(b)
        return 0j

    def constant_term(self):
        return self.coefficient_at(np.zeros(self.dimension))

    def add_constant(self, c):
        """Sum with a constant added (merged into the zero frequency)."""
        zero = np.zeros(self.dimension)
        idx = None
        for k, row in enumerate(self.frequencies):
            if np.array_equal(row, zero):
                idx = k
                break
        freqs = self.frequencies
        coefs = self.coefficients.copy()
        if idx is None:
            freqs = np.vstack([freqs, zero])
            coefs = np.concatenate([coefs, [complex(c)]])
        else:
            coefs[idx] = coefs[idx] + c
        keep = coefs != 0
        if not np.any(keep):
            raise ValueError("sum became identically zero")
        return ExpSum(freqs[keep], coefs[keep], self.limit_frequencies)

    def scaled(self, c):
        if c == 0:
            raise ValueError("scaling by zero")
        return ExpSum(self.frequencies, self.coefficients * c, self.limit_frequencies)

    def __add__(self, other):
        if not isinstance(other, ExpSum):
            return NotImplemented
        acc = {}
        for la, ba in zip(self.frequencies, self.coefficients):
            acc[tuple(la.tolist())] = ba
        for lb, bb in zip(other.frequencies, other.coefficients):
            key = tuple(lb.tolist())
            acc[key] = acc.get(key, 0j) + bb
        freqs = [k for k, v in acc.items() if v != 0]
        if not freqs:
            raise ValueError("sum became identically zero")
        return ExpSum(np.array(freqs), np.array([acc[k] for k in freqs]))

    def __mul__(self, other):
        if not isinstance(other, ExpSum):
            return NotImplemented
        acc = {}
        for la, ba in zip(self.frequencies, self.coefficients):
            for lb, bb in zip(other.frequencies, other.coefficients):
                key = tuple((la + lb).tolist())
                acc[key] = acc.get(key, 0j) + ba * bb
        freqs = [k for k, v in acc.items() if v != 0]
        coefs = [acc[k] for k in freqs]
        return ExpSum(np.array(freqs), np.array(coefs))

    def to_config(self):
        return {
            "dimension": self.dimension,
            "terms": [
                {"lambda": lam.tolist(), "re": float(b.real), "im": float(b.imag)}
                for lam, b in zip(self.frequencies, self.coefficients)
            ],
            "limit_frequencies": self.limit_frequencies.tolist(),
        }

    @staticmethod
    def from_config(cfg):
        terms = cfg["terms"]
        freqs = np.array([t["lambda"] for t in terms], dtype=float)
        coefs = np.array(
            [complex(t.get("re", 0.0), t.get("im", 0.0)) for t in terms]
        )
        return ExpSum(freqs, coefs, cfg.get("limit_frequencies") or None)

    def __repr__(self):
        return f"ExpSum(p={self.dimension}, terms={self.n_terms})"


def _term_weights(f: ExpSum, y):
    """|b_n| e^{-<y, lambda_n>} with the overflow guard applied."""
    expo = -(f.frequencies @ y)
    if np.any(expo > OVERFLOW_EXPONENT):
        raise OverflowGuard(
            f"exponent {float(np.max(expo)):.3g} exceeds {OVERFLOW_EXPONENT}"
        )
    return np.abs(f.coefficients) * np.exp(expo)


def evaluate(f: ExpSum, z: TubePoint) -> complex:
    """f(x + iy), terms summed by decreasing magnitude, compensated."""
    if z.x.shape != (f.dimension,):
        raise DimensionMismatch("point dimension does not match the sum")
    phases = f.frequencies @ z.x
    expo = -(f.frequencies @ z.y)
    if np.any(expo > OVERFLOW_EXPONENT):
        raise OverflowGuard(
            f"exponent {float(np.max(expo)):.3g} exceeds {OVERFLOW_EXPONENT}"
        )
    terms = f.coefficients * np.exp(expo + 1j * phases)
    order = np.argsort(-np.abs(terms), kind="stable")
    terms = terms[order]
    return complex(math.fsum(terms.real), math.fsum(terms.imag))


def evaluate_grid(f: ExpSum, X, y) -> np.ndarray:
    """Vectorized f(x + iy) over rows of X at a common height y.

    Terms are accumulated in decreasing-weight order, one vectorized term at
    a time, so results do not depend on sample chunking.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    y = np.asarray(y, dtype=float)
    if X.shape[1] != f.dimension or y.shape != (f.dimension,):
        raise DimensionMismatch("grid or height dimension does not match the sum")
    weights = _term_weights(f, y)
    order = np.argsort(-weights, kind="stable")
    out = np.zeros(X.shape[0], dtype=complex)
    phase_unit = f.coefficients / np.abs(f.coefficients)
    for n in order:
        out += (weights[n] * phase_unit[n]) * np.exp(1j * (X @ f.frequencies[n]))
    return out


def evaluate_ray(phi: ExpSum, w) -> np.ndarray:
    """phi(w) for a one-variable sum at complex w (scalar or array)."""
    if phi.dimension != 1:
        raise DimensionMismatch("evaluate_ray needs a one-variable sum")
    w = np.asarray(w, dtype=complex)
    mu = phi.frequencies[:, 0]
    v = w.imag
    max_expo = max(
        (float(np.max(-m * v)) if v.size else 0.0) for m in mu
    ) if w.size else 0.0
    if max_expo > OVERFLOW_EXPONENT:
        raise OverflowGuard(f"exponent {max_expo:.3g} exceeds {OVERFLOW_EXPONENT}")
    out = np.zeros(w.shape, dtype=complex)
    order = np.argsort(-np.abs(phi.coefficients), kind="stable")
    for n in order:
        out += phi.coefficients[n] * np.exp(1j * mu[n] * w)
    return out


def ray_derivative(phi: ExpSum) -> ExpSum:
    """d/dw of a one-variable sum: coefficients pick up i*mu."""
    if phi.dimension != 1:
        raise DimensionMismatch("ray_derivative needs a one-variable sum")
    mu = phi.frequencies[:, 0]
    keep = mu != 0
    if not np.any(keep):
        raise ValueError("derivative is identically zero")
    return ExpSum(phi.frequencies[keep], phi.coefficients[keep] * 1j * mu[keep])


def term_scale(phi: ExpSum, w) -> np.ndarray:
    """max_n |b_n e^{i mu_n w}|: the natural magnitude scale at w."""
    w = np.asarray(w, dtype=complex)
    mu = phi.frequencies[:, 0]
    mags = np.abs(phi.coefficients)[:, None] * np.exp(
        np.outer(mu, -np.atleast_1d(w.imag))
    )
    out = mags.max(axis=0)
    return out.reshape(w.shape) if w.shape else out[0]


def log_abs(f: ExpSum, z: TubePoint) -> float:
    """log|f(z)|; -inf marks an exact zero."""
    val = evaluate(f, z)
    a = abs(val)
    return math.log(a) if a > 0.0 else -math.inf


def fourier_coefficient(
    f: ExpSum, lam, y, S: float, grid_per_dim: int = 4096
) -> CoeffEstimate:
    """Midpoint-rule mean of f(x+iy) e^{-i<x,lambda>} over [-S, S]^p.

    The reported stderr is the exact Dirichlet-kernel bound on the
    contribution of every off-target term, computable because the integrand
    is a trigonometric polynomial.
    """
    lam = np.asarray(lam, dtype=float)
    y = np.asarray(y, dtype=float)
    if lam.shape != (f.dimension,) or y.shape != (f.dimension,):
        raise DimensionMismatch("frequency or height dimension mismatch")
    if S <= 0:
        raise ValueError("S must be positive")
    if grid_per_dim < 2:
        raise BadGrid("need at least 2 grid points per axis")
    g = int(grid_per_dim)
    h = 2.0 * S / g
    axis = -S + (np.arange(g) + 0.5) * h

    weights = _term_weights(f, y)

    p = f.dimension
    # Separable accumulation: mean over the full grid of e^{i<x, mu>} is the
    # product over axes of 1-D means, so iterate the grid one axis-0 slab at
    # a time to keep memory flat.
    total = 0j
    n_pts = g**p
    if p == 1:
        vals = evaluate_grid(f, axis.reshape(-1, 1), y) * np.exp(-1j * axis * lam[0])
        total = vals.sum()
    else:
        mesh_rest = np.stack(
            np.meshgrid(*([axis] * (p - 1)), indexing="ij"), axis=-1
        ).reshape(-1, p - 1)
        for x0 in axis:
            X = np.empty((mesh_rest.shape[0], p))
            X[:, 0] = x0
            X[:, 1:] = mesh_rest
            vals = evaluate_grid(f, X, y) * np.exp(-1j * (X @ lam))
            total += vals.sum()
    estimate = total / n_pts

    stderr = 0.0
    for n in range(f.n_terms):
        mu = f.frequencies[n] - lam
        if np.all(mu == 0.0):
            continue
        bound = weights[n]
        for j in range(p):
            s = math.sin(h * mu[j] / 2.0)
            if s == 0.0:
                dj = 1.0
            else:
                dj = min(1.0, abs(math.sin(S * mu[j])) / (g * abs(s)))
            bound *= dj
        stderr += bound
    # cross terms can attain the kernel bound with equality; allow for the
    # roundoff of the quadrature sum itself
    stderr = stderr * (1.0 + 1e-9) + 1e-13 * float(np.sum(weights))
    return CoeffEstimate(
        value=complex(estimate), lam=lam, y=y, S=S, n_samples=n_pts, stderr=stderr
    )


def restrict_to_ray(f: ExpSum, y0, x0=None, y_base=None) -> ExpSum:
    """One-variable restriction phi(w) = f(x0 + i*y_base + w*y0).

    Frequencies become <y0, lambda_n>; they must be pairwise distinct along
    y0, otherwise CollidingFrequencies reports one offending pair so the
    caller can perturb y0.
    """
    y0 = np.asarray(y0, dtype=float)
    if y0.shape != (f.dimension,):
        raise DimensionMismatch("ray direction dimension mismatch")
    if np.linalg.norm(y0) == 0.0:
        raise ValueError("ray direction must be nonzero")
    x0 = np.zeros(f.dimension) if x0 is None else np.asarray(x0, dtype=float)
    mu = f.frequencies @ y0
    scale = max(1.0, float(np.max(np.abs(mu)))) if mu.size else 1.0
    order = np.argsort(mu, kind="stable")
    for a, b in zip(order[:-1], order[1:]):
        if abs(mu[b] - mu[a]) <= 1e-12 * scale:
            raise CollidingFrequencies(
                f"frequencies {f.frequencies[a].tolist()} and "
                f"{f.frequencies[b].tolist()} collide along the ray",
                pair=(f.frequencies[a], f.frequencies[b]),
            )
    coefs = f.coefficients * np.exp(1j * (f.frequencies @ x0))
    if y_base is not None:
        y_base = np.asarray(y_base, dtype=float)
        expo = -(f.frequencies @ y_base)
        if np.any(expo > OVERFLOW_EXPONENT):
            raise OverflowGuard("base height outside the safe tube")
        coefs = coefs * np.exp(expo)
    lmu = f.limit_frequencies @ y0 if f.limit_frequencies.size else np.zeros(0)
    for lv in lmu:
        if np.any(np.abs(mu - lv) <= 1e-12 * scale):
            raise CollidingFrequencies(
                f"limit frequency projects onto a term frequency ({lv})",
                pair=None,
            )
    lmu = np.unique(lmu)
    return ExpSum(mu.reshape(-1, 1), coefs, lmu.reshape(-1, 1) if lmu.size else None)


def almost_period_defect(f: ExpSum, tau, y_compact=None) -> float:
    """Certificate sum_n |b_n| e^{-min_y <y,lambda_n>} |e^{i<tau,lambda_n>} - 1|.

    An upper bound for sup |f(z+tau) - f(z)| over the tube with base in the
    convex hull of ``y_compact`` (default: the real space, y = 0).
    """
    tau = np.asarray(tau, dtype=float)
    W = _certificate_weights(f, y_compact)
    return float(W @ np.abs(np.exp(1j * (f.frequencies @ tau)) - 1.0))


def _certificate_weights(f: ExpSum, y_compact):
    if y_compact is None:
        ys = np.zeros((1, f.dimension))
    else:
        ys = np.asarray(y_compact, dtype=float).reshape(-1, f.dimension)
    expos = -(ys @ f.frequencies.T)  # (n_y, n_terms)
    best = expos.max(axis=0)
    if np.any(best > OVERFLOW_EXPONENT):
        raise OverflowGuard("compact base outside the safe tube")
    return np.abs(f.coefficients) * np.exp(best)


def find_almost_period(
    f: ExpSum,
    eps: float,
    y_compact=None,
    search_box: float = 50.0,
    grid: int = 64,
) -> np.ndarray:
    """Deterministic coarse-to-fine scan for tau with certificate below eps.

    Scans [0, search_box]^p excluding |tau| < 0.1 (tau = 0 is vacuous),
    refining around the best candidates; raises NotFound when the box is
    exhausted, in which case the caller should enlarge it.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    p = f.dimension
    W = _certificate_weights(f, y_compact)

    def defects(cands):
        return np.abs(np.exp(1j * (cands @ f.frequencies.T)) - 1.0) @ W

    step = search_box / grid
    axes = [np.arange(1, grid + 1) * step] * p
    cands = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, p)
    cands = cands[np.linalg.norm(cands, axis=1) >= 0.1]
    for _ in range(5):
        vals = defects(cands)
        hits = np.flatnonzero(vals < eps)
        if hits.size:
            rows = cands[hits]
            best = min(range(len(rows)), key=lambda i: tuple(rows[i].tolist()))
            return rows[best]
        # refine the best candidates on a mesh covering each parent cell
        n_keep = min(32, len(cands))
        keep = np.argsort(vals, kind="stable")[:n_keep]
        local = np.arange(-8, 9) * (step / 16.0)
        offs = np.stack(np.meshgrid(*([local] * p), indexing="ij"), axis=-1).reshape(
            -1, p
        )
        cands = (cands[keep][:, None, :] + offs[None, :, :]).reshape(-1, p)
        cands = cands[np.linalg.norm(cands, axis=1) >= 0.1]
        step /= 16.0
    raise NotFound(
        f"no almost period with certificate < {eps} in [0, {search_box}]^{p}"
    )
