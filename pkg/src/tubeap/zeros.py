"""Zero counting and value attainment on one-variable complex slices.

Zeros are counted with multiplicity by winding of the boundary phase
(adaptive step halving keeps each increment below pi/2).  Root location
bisects on zero counts, then polishes with a damped Newton step using the
exact derivative of the exponential sum.

Window proposal for deep-zero searches is analytic: term magnitudes
|c_n| e^{-mu_n v} are lines in (v, log) coordinates, so the heights where
dominance changes hands (the upper envelope's breakpoints, plus cancellation
dips of nearly-parallel pairs) locate the zero bands without any sampling.
"""

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .cone import Cone, conjugate_cone
from .errors import (
    BoundaryZeroPersistent,
    BudgetExhausted,
    CollidingFrequencies,
    OverflowGuard,
    ZeroOnPath,
)
from .expsum import (
    ExpSum,
    TubePoint,
    evaluate,
    evaluate_ray,
    ray_derivative,
    restrict_to_ray,
    term_scale,
)
from .jessen import mean_motion

BOUNDARY_MARGIN = 1e-9
RESIDUAL_RTOL = 1e-10
POLISH_MAX_ITER = 50
MAX_HALVINGS = 20


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle in one complex variable."""

    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float

    def __post_init__(self):
        if not (self.x_lo < self.x_hi and self.y_lo < self.y_hi):
            raise ValueError("rectangle must have positive width and height")

    @property
    def width(self):
        return self.x_hi - self.x_lo

    @property
    def height(self):
        return self.y_hi - self.y_lo

    @property
    def diameter(self):
        return math.hypot(self.width, self.height)

    @property
    def center(self):
        return complex(0.5 * (self.x_lo + self.x_hi), 0.5 * (self.y_lo + self.y_hi))

    def corners(self):
        """Counterclockwise boundary vertices, closed."""
        return [
            complex(self.x_lo, self.y_lo),
            complex(self.x_hi, self.y_lo),
            complex(self.x_hi, self.y_hi),
            complex(self.x_lo, self.y_hi),
            complex(self.x_lo, self.y_lo),
        ]

    def grown(self, d):
        return Rect(self.x_lo - d, self.x_hi + d, self.y_lo - d, self.y_hi + d)

    def contains(self, w, slack=0.0):
        return (
            self.x_lo - slack <= w.real <= self.x_hi + slack
            and self.y_lo - slack <= w.imag <= self.y_hi + slack
        )


@dataclass(frozen=True)
class ZeroCountResult:
    rect: Rect
    count: int
    boundary_margin: float


@dataclass(frozen=True)
class ZeroDensityResult:
    """Zeros per unit length in a strip, with the derivative-jump companion."""

    density: float
    count: int
    S: float
    y1: float
    y2: float
    secular_companion: float
    mean_motion_lo: float
    mean_motion_hi: float


@dataclass(frozen=True)
class RootWitness:
    """Residual-verified solution of f(z) = A on a ray slice."""

    w: complex
    z_x: np.ndarray
    z_y: np.ndarray
    residual: float
    ray: np.ndarray
    multiplicity: int = 1

    def to_json(self):
        return {
            "z": {"x": self.z_x.tolist(), "y": self.z_y.tolist()},
            "residual": self.residual,
            "ray": self.ray.tolist(),
            "w": [self.w.real, self.w.imag],
        }


def _initial_step(phi):
    fmax = float(np.max(np.abs(phi.frequencies)))
    return 0.1 / max(fmax, 1e-6)


def _track_phase(phi, a, b, step0):
    """Accumulated arg increment of phi from a to b, with the minimum of
    |phi|/scale observed along the way."""
    n0 = max(2, int(math.ceil(abs(b - a) / step0)) + 1)
    t = np.linspace(0.0, 1.0, n0)
    w = a + (b - a) * t
    v = evaluate_ray(phi, w)
    margin = float(np.min(np.abs(v) / term_scale(phi, w)))
    for _ in range(MAX_HALVINGS):
        with np.errstate(divide="ignore", invalid="ignore"):
            d = np.angle(v[1:] / v[:-1])
        bad = np.flatnonzero(np.abs(d) > math.pi / 2.0)
        if bad.size == 0:
            break
        mid_t = 0.5 * (t[bad] + t[bad + 1])
        mid_w = a + (b - a) * mid_t
        mid_v = evaluate_ray(phi, mid_w)
        margin = min(margin, float(np.min(np.abs(mid_v) / term_scale(phi, mid_w))))
        t = np.insert(t, bad + 1, mid_t)
        v = np.insert(v, bad + 1, mid_v)
    with np.errstate(divide="ignore", invalid="ignore"):
        d = np.angle(v[1:] / v[:-1])
    return float(np.sum(d)), margin, len(t)


def count_zeros_rect(phi: ExpSum, rect: Rect) -> ZeroCountResult:
    """Zeros of phi inside the rectangle, with multiplicity, by winding.

    A contour passing too close to a zero (margin below 1e-9 of the local
    term scale) gets the rectangle grown by 1e-6 of its diameter, twice at
    most, then the failure is reported.
    """
    if phi.dimension != 1:
        raise ValueError("zero counting works on one-variable slices")
    step0 = _initial_step(phi)
    base = rect
    for attempt in range(3):
        total = 0.0
        margin = math.inf
        cs = rect.corners()
        for a, b in zip(cs[:-1], cs[1:]):
            darg, m, _ = _track_phase(phi, a, b, step0)
            total += darg
            margin = min(margin, m)
        count = int(round(total / (2.0 * math.pi)))
        residual = abs(total - 2.0 * math.pi * count)
        if margin >= BOUNDARY_MARGIN and residual <= 0.5 * math.pi:
            return ZeroCountResult(rect=rect, count=count, boundary_margin=margin)
        # non-integer winding = a zero hugging the contour closer than the
        # refinement resolves; treat like a boundary zero
        rect = base.grown(1e-6 * base.diameter * (attempt + 1))
    raise BoundaryZeroPersistent(
        f"zero persists on the contour of {base} after two perturbations"
    )


def _newton_polish(psi, der, w0):
    w = complex(w0)
    fw = complex(evaluate_ray(psi, w))
    for _ in range(POLISH_MAX_ITER):
        sc = float(term_scale(psi, w))
        if abs(fw) <= 1e-12 * sc:
            break
        dw = complex(evaluate_ray(der, w))
        if dw == 0:
            return None
        step = -fw / dw
        for _ in range(25):
            w2 = w + step
            f2 = complex(evaluate_ray(psi, w2))
            if abs(f2) < abs(fw):
                break
            step *= 0.5
        else:
            return None
        w, fw = w2, f2
    res = abs(fw) / float(term_scale(psi, w))
    return (w, res) if res <= RESIDUAL_RTOL else None


def _split_with_dodge(psi, rect):
    """Split the longest side; nudge the cut if a zero sits on it."""
    for frac in (0.5, 0.53, 0.47, 0.61):
        if rect.width >= rect.height:
            cut = rect.x_lo + frac * rect.width
            kids = (
                Rect(rect.x_lo, cut, rect.y_lo, rect.y_hi),
                Rect(cut, rect.x_hi, rect.y_lo, rect.y_hi),
            )
        else:
            cut = rect.y_lo + frac * rect.height
            kids = (
                Rect(rect.x_lo, rect.x_hi, rect.y_lo, cut),
                Rect(rect.x_lo, rect.x_hi, cut, rect.y_hi),
            )
        try:
            return [(k, count_zeros_rect(psi, k).count) for k in kids]
        except BoundaryZeroPersistent:
            continue
    raise BoundaryZeroPersistent(f"could not split {rect} away from zeros")


def find_roots_in_rect(
    phi: ExpSum,
    A: complex,
    rect: Rect,
    max_roots: int = 64,
    max_rects: int = 20000,
):
    """Roots of phi(w) = A in the rectangle: bisection on zero counts, then
    damped Newton polishing.  Returns (w, relative residual, multiplicity)
    triples; stops early after max_roots."""
    psi = phi if A == 0 else phi.add_constant(-A)
    try:
        der = ray_derivative(psi)
    except ValueError:
        return []  # psi is a nonzero constant
    fmax = float(np.max(np.abs(psi.frequencies)))
    polish_diam = min(0.5, 0.5 / max(1.0, fmax))
    first = count_zeros_rect(psi, rect)
    stack = [(rect, first.count)]
    roots = []
    processed = 0
    while stack and len(roots) < max_roots:
        r, cnt = stack.pop()
        if cnt <= 0:
            continue
        processed += 1
        if processed > max_rects:
            raise BudgetExhausted(
                f"rectangle budget {max_rects} exhausted with {len(roots)} roots"
            )
        if r.diameter < polish_diam:
            hit = _newton_polish(psi, der, r.center)
            if hit is not None and r.contains(hit[0], slack=0.05 * r.diameter):
                w, res = hit
                if cnt == 1:
                    roots.append((w, res, 1))
                    continue
                if r.diameter < 1e-2:
                    roots.append((w, res, cnt))
                    continue
            elif r.diameter < 1e-4:
                raise BudgetExhausted(
                    f"cell {r} with count {cnt} resisted polishing"
                )
        for kid in reversed(_split_with_dodge(psi, r)):
            stack.append(kid)
    return roots


def solve_value(
    f: ExpSum,
    A: complex,
    x0,
    y0,
    window: Rect,
    max_roots: int = 8,
    max_rects: int = 20000,
):
    """Solutions of f(z) = A on the slice z = x0 + w*y0, w in the window.

    The restriction needs pairwise-distinct frequencies along y0; colliding
    rays are retried with a deterministic small perturbation, three times.
    Every returned root is re-verified in the full variables.
    """
    y0 = np.asarray(y0, dtype=float)
    x0 = np.zeros(f.dimension) if x0 is None else np.asarray(x0, dtype=float)
    if window.y_lo < 0:
        raise ValueError("window must lie in the upper half-plane of w")
    phi = None
    y_eff = y0
    for attempt in range(4):
        try:
            phi = restrict_to_ray(f, y_eff, x0)
            break
        except CollidingFrequencies:
            if attempt == 3:
                raise
            bump = np.zeros(f.dimension)
            bump[attempt % f.dimension] = 1e-3 * (attempt + 1)
            y_eff = y0 + np.linalg.norm(y0) * bump
    found = find_roots_in_rect(phi, A, window, max_roots=max_roots, max_rects=max_rects)
    out = []
    for w, _, mult in found:
        z_x = x0 + w.real * y_eff
        z_y = w.imag * y_eff
        val = evaluate(f, TubePoint(z_x, z_y))
        scale = float(term_scale_full(f, z_y))
        res = abs(val - A) / scale
        if res <= 10 * RESIDUAL_RTOL:
            out.append(
                RootWitness(
                    w=w, z_x=z_x, z_y=z_y, residual=res, ray=y_eff, multiplicity=mult
                )
            )
    return out


def term_scale_full(f: ExpSum, y):
    """max_n |b_n| e^{-<y, lambda_n>} in the full variables."""
    y = np.asarray(y, dtype=float)
    return float(np.max(np.abs(f.coefficients) * np.exp(-(f.frequencies @ y))))


def zero_density_strip(
    phi: ExpSum,
    y1: float,
    y2: float,
    S: float,
    mm_span: float = 1e4,
) -> ZeroDensityResult:
    """Zeros of phi in [-S,S] x [y1,y2] per unit length, against the
    mean-motion jump (J'(y2) - J'(y1)) / 2pi.

    The 2pi factor is required by the classical one-variable density (the
    2-term oracle: unit coefficients, frequency gap d, density d/2pi).
    """
    if not y1 < y2:
        raise ValueError("need y1 < y2")
    res = count_zeros_rect(phi, Rect(-S, S, y1, y2))
    density = res.count / (2.0 * S)
    c_lo = mean_motion(phi, np.array([y1]), x_span=mm_span)
    c_hi = mean_motion(phi, np.array([y2]), x_span=mm_span)
    companion = (c_lo.value - c_hi.value) / (2.0 * math.pi)
    return ZeroDensityResult(
        density=density,
        count=res.count,
        S=S,
        y1=y1,
        y2=y2,
        secular_companion=companion,
        mean_motion_lo=c_lo.value,
        mean_motion_hi=c_hi.value,
    )


# ---------------------------------------------------------------------------
# Analytic window proposal


def _upper_envelope(lines):
    """Upper envelope of lines v -> alpha + beta*v.

    lines: iterable of (beta, alpha).  Returns hull pieces as a list of
    (beta, alpha) ordered by increasing beta (left to right in v).
    """
    pts = {}
    for b, a in lines:
        if b not in pts or a > pts[b]:
            pts[b] = a
    items = sorted(pts.items())
    hull = []
    for b, a in items:
        while hull:
            b0, a0 = hull[-1]
            if len(hull) >= 2:
                b1, a1 = hull[-2]
                # top line never wins if the new one overtakes it before it
                # overtakes its predecessor
                if (a1 - a0) * (b - b0) >= (a0 - a) * (b0 - b1):
                    hull.pop()
                    continue
            break
        hull.append((b, a))
    # drop leading lines that never dominate for v large enough to matter
    return hull


def _envelope_value(hull, v):
    return max(a + b * v for b, a in hull)


def propose_windows(phi: ExpSum, A: complex, q: float, max_windows: int = 4):
    """Candidate rectangles (in w) likely to contain solutions of phi = A
    with Im w > q.

    Two mechanisms: breakpoints of the upper envelope of term magnitudes
    (dominance transitions), and cancellation dips of nearly-parallel term
    pairs balanced against the remaining envelope.  Every candidate spans a
    full phase period in Re w, so the actual zero band cannot be missed by
    a phase offset.  Candidates are suggestions; counting decides.
    """
    psi = phi if A == 0 else phi.add_constant(-A)
    mu = psi.frequencies[:, 0]
    betas = -mu
    alphas = np.log(np.abs(psi.coefficients))
    n = len(mu)
    if n < 2:
        return []
    v_lo = q + 0.05
    bmax = float(np.max(np.abs(betas)))
    v_cap = min(q + 300.0, 650.0 / max(bmax, 1e-6))
    if v_cap <= v_lo:
        return []
    cands = []

    hull = _upper_envelope(zip(betas, alphas))
    for (b0, a0), (b1, a1) in zip(hull[:-1], hull[1:]):
        dbeta = b1 - b0
        if dbeta < 0.05:
            continue  # handled by the dip mechanism
        v_star = (a0 - a1) / dbeta
        if not (v_lo < v_star < v_cap):
            continue
        period = 2.0 * math.pi / dbeta
        half_w = 0.55 * max(40.0, period)
        half_h = min(15.0, max(2.5, 5.0 / dbeta))
        cands.append(
            (
                v_star,
                Rect(-half_w, half_w, max(v_lo, v_star - half_h), v_star + half_h),
            )
        )

    for i, j in combinations(range(n), 2):
        dbeta = abs(betas[j] - betas[i])
        if dbeta == 0.0 or dbeta >= 0.05:
            continue
        others = [(betas[k], alphas[k]) for k in range(n) if k not in (i, j)]
        if not others:
            # two-line balance: exact cancellation height
            v_star = (alphas[i] - alphas[j]) / (betas[j] - betas[i])
            if v_lo < v_star < v_cap:
                period = 2.0 * math.pi / dbeta
                half_w = 0.55 * max(40.0, period)
                cands.append(
                    (v_star, Rect(-half_w, half_w, max(v_lo, v_star - 3), v_star + 3))
                )
            continue
        ohull = _upper_envelope(others)

        def gap(v):
            return _log_dip(
                alphas[i] + betas[i] * v, alphas[j] + betas[j] * v
            ) - _envelope_value(ohull, v)

        vs = np.linspace(v_lo, v_cap, 240)
        gs = np.array([gap(v) for v in vs])
        sign_change = np.flatnonzero(np.diff(np.sign(gs)) != 0)
        for k in sign_change[:2]:
            lo, hi = vs[k], vs[k + 1]
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if gap(lo) * gap(mid) <= 0:
                    hi = mid
                else:
                    lo = mid
            v_star = 0.5 * (lo + hi)
            period = 2.0 * math.pi / dbeta
            half_w = 0.55 * max(40.0, period)
            half_h = 6.0
            cands.append(
                (
                    v_star,
                    Rect(
                        -half_w,
                        half_w,
                        max(v_lo, v_star - half_h),
                        min(v_cap, v_star + half_h),
                    ),
                )
            )

    cands.sort(key=lambda t: (t[1].width * t[1].height, t[0]))
    return [rect for _, rect in cands[:max_windows]]


def _log_dip(a1, a2):
    """log of |e^{a1} - e^{a2}| without overflow."""
    hi, lo = (a1, a2) if a1 >= a2 else (a2, a1)
    d = hi - lo
    if d == 0.0:
        return -math.inf
    return hi + math.log1p(-math.exp(-d))


def ray_candidates(f: ExpSum, cone: Cone, A: complex, q: float, seed: int, budget: int):
    """Deterministic stream of unit directions in the dual-cone interior.

    Order: the central direction, small perturbations of it (covers
    colliding or nearly-colliding frequency projections), tilts solved so
    that the constant-vs-term dominance transition lands above q, then
    seeded random interior combinations.
    """
    dual = conjugate_cone(cone)
    dg = dual.generators / np.linalg.norm(dual.generators, axis=1, keepdims=True)
    center = dg.sum(axis=0)
    center = center / np.linalg.norm(center)
    p = f.dimension
    # orthonormal directions transverse to the center ray
    basis = np.linalg.qr(
        np.column_stack([center] + [np.eye(p)[:, k] for k in range(p)])
    )[0][:, 1:p]
    out = [center]
    for u in basis.T:
        for eps in (1e-3, -1e-3, 1e-4, -1e-4):
            out.append(_unit(center + eps * u))

    # tilt so that the height where |b0 - A| stops dominating term k equals
    # q + 3; only meaningful when the shifted sum keeps a constant term
    b0 = f.constant_term()
    c0 = b0 - A
    if abs(c0) > 0:
        alpha0 = math.log(abs(c0))
        order = np.argsort(-np.abs(f.coefficients), kind="stable")
        for k in order[:4]:
            lam = f.frequencies[k]
            if np.all(lam == 0.0):
                continue
            target = (alpha0 - math.log(abs(f.coefficients[k]))) / (q + 3.0)
            for u in basis.T:
                sol = _solve_tilt(center, u, lam, target, cone)
                if sol is not None:
                    out.append(sol)

    rng = np.random.default_rng(seed)
    guard = 0
    while len(out) < budget + 16 and guard < 200:
        guard += 1
        wts = rng.uniform(0.2, 1.0, size=len(dg))
        cand = _unit(wts @ dg)
        if _interior_margin_primal(cone, cand) > 0.02:
            out.append(cand)

    seen = set()
    final = []
    for y0 in out:
        if _interior_margin_primal(cone, y0) <= 1e-6:
            continue
        key = tuple(np.round(y0, 9).tolist())
        if key in seen:
            continue
        seen.add(key)
        final.append(y0)
        if len(final) >= budget:
            break
    return final


def _unit(v):
    return v / np.linalg.norm(v)


def _interior_margin_primal(cone: Cone, y0):
    gens = cone.generators
    prods = gens @ y0 / np.linalg.norm(gens, axis=1)
    return float(np.min(prods))


def _solve_tilt(center, u, lam, target_beta, cone):
    """Find t with <-y0(t), lam> = target_beta, y0(t) = unit(center + t u),
    staying inside the dual-cone interior."""

    def beta(t):
        return float(-np.dot(_unit(center + t * u), lam))

    def feasible(t):
        return _interior_margin_primal(cone, _unit(center + t * u)) > 0.02

    ts = np.linspace(-4.0, 4.0, 81)
    ok = [t for t in ts if feasible(t)]
    if len(ok) < 2:
        return None
    vals = [beta(t) - target_beta for t in ok]
    for (t0, g0), (t1, g1) in zip(zip(ok[:-1], vals[:-1]), zip(ok[1:], vals[1:])):
        if g0 == 0.0:
            return _unit(center + t0 * u)
        if g0 * g1 < 0:
            lo, hi, glo = t0, t1, g0
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                gm = beta(mid) - target_beta
                if glo * gm <= 0:
                    hi = mid
                else:
                    lo, glo = mid, gm
            return _unit(center + 0.5 * (lo + hi) * u)
    return None


def attainment_search(
    f: ExpSum,
    cone: Cone,
    A: complex,
    q: float,
    ray_budget: int = 8,
    seed: int = 42,
    max_windows: int = 4,
    max_rects: int = 4000,
):
    """First residual-verified solution of f(z) = A with y = Im z in the
    dual-cone interior and |y| > q; None when the budget runs out.

    A None is never a disproof: the search covers finitely many rays and
    analytically proposed windows.
    """
    for y0 in ray_candidates(f, cone, A, q, seed, ray_budget):
        try:
            phi = restrict_to_ray(f, y0)
        except CollidingFrequencies:
            continue
        try:
            windows = propose_windows(phi, A, q / np.linalg.norm(y0), max_windows)
        except OverflowGuard:
            continue
        for win in windows:
            try:
                roots = solve_value(
                    f, A, None, y0, win, max_roots=1, max_rects=max_rects
                )
            except (BudgetExhausted, BoundaryZeroPersistent, OverflowGuard, ZeroOnPath):
                continue
            for wit in roots:
                if np.linalg.norm(wit.z_y) > q:
                    return wit
    return None


def tail_zero_search(
    f: ExpSum,
    cone: Cone,
    q: float,
    ray_budget: int = 8,
    seed: int = 42,
):
    """Zero of f with y in the dual-cone interior and |y| > q, or None.

    Wraps the attainment search at the value 0; exhaustion is reported as
    not-found, never as nonexistence.
    """
    if q < 0:
        raise ValueError("q must be >= 0")
    return attainment_search(f, cone, 0.0, q, ray_budget=ray_budget, seed=seed)
