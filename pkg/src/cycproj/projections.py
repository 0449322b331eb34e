"""Closest-point projections onto the convex sets used by the scenarios.

Each projector returns a :class:`ProjectionResult` whose ``solver`` tag
records which code path produced the point:

* ``closed_form`` -- direct formula (axis, plane segments, cross discs,
  and membership hits).
* ``exact_piecewise`` -- the certified projector for segments in products
  of star trees whose coordinates stay on a single leg per factor.
* ``golden_section`` -- the generic 1-D search along a geodesic segment.
* ``newton`` -- the bracketed Newton solve on the epigraph boundary.

Projections onto closed convex subsets of a CAT(0) space are unique and
nonexpanding; a tie detected anywhere is treated as a modeling error, never
broken silently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .spaces import (
    ChainPoint,
    Plane,
    PlanePoint,
    ProductPoint,
    ProductSpace,
    StarPoint,
    StarTree,
    TwistedChain,
)

__all__ = [
    "Segment",
    "AxisLine",
    "Epigraph",
    "CrossDisc",
    "ConvexSet",
    "ProjectionResult",
    "NumericalFailureError",
    "AmbiguousProjectionError",
    "UnsupportedShapeError",
    "project",
    "project_segment_generic",
    "project_segment_tree_exact",
    "project_axis",
    "project_epigraph",
    "project_cross_disc",
    "set_distance",
]


class NumericalFailureError(RuntimeError):
    """A numeric solve failed to bracket or converge."""


class AmbiguousProjectionError(RuntimeError):
    """Two candidate feet are equally close; the configuration is degenerate."""


class UnsupportedShapeError(ValueError):
    """The exact projector does not cover this segment shape."""


# ---------------------------------------------------------------------------
# Set descriptors


@dataclass(frozen=True, slots=True)
class Segment:
    """Geodesic segment between two points of the ambient space."""

    start: object
    end: object


@dataclass(frozen=True, slots=True)
class AxisLine:
    """The x-axis of the plane."""


@dataclass(frozen=True, slots=True)
class Epigraph:
    """The closed convex region {(x, y) : x > 0, y >= 1 + x**(-epsilon)}."""

    epsilon: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.epsilon) and self.epsilon > 0.0):
            raise ValueError(f"epsilon must be positive, got {self.epsilon!r}")

    def boundary_height(self, x: float) -> float:
        return 1.0 + x ** (-self.epsilon)

    def contains(self, p: PlanePoint) -> bool:
        return p.x > 0.0 and p.y >= self.boundary_height(p.x)


@dataclass(frozen=True, slots=True)
class CrossDisc:
    """Cross-sectional disc of a twisted chain, by index into disc_heights."""

    disc_index: int

    def __post_init__(self) -> None:
        if not (0 <= self.disc_index <= 2):
            raise ValueError(f"disc_index must be 0, 1 or 2, got {self.disc_index!r}")


ConvexSet = Segment | AxisLine | Epigraph | CrossDisc


@dataclass(frozen=True, slots=True)
class ProjectionResult:
    point: object
    distance: float
    solver: str


# ---------------------------------------------------------------------------
# Generic geodesic-segment projection

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
_POLISH_STEP = 1e-5


def _golden_iterations(tol: float) -> int:
    return math.ceil(math.log(1.0 / tol) / math.log(1.0 / _INVPHI))


def project_segment_generic(space, seg: Segment, x, tol: float = 1e-12) -> ProjectionResult:
    """Project x onto a geodesic segment by golden-section search.

    The squared distance t -> d(x, gamma(t))^2 is convex along geodesics of a
    CAT(0) space, so golden section is valid.  The iteration count is fixed
    from ``tol`` for determinism.  A final three-point parabolic refinement
    recovers the parameter below the comparison-noise floor of the raw
    search (function values near an interior minimum differ by less than one
    ulp once the bracket is ~1e-8 wide); it is accepted only when it stays
    near the bracket and does not increase the objective.
    """
    if not (tol > 0.0):
        raise ValueError(f"tol must be positive, got {tol!r}")
    start, end = seg.start, seg.end

    def f(t: float) -> float:
        d = space.distance(x, space.geodesic(start, end, t))
        return d * d

    a, b = 0.0, 1.0
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(_golden_iterations(tol)):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    t_best = 0.5 * (a + b)

    h = _POLISH_STEP
    base = min(max(t_best, h), 1.0 - h)
    f0, fm, fp = f(base), f(base - h), f(base + h)
    den = fp - 2.0 * f0 + fm
    if den > 0.0:
        vertex = base - h * (fp - fm) / (2.0 * den)
        if 0.0 <= vertex <= 1.0 and abs(vertex - base) <= 2.0 * h and f(vertex) <= f0:
            t_best = vertex

    point = space.geodesic(start, end, t_best)
    return ProjectionResult(point, space.distance(x, point), "golden_section")


# ---------------------------------------------------------------------------
# Plane segments (closed form)


def _project_segment_plane(seg: Segment, x: PlanePoint) -> ProjectionResult:
    ax, ay = seg.start.x, seg.start.y
    bx, by = seg.end.x, seg.end.y
    # Anchor at the midpoint: feet near the middle of a long symmetric
    # segment then keep full relative precision (no cancellation against
    # the far endpoints).
    mx, my = 0.5 * (ax + bx), 0.5 * (ay + by)
    dx, dy = bx - ax, by - ay
    den = dx * dx + dy * dy
    if den == 0.0:
        foot = PlanePoint(ax, ay)
        return ProjectionResult(foot, math.hypot(x.x - ax, x.y - ay), "closed_form")
    t = ((x.x - mx) * dx + (x.y - my) * dy) / den
    t = min(0.5, max(-0.5, t))
    foot = PlanePoint(mx + t * dx, my + t * dy)
    return ProjectionResult(foot, math.hypot(x.x - foot.x, x.y - foot.y), "closed_form")


# ---------------------------------------------------------------------------
# Segments in products of star trees (exact)


def _leg_path(tree: StarTree, a: StarPoint, b: StarPoint) -> tuple[int, float, float]:
    """Leg carrying the segment [a, b] plus its affine offset coefficients.

    Returns (leg, o0, do) with offset(t) = o0 + do * t.  A center endpoint
    lies on every leg, so it never forces a leg of its own; two off-center
    endpoints on different legs make the offset non-affine (the path crosses
    the center) and are rejected.
    """
    if a.is_center and b.is_center:
        return 0, 0.0, 0.0
    if a.is_center:
        return b.leg, 0.0, b.offset
    if b.is_center:
        return a.leg, a.offset, -a.offset
    if a.leg != b.leg:
        raise UnsupportedShapeError(
            "segment coordinate crosses the tree center "
            f"(legs {a.leg} and {b.leg}); use the generic projector"
        )
    return a.leg, a.offset, b.offset - a.offset


def project_segment_tree_exact(space: ProductSpace, seg: Segment, x: ProductPoint) -> ProjectionResult:
    """Certified projector for leg-confined segments in a product of trees.

    Per factor the distance from x to the moving point is |l(t) - c| on a
    shared leg and l(t) + c across legs.  Squaring removes the kinks, so the
    squared distance is a single quadratic in t; its minimizer clamped to
    [0, 1] is the exact foot.
    """
    if not (isinstance(space, ProductSpace)
            and isinstance(space.left, StarTree)
            and isinstance(space.right, StarTree)):
        raise UnsupportedShapeError("exact segment projector requires a product of star trees")
    space._check(seg.start)
    space._check(seg.end)
    space._check(x)

    qa = 0.0  # t^2 coefficient
    qb = 0.0  # t coefficient
    feet_coeffs = []
    for tree, s_a, s_b, xc in (
        (space.left, seg.start.left, seg.end.left, x.left),
        (space.right, seg.start.right, seg.end.right, x.right),
    ):
        leg, o0, do = _leg_path(tree, s_a, s_b)
        if xc.leg == leg or xc.is_center:
            c = o0 - xc.offset  # same leg: (l(t) - offset)^2
        else:
            c = o0 + xc.offset  # through the center: (l(t) + offset)^2
        qa += do * do
        qb += 2.0 * do * c
        feet_coeffs.append((leg, o0, do))

    if qa == 0.0:
        t = 0.0  # degenerate segment
    else:
        t = min(1.0, max(0.0, -qb / (2.0 * qa)))

    (leg_l, o0_l, do_l), (leg_r, o0_r, do_r) = feet_coeffs
    foot = ProductPoint(
        StarPoint(leg_l, o0_l + do_l * t),
        StarPoint(leg_r, o0_r + do_r * t),
    )
    return ProjectionResult(foot, space.distance(x, foot), "exact_piecewise")


# ---------------------------------------------------------------------------
# Axis


def project_axis(x: PlanePoint) -> ProjectionResult:
    if not isinstance(x, PlanePoint):
        raise TypeError(f"expected PlanePoint, got {type(x).__name__}")
    return ProjectionResult(PlanePoint(x.x, 0.0), abs(x.y), "closed_form")


# ---------------------------------------------------------------------------
# Epigraph


def _epigraph_stationarity(epsilon: float, x0: float, y0: float, u: float) -> tuple[float, float]:
    """g(u) and g'(u) for the squared-distance stationarity condition.

    g(u) = (u - x0) - epsilon * u**(-epsilon-1) * (1 + u**(-epsilon) - y0)
    is half the derivative of the squared distance from (x0, y0) to the
    boundary point (u, 1 + u**(-epsilon)).
    """
    e = u ** (-epsilon)
    tail = 1.0 + e - y0
    g = (u - x0) - epsilon * (e / u) * tail
    gp = 1.0 + epsilon * (epsilon + 1.0) * (e / (u * u)) * tail + (epsilon * e / u) ** 2
    return g, gp


_MAX_DOUBLINGS = 200
_MAX_NEWTON = 200


def project_epigraph(epsilon: float, x: PlanePoint, tol: float = 1e-13) -> ProjectionResult:
    """Project onto {(x, y) : x > 0, y >= 1 + x**(-epsilon)}.

    Points already in the set are returned unchanged.  Otherwise the foot is
    the unique stationary point of the squared distance along the boundary:
    outside points sit on the convex side of the boundary curve, so the
    stationarity equation has a single root.  The root is bracketed by
    geometric expansion from u = 1 and then solved by Newton steps in
    log(u), falling back to bisection whenever a step leaves the bracket.
    """
    if not (epsilon > 0.0):
        raise ValueError(f"epsilon must be positive, got {epsilon!r}")
    if not (tol > 0.0):
        raise ValueError(f"tol must be positive, got {tol!r}")
    if not isinstance(x, PlanePoint):
        raise TypeError(f"expected PlanePoint, got {type(x).__name__}")
    x0, y0 = x.x, x.y
    if x0 > 0.0 and y0 >= 1.0 + x0 ** (-epsilon):
        return ProjectionResult(x, 0.0, "closed_form")

    scale = max(1.0, abs(x0), abs(y0))
    g1, _ = _epigraph_stationarity(epsilon, x0, y0, 1.0)
    lo = hi = 1.0
    if g1 < 0.0:
        for _ in range(_MAX_DOUBLINGS):
            lo = hi
            hi *= 2.0
            g, _ = _epigraph_stationarity(epsilon, x0, y0, hi)
            if g >= 0.0:
                break
        else:
            raise NumericalFailureError(
                f"failed to bracket the epigraph foot from ({x0!r}, {y0!r}), "
                f"epsilon={epsilon!r}: no sign change within {_MAX_DOUBLINGS} doublings"
            )
    elif g1 > 0.0:
        for _ in range(_MAX_DOUBLINGS):
            hi = lo
            lo *= 0.5
            g, _ = _epigraph_stationarity(epsilon, x0, y0, lo)
            if g <= 0.0:
                break
        else:
            raise NumericalFailureError(
                f"failed to bracket the epigraph foot from ({x0!r}, {y0!r}), "
                f"epsilon={epsilon!r}: no sign change within {_MAX_DOUBLINGS} halvings"
            )

    # Safeguarded Newton on w = log u; the log scale keeps steps sane when
    # the minimizer sits many decades from u = 1 (small epsilon).
    w_lo, w_hi = math.log(lo), math.log(hi)
    w = 0.5 * (w_lo + w_hi)
    for _ in range(_MAX_NEWTON):
        u = math.exp(w)
        g, gp = _epigraph_stationarity(epsilon, x0, y0, u)
        if abs(g) <= tol * scale:
            break
        if g > 0.0:
            w_hi = w
        else:
            w_lo = w
        dg_dw = u * gp
        w_next = w - g / dg_dw if dg_dw != 0.0 else 0.5 * (w_lo + w_hi)
        if not (w_lo < w_next < w_hi):
            w_next = 0.5 * (w_lo + w_hi)
        w = w_next
    else:
        raise NumericalFailureError(
            f"epigraph Newton failed to converge from ({x0!r}, {y0!r}), epsilon={epsilon!r}"
        )

    # Two unguarded polish steps push the foot to machine precision; the
    # two-set step-size chains are checked with 1e-12 slack downstream.
    for _ in range(2):
        u = math.exp(w)
        g, gp = _epigraph_stationarity(epsilon, x0, y0, u)
        dg_dw = u * gp
        if dg_dw != 0.0:
            w -= g / dg_dw

    u = math.exp(w)
    foot = PlanePoint(u, 1.0 + u ** (-epsilon))
    return ProjectionResult(foot, math.hypot(u - x0, foot.y - y0), "newton")


# ---------------------------------------------------------------------------
# Cross discs

_TIE_TOL = 1e-12


def project_cross_disc(chain: TwistedChain, disc_index: int, x: ChainPoint) -> ProjectionResult:
    """Exact projection onto a cross-sectional disc of the chain.

    The nearest lift of the disc is the plane at height h_i + k*Lambda with
    k minimizing |x.height - h_i - k*Lambda|; transporting the disc
    coordinates back through k loops rotates them by -k*twist.  Horizontal
    transport is a rigid motion of discs, so this vertical drop is the exact
    closest point.
    """
    if not (0 <= disc_index < len(chain.disc_heights)):
        raise ValueError(f"disc_index {disc_index!r} out of range")
    chain._check(x)
    lam = chain.circumference
    delta = x.height - chain.disc_heights[disc_index]
    k = math.floor(delta / lam + 0.5)
    m = delta - k * lam  # residual in [-lam/2, lam/2]
    if abs(lam - 2.0 * abs(m)) < _TIE_TOL and m != 0.0:
        raise AmbiguousProjectionError(
            f"two lifts of disc {disc_index} are equally close to {x!r}"
        )
    ang = -k * chain.twist
    c, s = math.cos(ang), math.sin(ang)
    foot = ChainPoint(c * x.u - s * x.v, s * x.u + c * x.v, chain.disc_heights[disc_index])
    return ProjectionResult(foot, abs(m), "closed_form")


# ---------------------------------------------------------------------------
# Dispatch


def project(space, cset: ConvexSet, x, tol: float = 1e-12, method: str = "auto") -> ProjectionResult:
    """Project x onto cset within space.

    ``method`` selects the solver for segments: ``auto`` prefers the
    certified closed forms and falls back to the generic search, ``exact``
    requires a closed form, ``generic`` forces golden section.  Other set
    kinds always use their exact projector.
    """
    if method not in ("auto", "exact", "generic"):
        raise ValueError(f"unknown method {method!r}")
    if isinstance(cset, Segment):
        if method == "generic":
            return project_segment_generic(space, cset, x, tol)
        if isinstance(space, Plane):
            return _project_segment_plane(cset, x)
        if isinstance(space, ProductSpace):
            try:
                return project_segment_tree_exact(space, cset, x)
            except UnsupportedShapeError:
                if method == "exact":
                    raise
                return project_segment_generic(space, cset, x, tol)
        if method == "exact":
            raise UnsupportedShapeError(f"no exact segment projector for {type(space).__name__}")
        return project_segment_generic(space, cset, x, tol)
    if isinstance(cset, AxisLine):
        if not isinstance(space, Plane):
            raise TypeError("AxisLine lives in the plane")
        return project_axis(x)
    if isinstance(cset, Epigraph):
        if not isinstance(space, Plane):
            raise TypeError("Epigraph lives in the plane")
        return project_epigraph(cset.epsilon, x, tol)
    if isinstance(cset, CrossDisc):
        if not isinstance(space, TwistedChain):
            raise TypeError("CrossDisc lives in a twisted chain")
        return project_cross_disc(space, cset.disc_index, x)
    raise TypeError(f"unknown convex set {type(cset).__name__}")


# ---------------------------------------------------------------------------
# Distance between sets


def _segment_segment_tree_exact(space: ProductSpace, seg_a: Segment, seg_b: Segment) -> float:
    """Exact distance between two leg-confined segments in a tree product.

    The squared distance is a single quadratic in the two parameters
    (squares absorb the |.| kinks factorwise), minimized over the unit
    square by checking the interior stationary point and the four edges.
    """
    coeffs = []
    for tree, a_pts, b_pts in (
        (space.left, (seg_a.start.left, seg_a.end.left), (seg_b.start.left, seg_b.end.left)),
        (space.right, (seg_a.start.right, seg_a.end.right), (seg_b.start.right, seg_b.end.right)),
    ):
        leg_a, a0, da = _leg_path(tree, *a_pts)
        leg_b, b0, db = _leg_path(tree, *b_pts)
        same = leg_a == leg_b or (da == 0.0 and a0 == 0.0) or (db == 0.0 and b0 == 0.0)
        sign = -1.0 if same else 1.0
        # factor term: (a0 + da*s + sign*(b0 + db*t))^2
        coeffs.append((a0 + sign * b0, da, sign * db))

    def value(s: float, t: float) -> float:
        total = 0.0
        for c0, cs, ct in coeffs:
            v = c0 + cs * s + ct * t
            total += v * v
        return total

    # Quadratic form: f(s,t) = A s^2 + B t^2 + 2C st + 2D s + 2E t + F
    A = sum(cs * cs for _, cs, _ in coeffs)
    B = sum(ct * ct for _, _, ct in coeffs)
    C = sum(cs * ct for _, cs, ct in coeffs)
    D = sum(c0 * cs for c0, cs, _ in coeffs)
    E = sum(c0 * ct for c0, _, ct in coeffs)

    candidates: list[tuple[float, float]] = [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)]
    det = A * B - C * C
    if det > 0.0:
        s = (-D * B + E * C) / det
        t = (-E * A + D * C) / det
        if 0.0 <= s <= 1.0 and 0.0 <= t <= 1.0:
            candidates.append((s, t))

    def edge_minimum(fix_s: float | None, fix_t: float | None) -> tuple[float, float]:
        if fix_s is not None:
            # minimize over t: B t^2 + 2(C*fix_s + E) t + ...
            t = -(C * fix_s + E) / B if B > 0.0 else 0.0
            return fix_s, min(1.0, max(0.0, t))
        s = -(C * fix_t + D) / A if A > 0.0 else 0.0
        return min(1.0, max(0.0, s)), fix_t

    for fs in (0.0, 1.0):
        candidates.append(edge_minimum(fs, None))
    for ft in (0.0, 1.0):
        candidates.append(edge_minimum(None, ft))

    best = min(value(s, t) for s, t in candidates)
    return math.sqrt(max(0.0, best))


def _default_param_grid(space, cset: ConvexSet, samples: int, span: float):
    """Parameter grid and point constructor for sampling a set.

    Returns (params, make_point); params is None for sets without a usable
    1-D parametrization (cross discs), in which case a fixed point list is
    returned instead.
    """
    if isinstance(cset, Segment):
        params = [i / (samples - 1) for i in range(samples)]
        return params, lambda t: space.geodesic(cset.start, cset.end, t)
    if isinstance(cset, AxisLine):
        params = [-span + 2.0 * span * i / (samples - 1) for i in range(samples)]
        # extra positive log grid: the interesting tail sits at large x
        k = max(2, samples // 4)
        params += [math.exp(math.log(span) * i / (k - 1)) for i in range(k)]
        params = sorted(set(params))
        return params, lambda u: PlanePoint(u, 0.0)
    if isinstance(cset, Epigraph):
        lo, hi = math.log(1.0 / span), math.log(span)
        params = [math.exp(lo + (hi - lo) * i / (samples - 1)) for i in range(samples)]
        return params, lambda u: PlanePoint(u, cset.boundary_height(u))
    if isinstance(cset, CrossDisc):
        h = space.disc_heights[cset.disc_index]
        pts = [ChainPoint(0.0, 0.0, h)]
        for i in range(samples):
            ang = 2.0 * math.pi * i / samples
            pts.append(ChainPoint(space.radius * math.cos(ang), space.radius * math.sin(ang), h))
        return None, pts
    raise TypeError(f"cannot sample {type(cset).__name__}")


def set_distance(space, set_a: ConvexSet, set_b: ConvexSet, sampler=None,
                 samples: int = 257, span: float = 1024.0) -> float:
    """Estimate (from above) the distance between two projectable sets.

    Every value d(a, P_B(a)) is an exact point-to-set distance, so the
    minimum over sampled points of A can only overestimate the true set
    distance; a golden-section refinement over A's parameter tightens it.
    Pairs of leg-confined tree segments are resolved in closed form instead.
    ``sampler``, when given, must yield points of ``set_a`` and replaces the
    built-in grid (no refinement is applied then).
    """
    if set_a == set_b:
        return 0.0
    if (isinstance(set_a, Segment) and isinstance(set_b, Segment)
            and isinstance(space, ProductSpace)
            and isinstance(space.left, StarTree) and isinstance(space.right, StarTree)):
        try:
            return _segment_segment_tree_exact(space, set_a, set_b)
        except UnsupportedShapeError:
            pass

    def gap(p) -> float:
        return project(space, set_b, p).distance

    if sampler is not None:
        points = list(sampler)
        return min(gap(p) for p in points)

    params, make = _default_param_grid(space, set_a, samples, span)
    if params is None:
        return min(gap(p) for p in make)

    gaps = [gap(make(u)) for u in params]
    best_idx = min(range(len(params)), key=gaps.__getitem__)
    best = gaps[best_idx]

    # golden-section refinement between the neighbors of the best sample
    a = params[max(0, best_idx - 1)]
    b = params[min(len(params) - 1, best_idx + 1)]
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = gap(make(c)), gap(make(d))
    for _ in range(_golden_iterations(1e-10)):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = gap(make(c))
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = gap(make(d))
    return min(best, fc, fd)
