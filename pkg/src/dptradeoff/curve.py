"""Whole-curve construction for the distortion-perception function.

D(P) equals the upper envelope, over vertices of the dual feasible set,
of the lines ``intercept + slope * P`` obtained by projecting each vertex
to two numbers: its inner product with the P-independent part of the dual
right-hand side, and minus its perception price.  Two constructions are
offered:

* ``curve_by_vertices``: enumerate all dual vertices, project to the
  (intercept, slope) plane, and take the exact upper envelope on [0, 1].
* ``curve_by_sweep``: solve the program at sampled levels; every solve
  yields a supporting line of the convex curve (value plus price times
  offset), and recursive refinement between samples certifies that no
  segment is missed.  Intended as the fallback when enumeration is over
  budget.

Both return the same breakpoints and slopes up to solver tolerance; the
terminal plateau is pinned bitwise to the unconstrained floor.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field

import numpy as np

from . import lp as lpmod
from .errors import BudgetExceededError, ProblemError
from .model import Estimator, Problem
from .programs import SolveReport, dual_polyhedron, solve_dp_at

_SLOPE_MERGE_TOL = 1e-12  # lines within this slope gap collapse to one
_ZERO_LEN_TOL = 1e-12  # minimum breakpoint spacing kept in a curve


@dataclass(frozen=True, eq=False)
class DualVertex:
    """A vertex of the dual feasible set, in the pinned chart."""

    coords: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coords", np.asarray(self.coords, dtype=float))


@dataclass(frozen=True)
class ProjectedPoint:
    """A dual vertex seen as the line ``intercept + slope * P``."""

    intercept: float
    slope: float


def intercept_weights(problem: Problem) -> np.ndarray:
    """P-independent dual objective weights in the pinned chart.

    Observation marginal on the stochasticity block, source marginal on
    the source block, zeros on the output block and the price slot.
    """
    return np.concatenate(
        [problem.p_y, problem.p_x, np.zeros(problem.n_x - 1), [0.0]]
    )


def project_vertex(vertex, problem: Problem) -> ProjectedPoint:
    """Project a dual vertex to its (intercept, slope) pair."""
    coords = vertex.coords if isinstance(vertex, DualVertex) else np.asarray(vertex, float)
    if coords.shape != (problem.n_y + 2 * problem.n_x,):
        raise ProblemError("vertex has the wrong dimension for this problem")
    return ProjectedPoint(
        intercept=float(coords @ intercept_weights(problem)),
        slope=-float(coords[-1]),
    )


# ---------------------------------------------------------------------------
# Piecewise-linear curves
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PiecewiseLinearCurve:
    """The tradeoff curve on [0, 1] as ordered segments.

    ``segments[i]`` is the (intercept, slope) pair active between
    ``breakpoints[i-1]`` and ``breakpoints[i]`` (domain ends implied).
    The final segment is exactly ``(d_star, 0.0)``: the plateau where the
    perception budget stops binding, starting at ``p_star``.
    """

    breakpoints: np.ndarray
    segments: np.ndarray
    p_star: float
    d_star: float

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        seg = np.asarray(self.segments, dtype=float).reshape(-1, 2)
        if seg.shape[0] != bp.size + 1:
            raise ProblemError("segment count must be breakpoint count + 1")
        if bp.size and (np.any(np.diff(bp) <= 0) or bp[0] <= 0 or bp[-1] > 1 + 1e-12):
            raise ProblemError("breakpoints must increase strictly within (0, 1]")
        slopes = seg[:, 1]
        if np.any(slopes > 1e-10):
            raise ProblemError("curve slopes must be nonpositive")
        if np.any(np.diff(slopes) < -1e-9):
            raise ProblemError("curve slopes must be non-decreasing (convexity)")
        for i, p in enumerate(bp):
            left = seg[i, 0] + seg[i, 1] * p
            right = seg[i + 1, 0] + seg[i + 1, 1] * p
            if abs(left - right) > 1e-9:
                raise ProblemError(f"curve discontinuous at breakpoint {p!r}")
        if seg[-1, 1] != 0.0 or seg[-1, 0] != self.d_star:
            raise ProblemError("final segment must be the exact plateau")
        expected_p_star = float(bp[-1]) if bp.size else 0.0
        if self.p_star != expected_p_star:
            raise ProblemError("p_star must equal the last breakpoint")
        object.__setattr__(self, "breakpoints", _freeze(bp))
        object.__setattr__(self, "segments", _freeze(seg))

    def segment_index(self, p: float) -> int:
        return bisect_right(self.breakpoints.tolist(), p)

    def value(self, p):
        """Curve value; exact plateau (bitwise d_star) for p >= p_star."""
        parr = np.atleast_1d(np.asarray(p, dtype=float))
        idx = np.searchsorted(self.breakpoints, parr, side="right")
        out = self.segments[idx, 0] + self.segments[idx, 1] * parr
        out[parr >= self.p_star] = self.d_star
        return float(out[0]) if np.isscalar(p) or np.ndim(p) == 0 else out

    def slope(self, p):
        parr = np.atleast_1d(np.asarray(p, dtype=float))
        idx = np.searchsorted(self.breakpoints, parr, side="right")
        out = self.segments[idx, 1]
        return float(out[0]) if np.isscalar(p) or np.ndim(p) == 0 else out

    @property
    def slopes(self) -> np.ndarray:
        return self.segments[:, 1]


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


def _upper_envelope(lines: np.ndarray) -> list[int]:
    """Indices of envelope lines ordered by activity, for p in (-inf, inf).

    ``lines`` rows are (intercept, slope), pre-sorted by slope ascending
    with one representative per slope level.  Classic monotone stack: a
    line is dropped when it is dominated before its predecessor stops
    being.
    """
    stack: list[int] = []

    def cross(i: int, j: int) -> float:
        return (lines[i, 0] - lines[j, 0]) / (lines[j, 1] - lines[i, 1])

    for i in range(lines.shape[0]):
        while (
            len(stack) >= 2
            and cross(stack[-1], i) <= cross(stack[-2], stack[-1]) + 1e-15
        ):
            stack.pop()
        stack.append(i)
    return stack


def assemble_curve(lines, d_star: float) -> PiecewiseLinearCurve:
    """Upper envelope of candidate lines on [0, 1] as a validated curve.

    The exact plateau line ``(d_star, 0)`` is always injected: it is a
    feasible dual value at every level, and carrying it verbatim keeps
    the plateau bitwise equal to the unconstrained floor.
    """
    arr = np.asarray(
        [(p.intercept, p.slope) if isinstance(p, ProjectedPoint) else tuple(p) for p in lines],
        dtype=float,
    ).reshape(-1, 2)
    arr = np.vstack([arr, [d_star, 0.0]])
    # numerically-zero slopes collapse onto the exact plateau
    arr[np.abs(arr[:, 1]) <= 1e-11, 1] = 0.0
    arr = arr[arr[:, 1] <= 0.0]

    arr = arr[np.argsort(arr[:, 1], kind="stable")]
    keep: list[np.ndarray] = []
    for row in arr:  # one line per slope level: the one with the best intercept
        if keep and row[1] - keep[-1][1] <= _SLOPE_MERGE_TOL:
            if row[0] > keep[-1][0]:
                keep[-1] = row
            continue
        keep.append(row)
    cand = np.asarray(keep)

    active = _upper_envelope(cand)
    chosen = cand[active]
    # activity intervals over the real line, then clipped to [0, 1]
    crossings = [
        (chosen[i, 0] - chosen[i + 1, 0]) / (chosen[i + 1, 1] - chosen[i, 1])
        for i in range(len(active) - 1)
    ]
    segs: list[tuple[float, float]] = []
    for i, line in enumerate(chosen):
        left = crossings[i - 1] if i > 0 else -np.inf
        right = crossings[i] if i < len(crossings) else np.inf
        if right <= _ZERO_LEN_TOL or left >= 1.0 - 1e-15 or right - left <= _ZERO_LEN_TOL:
            continue
        segs.append((float(line[0]), float(line[1])))

    if not segs:
        segs = [(d_star, 0.0)]
    if segs[-1][1] != 0.0:
        # plateau shorter than the zero-length cutoff; re-pin it explicitly
        segs.append((d_star, 0.0))
    else:
        segs[-1] = (d_star, 0.0)

    seg_arr = np.asarray(segs)
    bps = np.array(
        [
            (seg_arr[i, 0] - seg_arr[i + 1, 0]) / (seg_arr[i + 1, 1] - seg_arr[i, 1])
            for i in range(seg_arr.shape[0] - 1)
        ]
    )
    bps = np.minimum(bps, 1.0)
    lengths_ok = np.concatenate([[True], np.diff(bps) > _ZERO_LEN_TOL]) if bps.size else np.array([], bool)
    if bps.size and not np.all(lengths_ok):
        keep_rows = np.concatenate([lengths_ok, [True]])
        seg_arr = seg_arr[keep_rows]
        bps = bps[lengths_ok]
    p_star = float(bps[-1]) if bps.size else 0.0
    return PiecewiseLinearCurve(bps, seg_arr, p_star, float(d_star))


# ---------------------------------------------------------------------------
# Reports and constructions
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CurveReport:
    """A constructed curve plus the evidence behind it.

    ``s2_points`` holds the projected lines the envelope was built from
    (all dual vertices for the vertex method, the observed supporting
    lines for the sweep).  ``estimators`` are solved once per segment
    endpoint, so querying an estimator anywhere on the curve later needs
    no further solves.
    """

    curve: PiecewiseLinearCurve
    method: str
    s2_points: np.ndarray
    hull_extreme_indices: np.ndarray
    estimators: tuple[tuple[float, Estimator], ...]
    solve_count: int = 0
    vertices: np.ndarray | None = field(default=None, repr=False)


def hull_extremes(points) -> np.ndarray:
    """Indices of the extreme points of the 2-D convex hull.

    Monotone chain with collinear points excluded: interior points of a
    hull edge are convex combinations of its ends and never required.
    Duplicate coordinates report their first occurrence.
    """
    pts = np.asarray(
        [(p.intercept, p.slope) if isinstance(p, ProjectedPoint) else tuple(p) for p in points],
        dtype=float,
    ).reshape(-1, 2)
    if pts.shape[0] == 0:
        return np.empty(0, dtype=int)
    uniq, first = np.unique(pts, axis=0, return_index=True)
    if uniq.shape[0] == 1:
        return np.array([int(first[0])])
    order = np.lexsort((uniq[:, 1], uniq[:, 0]))
    ordered = uniq[order]

    def chain(seq):
        out: list[int] = []
        for i in seq:
            while len(out) >= 2:
                o, a = ordered[out[-2]], ordered[out[-1]]
                b = ordered[i]
                if (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]) <= 0:
                    out.pop()
                else:
                    break
            out.append(i)
        return out

    idx = list(range(ordered.shape[0]))
    lower = chain(idx)
    upper = chain(idx[::-1])
    hull_local = lower[:-1] + upper[:-1]
    if not hull_local:  # all points collinear: the chain keeps only ends
        hull_local = [0, ordered.shape[0] - 1]
    return np.sort(first[order][np.asarray(hull_local, dtype=int)])


def breakpoint_candidates(points, *, dedup_tol: float = 1e-9) -> np.ndarray:
    """All pairwise line crossings inside [0, 1], deduplicated and sorted.

    Every realized breakpoint of the envelope is a crossing of two active
    lines, hence a member of this set.
    """
    pts = np.asarray(
        [(p.intercept, p.slope) if isinstance(p, ProjectedPoint) else tuple(p) for p in points],
        dtype=float,
    ).reshape(-1, 2)
    if pts.shape[0] < 2:
        return np.empty(0)
    a = pts[:, 0]
    s = pts[:, 1]
    da = a[:, None] - a[None, :]
    ds = s[None, :] - s[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        cross = np.where(np.abs(ds) > 1e-14, da / ds, np.nan)
    vals = cross[np.triu_indices_from(cross, k=1)]
    vals = vals[np.isfinite(vals)]
    vals = vals[(vals >= -dedup_tol) & (vals <= 1.0 + dedup_tol)]
    if vals.size == 0:
        return np.empty(0)
    vals = np.clip(np.sort(vals), 0.0, 1.0)
    out = [vals[0]]
    for v in vals[1:]:
        if v - out[-1] > dedup_tol:
            out.append(v)
    return np.asarray(out)


def _segment_endpoint_estimators(problem, curve, solves, form):
    """One estimator per segment endpoint: level 0 and every breakpoint."""
    supports = [0.0] + [float(b) for b in curve.breakpoints]
    out = []
    count = 0
    for p in supports:
        hit = solves.get(round(p, 15))
        if hit is None:
            hit = solve_dp_at(problem, p, form=form)
            count += 1
        out.append((p, hit.estimator))
    return tuple(out), count


def curve_by_vertices(
    problem: Problem, *, budget: int = 10_000_000, form: str = "ot"
) -> CurveReport:
    """Exact curve from full dual vertex enumeration.

    Raises BudgetExceededError when the basis count is out of reach; use
    ``curve_by_sweep`` then.
    """
    poly = dual_polyhedron(problem)
    verts = lpmod.enumerate_vertices(poly, budget=budget)
    weights = intercept_weights(problem)
    if verts.shape[0]:
        s2 = np.column_stack([verts @ weights, -verts[:, -1]])
    else:  # pathological; the floor line alone carries the curve
        s2 = np.empty((0, 2))
    curve = assemble_curve(s2, problem.distortion_floor)
    estimators, n_solves = _segment_endpoint_estimators(problem, curve, {}, form)
    return CurveReport(
        curve=curve,
        method="vertex",
        s2_points=s2,
        hull_extreme_indices=hull_extremes(s2) if s2.size else np.empty(0, dtype=int),
        estimators=estimators,
        solve_count=n_solves,
        vertices=verts,
    )


def curve_by_sweep(
    problem: Problem,
    p_grid=None,
    *,
    form: str = "ot",
    max_solves: int = 256,
    slope_cluster_tol: float = 1e-7,
    value_tol: float = 1e-9,
) -> CurveReport:
    """Curve reconstruction from repeated single-level solves.

    Each solve at level P contributes the supporting line
    ``value + price * P  -  price * p``; recursion between neighboring
    samples either certifies that their lines meet on the curve (then the
    crossing is the breakpoint) or finds a hidden segment and descends.
    A convex piecewise-linear function is recovered exactly this way.
    """
    if p_grid is None:
        grid = [0.0, 1.0]
    else:
        grid = sorted(float(p) for p in p_grid)
        if len(grid) < 2:
            raise ProblemError("sweep grid needs at least two levels")
        if grid[0] < 0 or grid[-1] > 1:
            raise ProblemError("sweep grid must lie within [0, 1]")
        if grid[0] > 0.0:
            grid.insert(0, 0.0)
        if grid[-1] < 1.0:
            grid.append(1.0)

    solves: dict[float, SolveReport] = {}
    budget = {"left": int(max_solves)}

    def sample(p: float) -> tuple[float, float]:
        key = round(p, 15)
        rep = solves.get(key)
        if rep is None:
            if budget["left"] <= 0:
                raise BudgetExceededError(
                    f"sweep exceeded its solve budget of {max_solves}"
                )
            budget["left"] -= 1
            rep = solve_dp_at(problem, p, form=form)
            solves[key] = rep
        price = rep.dual.perception_price
        return rep.value + price * p, -price  # (intercept, slope)

    lines = {p: sample(p) for p in grid}

    def line_at(line, p):
        return line[0] + line[1] * p

    def refine(pa, la, pb, lb, depth=0):
        if pb - pa <= 1e-9 or depth >= 48:
            return
        if abs(la[1] - lb[1]) <= slope_cluster_tol:
            return
        pc = (la[0] - lb[0]) / (lb[1] - la[1])
        if pc <= pa + 1e-12 or pc >= pb - 1e-12:
            # both samples support the curve at a shared kink; a line
            # hidden between them would have to beat the curve there
            return
        lc = sample(pc)
        lines[pc] = lc
        envelope = max(line_at(la, pc), line_at(lb, pc))
        if lc[0] + lc[1] * pc <= envelope + value_tol:
            return
        refine(pa, la, pc, lc, depth + 1)
        refine(pc, lc, pb, lb, depth + 1)

    keys = sorted(lines)
    for left, right in zip(keys[:-1], keys[1:]):
        refine(left, lines[left], right, lines[right])

    support_lines = np.asarray(sorted(lines.values()), dtype=float).reshape(-1, 2)
    curve = assemble_curve(support_lines, problem.distortion_floor)
    estimators, extra = _segment_endpoint_estimators(problem, curve, solves, form)
    return CurveReport(
        curve=curve,
        method="sweep",
        s2_points=support_lines,
        hull_extreme_indices=hull_extremes(support_lines),
        estimators=estimators,
        solve_count=len(solves) + extra,
    )


def estimator_on_curve(problem: Problem, report: CurveReport, p_level: float) -> Estimator:
    """An estimator achieving the curve value at ``p_level``, solver-free.

    Segment endpoints carry precomputed estimators; inside a segment the
    two endpoint rules are mixed linearly.  Mean distortion is linear in
    the rule and the perception index is convex, so the mixture stays
    feasible and lands exactly on the segment line.
    """
    if p_level < 0:
        raise ProblemError("perception level must be >= 0")
    if p_level >= 1.0:
        return problem.minimum[1]
    supports = report.estimators
    levels = [p for p, _ in supports]
    if p_level >= levels[-1]:
        return supports[-1][1]
    hi = bisect_right(levels, p_level)
    lo = hi - 1
    p0, q0 = supports[lo]
    p1, q1 = supports[hi]
    if p_level <= p0:
        return q0
    alpha = (p_level - p0) / (p1 - p0)
    return Estimator((1.0 - alpha) * q0.q + alpha * q1.q)
