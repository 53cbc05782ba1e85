"""Dense linear-programming core.

Solves equality-standard-form programs

    min c.x   subject to   a x = b,  x >= 0

with a two-phase primal simplex.  Bland's rule is the default pivot rule
(termination guaranteed); Dantzig's rule is available behind a flag for
speed comparisons, with basis-revisit detection since it may cycle.  The
tableau is dense and refactorized from the basis periodically and at
termination, so the reported point, dual vector, and objective come from
a fresh solve against the original data rather than accumulated updates.

Phase one detects linearly dependent equality rows and drops them instead
of failing: several programs in this package carry one dependent row by
construction.

Also provided: brute-force vertex enumeration for small H-polyhedra
``{p : g p <= h}`` by solving every d-by-d active-row system, used for
dual feasible sets whose vertices determine entire tradeoff curves.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BudgetExceededError,
    CyclingError,
    IterationLimitError,
    SolverError,
)

_RED_COST_TOL = 1e-10  # reduced cost considered improving below -tol
_PIVOT_COL_TOL = 1e-11  # smallest admissible pivot magnitude
_FEAS_TOL = 1e-9  # phase-1 residual accepted as feasible
_REFRESH_EVERY = 64  # pivots between tableau refactorizations


@dataclass(frozen=True, eq=False)
class StandardLP:
    """``min c.x  s.t.  a x = b, x >= 0`` with dense finite data."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        c = np.asarray(self.c, dtype=float)
        if a.ndim != 2:
            raise SolverError("constraint matrix must be 2-D")
        if b.shape != (a.shape[0],) or c.shape != (a.shape[1],):
            raise SolverError("inconsistent LP dimensions")
        for name, arr in (("a", a), ("b", b), ("c", c)):
            if not np.all(np.isfinite(arr)):
                raise SolverError(f"LP field {name} contains non-finite entries")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    @property
    def m(self) -> int:
        return self.a.shape[0]

    @property
    def n(self) -> int:
        return self.a.shape[1]


@dataclass(frozen=True, eq=False)
class LPSolution:
    """Terminal simplex state.

    For ``optimal`` status, ``x`` is a basic optimal point, ``dual`` the
    multiplier vector recovered from the final basis (zero on dropped
    dependent rows) and ``basis`` the optimal column set.  ``unbounded``
    carries an improving ray (a c-decreasing direction in the recession
    cone); ``infeasible`` carries a Farkas certificate y with
    ``y.a <= 0`` and ``y.b > 0``.
    """

    status: str
    x: np.ndarray | None = None
    value: float = math.nan
    basis: tuple[int, ...] | None = None
    dual: np.ndarray | None = None
    ray: np.ndarray | None = None
    certificate: np.ndarray | None = None
    dropped_rows: tuple[int, ...] = ()
    iterations: int = 0


class _Tableau:
    """Basis-indexed dense tableau with refactorization from scratch."""

    def __init__(self, a, b, c, basis):
        self.a = a
        self.b = b
        self.c = c
        self.basis = list(basis)
        self.m, self.n = a.shape
        self.refactor()

    def refactor(self):
        base = self.a[:, self.basis]
        try:
            self.binv_a = np.linalg.solve(base, self.a)
            self.xb = np.linalg.solve(base, self.b)
            self.y = np.linalg.solve(base.T, self.c[self.basis])
        except np.linalg.LinAlgError as exc:
            raise SolverError("singular simplex basis") from exc
        self.red = self.c - self.y @ self.a

    def pivot(self, row, col):
        piv = self.binv_a[row, col]
        if abs(piv) < _PIVOT_COL_TOL:
            raise SolverError("pivot below numeric tolerance")
        self.binv_a[row] /= piv
        self.xb[row] /= piv
        factors = self.binv_a[:, col].copy()
        factors[row] = 0.0
        self.binv_a -= np.outer(factors, self.binv_a[row])
        self.xb -= factors * self.xb[row]
        self.red = self.red - self.red[col] * self.binv_a[row]
        self.basis[row] = col

    def objective(self) -> float:
        return float(self.c[self.basis] @ self.xb)

    def point(self) -> np.ndarray:
        x = np.zeros(self.n)
        x[self.basis] = self.xb
        return x


def _entering(tab: _Tableau, allowed: np.ndarray, rule: str) -> int | None:
    basic = np.zeros(tab.n, dtype=bool)
    basic[tab.basis] = True
    mask = allowed & ~basic & (tab.red < -_RED_COST_TOL)
    idx = np.nonzero(mask)[0]
    if idx.size == 0:
        return None
    if rule == "dantzig":
        return int(idx[np.argmin(tab.red[idx])])
    return int(idx[0])  # Bland: smallest improving index


def _leaving(tab: _Tableau, col: int) -> int | None:
    column = tab.binv_a[:, col]
    rows = np.nonzero(column > _PIVOT_COL_TOL)[0]
    if rows.size == 0:
        return None
    ratios = np.maximum(tab.xb[rows], 0.0) / column[rows]
    best = ratios.min()
    tied = rows[ratios <= best + 1e-12]
    # Bland tie-break: leave the basic variable with the smallest index
    basis = np.asarray(tab.basis)
    return int(tied[np.argmin(basis[tied])])


def _optimize(tab: _Tableau, allowed, budget, rule):
    """Run pivots to a terminal state; returns ('optimal'|'unbounded', ray)."""
    seen = set() if rule == "dantzig" else None
    iters = 0
    since_refresh = 0
    while True:
        col = _entering(tab, allowed, rule)
        if col is None:
            tab.refactor()  # confirm optimality against fresh data
            col = _entering(tab, allowed, rule)
            if col is None:
                return "optimal", None, iters
        row = _leaving(tab, col)
        if row is None:
            ray = np.zeros(tab.n)
            ray[col] = 1.0
            ray[tab.basis] = -tab.binv_a[:, col]
            return "unbounded", ray, iters
        tab.pivot(row, col)
        iters += 1
        since_refresh += 1
        if since_refresh >= _REFRESH_EVERY:
            tab.refactor()
            since_refresh = 0
        if seen is not None:
            key = tuple(sorted(tab.basis))
            if key in seen:
                raise CyclingError(
                    "basis revisited under Dantzig's rule; rerun with Bland's rule"
                )
            seen.add(key)
        if iters > budget:
            raise IterationLimitError(
                f"pivot budget {budget} exhausted under {rule}'s rule "
                "(cycling is impossible under Bland; consider raising max_iter)"
            )


def solve(lp: StandardLP, *, pivot_rule: str = "bland", max_iter: int | None = None) -> LPSolution:
    """Two-phase simplex on an equality-form program.

    Returns a basic optimal solution with its dual certificate, an
    unbounded status with an improving ray, or an infeasible status with
    a Farkas certificate.  Dependent equality rows are detected in phase
    one and dropped (reported via ``dropped_rows``).
    """
    if pivot_rule not in ("bland", "dantzig"):
        raise SolverError(f"unknown pivot rule {pivot_rule!r}")
    m, n = lp.m, lp.n
    budget = max_iter if max_iter is not None else 100 * (m + n)

    flip = np.where(lp.b < 0, -1.0, 1.0)
    a = lp.a * flip[:, None]
    b = lp.b * flip

    # phase one: minimize the total artificial mass
    a1 = np.hstack([a, np.eye(m)])
    c1 = np.concatenate([np.zeros(n), np.ones(m)])
    allowed1 = np.concatenate([np.ones(n, dtype=bool), np.zeros(m, dtype=bool)])
    tab = _Tableau(a1, b, c1, list(range(n, n + m)))
    status, _, iters1 = _optimize(tab, allowed1, budget, pivot_rule)
    if status != "optimal":  # a sum of nonnegatives cannot be unbounded below
        raise SolverError("phase one ended in an impossible state")

    feas_tol = _FEAS_TOL * max(1.0, float(np.abs(b).max(initial=0.0)))
    if tab.objective() > feas_tol:
        return LPSolution(
            status="infeasible",
            value=math.inf,
            certificate=flip * tab.y,
            iterations=iters1,
        )

    # drive artificials out of the basis; rows that resist are dependent
    dropped: list[int] = []
    for row in range(m):
        if tab.basis[row] < n:
            continue
        structural = tab.binv_a[row, :n]
        cand = int(np.argmax(np.abs(structural)))
        if abs(structural[cand]) > 1e-9:
            tab.pivot(row, cand)
        else:
            dropped.append(row)

    keep = [r for r in range(m) if r not in dropped]
    a2 = a[keep]
    b2 = b[keep]
    basis2 = [tab.basis[r] for r in keep]
    if any(col >= n for col in basis2):
        raise SolverError("artificial variable survived phase one")

    tab2 = _Tableau(a2, b2, lp.c, basis2)
    allowed2 = np.ones(n, dtype=bool)
    status, ray, iters2 = _optimize(tab2, allowed2, budget, pivot_rule)
    iterations = iters1 + iters2

    if status == "unbounded":
        return LPSolution(
            status="unbounded",
            x=tab2.point(),
            value=-math.inf,
            ray=ray,
            dropped_rows=tuple(dropped),
            iterations=iterations,
        )

    tab2.refactor()
    x = tab2.point()
    residual = float(np.max(np.abs(lp.a @ x - lp.b), initial=0.0))
    if residual > 1e-7 * max(1.0, float(np.abs(lp.b).max(initial=0.0))):
        raise SolverError(f"dropped rows are inconsistent (residual {residual:g})")
    dual = np.zeros(m)
    dual[keep] = tab2.y
    dual *= flip
    return LPSolution(
        status="optimal",
        x=x,
        value=float(lp.c @ x),
        basis=tuple(sorted(tab2.basis)),
        dual=dual,
        dropped_rows=tuple(dropped),
        iterations=iterations,
    )


def dual_check(lp: StandardLP, sol: LPSolution, *, tol: float = 1e-9) -> float:
    """Verify the dual certificate of an optimal solution.

    Returns the duality gap ``|c.x - dual.b|`` and raises if the dual
    vector violates feasibility ``dual.a <= c`` beyond ``tol``.
    """
    if sol.status != "optimal":
        raise SolverError(f"dual_check requires an optimal solution, got {sol.status}")
    slack = sol.dual @ lp.a - lp.c
    worst = int(np.argmax(slack))
    if slack[worst] > tol:
        raise SolverError(
            f"dual vector infeasible at column {worst} (violation {slack[worst]:g})"
        )
    return abs(float(lp.c @ sol.x) - float(sol.dual @ lp.b))


# ---------------------------------------------------------------------------
# Vertex enumeration
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class HPolyhedron:
    """``{p in R^d : g p <= h}`` given by finitely many inequality rows."""

    g: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.g, dtype=float)
        h = np.asarray(self.h, dtype=float)
        if g.ndim != 2 or g.shape[1] < 1:
            raise SolverError("polyhedron matrix must be 2-D with d >= 1")
        if h.shape != (g.shape[0],):
            raise SolverError("polyhedron right-hand side has wrong length")
        if not (np.all(np.isfinite(g)) and np.all(np.isfinite(h))):
            raise SolverError("polyhedron data contains non-finite entries")
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "h", h)

    @property
    def k(self) -> int:
        return self.g.shape[0]

    @property
    def d(self) -> int:
        return self.g.shape[1]


def enumerate_vertices(
    poly: HPolyhedron,
    *,
    budget: int = 10_000_000,
    feas_tol: float = 1e-9,
    dedup_tol: float = 1e-7,
    singular_tol: float = 1e-11,
    chunk: int = 65536,
) -> np.ndarray:
    """All vertices of a small pointed polyhedron, lexicographically sorted.

    Every d-subset of rows with a well-conditioned square system is
    solved in batch; candidate points are kept when they satisfy all k
    inequalities within ``feas_tol``.  Degenerate vertices are produced
    by several bases and collapsed by deduplication at ``dedup_tol``.
    The caller must guarantee the polyhedron contains no line.

    Raises BudgetExceededError when C(k, d) exceeds ``budget`` so callers
    can fall back to sweep-style methods.
    """
    k, d = poly.k, poly.d
    if d > 16:
        raise BudgetExceededError(f"dimension {d} exceeds the enumeration limit 16")
    if k < d:
        return np.empty((0, d))
    total = math.comb(k, d)
    if total > budget:
        raise BudgetExceededError(
            f"C({k},{d}) = {total} basis candidates exceed the budget {budget}"
        )

    g, h = poly.g, poly.h
    # a basis whose rows miss some coordinate is singular outright; the
    # support bitmasks rule those out before any linear algebra
    row_mask = np.zeros(k, dtype=np.uint32)
    for j in range(d):
        row_mask |= (g[:, j] != 0.0).astype(np.uint32) << j
    full_mask = np.uint32((1 << d) - 1)

    found: list[np.ndarray] = []
    combos = itertools.combinations(range(k), d)
    while True:
        block = list(itertools.islice(combos, chunk))
        if not block:
            break
        idx = np.array(block, dtype=int)
        covered = np.bitwise_or.reduce(row_mask[idx], axis=1) == full_mask
        if not np.any(covered):
            continue
        idx = idx[covered]
        mats = g[idx]  # (B, d, d)
        rhs = h[idx]  # (B, d)
        dets = np.abs(np.linalg.det(mats))
        # Hadamard bound: |det| <= prod of row norms; the ratio grades conditioning
        scale = np.prod(np.linalg.norm(mats, axis=2), axis=1)
        solvable = dets > singular_tol * np.maximum(scale, 1e-12)
        if not np.any(solvable):
            continue
        pts = np.linalg.solve(mats[solvable], rhs[solvable][..., None])[..., 0]
        exact = (
            np.max(np.abs(np.einsum("bij,bj->bi", mats[solvable], pts) - rhs[solvable]), axis=1)
            <= feas_tol
        )
        pts = pts[exact]
        if pts.size == 0:
            continue
        feasible = np.all(pts @ g.T <= h[None, :] + feas_tol, axis=1)
        if np.any(feasible):
            found.append(pts[feasible])

    if not found:
        return np.empty((0, d))
    pts = np.vstack(found)
    # two-stage dedup: rounding keys collapse near-identical copies (the
    # original coordinates are kept), then a tolerance merge
    _, first = np.unique(np.round(pts, 9), axis=0, return_index=True)
    pts = pts[first]
    order = np.lexsort(pts.T[::-1])
    pts = pts[order]
    reps: list[np.ndarray] = []
    for p in pts:
        if reps and np.min(np.linalg.norm(np.asarray(reps) - p, axis=1)) <= dedup_tol:
            continue
        reps.append(p)
    out = np.asarray(reps)
    return out[np.lexsort(out.T[::-1])]
