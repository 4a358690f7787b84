"""Minima of F, barrier costs between wells, and Agmon distance fields.

Depths are computed on F itself (minimax barrier height above the well
floor), never on V or V_eps: the exponential eigenvalue scales e^{-d/eps}
are governed by F levels.  The Agmon metric sqrt(V) dx with V = |F'|^2/4
integrates to |Delta F|/2 along monotone stretches, which is the bridge
between the two pictures.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import (
    DegenerateDepths,
    NoMinimum,
    OutOfDomain,
    QuadratureFailure,
    TieAtGlobalMin,
    TooLarge,
)
from .potential import PotentialSpec, _eval_F, eval_potential

D0_SENTINEL = math.inf


@dataclass(frozen=True)
class WellStructure:
    """Ordered minima and their critical depths.

    minima[0] is the global minimum; minima[1:] are ordered so depths
    strictly decrease.  depths[i-1] is the cost of moving from minima[i]
    to the set of strictly deeper wells; the global well itself carries the
    infinite sentinel in d0.
    """

    minima: tuple          # ((x, F(x)), ...)
    depths: tuple          # (d_1, ..., d_N), strictly decreasing
    d0: float = D0_SENTINEL

    @property
    def n_wells(self) -> int:
        return len(self.minima)

    def to_dict(self) -> dict:
        return {
            "minima": [[float(x), float(f)] for x, f in self.minima],
            "depths": [float(d) for d in self.depths],
            "d0": "inf",
        }


@dataclass(frozen=True)
class AgmonField:
    """Distances in the sqrt(V)|dx| metric from a set of source points."""

    grid: tuple            # 1D: array of x; 2D: (xs, ys)
    dist: np.ndarray
    sources: tuple


# ---------------------------------------------------------------------------
# minima
# ---------------------------------------------------------------------------

def find_minima(spec: PotentialSpec, domain, n_grid: int):
    """Locate local minima of F on [domain[0], domain[1]], sorted by F value.

    Grid scan for sign changes of F' followed by root polishing until
    |F'| <= 1e-12.  Raises NoMinimum when F is monotone on the domain and
    TieAtGlobalMin when the two deepest minima are within 1e-10 in F.
    """
    if n_grid < 100:
        raise ValueError("n_grid must be at least 100")
    lo, hi = float(domain[0]), float(domain[1])
    xs = np.linspace(lo, hi, int(n_grid))
    _, F1, _ = _eval_F(spec, xs)

    def f1(x):
        return _eval_F(spec, x)[1]

    minima = []
    for i in range(len(xs) - 1):
        if F1[i] < 0.0 <= F1[i + 1]:
            if F1[i + 1] == 0.0 and (i + 2 < len(xs) and F1[i + 2] < 0.0):
                continue  # touching zero from below, not a crossing
            root = brentq(f1, xs[i], xs[i + 1], xtol=1e-14, rtol=8.9e-16)
            # brentq terminates on the bracket; polish until the derivative
            # itself is at noise level
            for _ in range(5):
                d1 = f1(root)
                if abs(d1) <= 1e-12:
                    break
                d2 = _eval_F(spec, root)[2]
                if d2 <= 0:
                    break
                root -= d1 / d2
            minima.append((float(root), float(_eval_F(spec, root)[0])))
    if not minima:
        raise NoMinimum("F' has no negative-to-positive crossing on the domain")
    minima.sort(key=lambda p: p[1])
    if len(minima) > 1 and abs(minima[0][1] - minima[1][1]) < 1e-10:
        raise TieAtGlobalMin(
            f"two minima at F={minima[0][1]:.12g}; global minimum not unique")
    return minima


# ---------------------------------------------------------------------------
# barrier costs
# ---------------------------------------------------------------------------

def _segment_max_F(spec, a, b, n_grid):
    """Max of F on [a, b]: dense sampling plus golden-section refinement."""
    if a > b:
        a, b = b, a
    if a == b:
        return _eval_F(spec, a)[0]
    xs = np.linspace(a, b, max(int(n_grid), 64))
    F = _eval_F(spec, xs)[0]
    j = int(np.argmax(F))
    if j == 0 or j == len(xs) - 1:
        return float(F[j])  # monotone up to the endpoint; nothing to refine
    res = minimize_scalar(lambda u: -_eval_F(spec, u)[0],
                          bracket=(xs[j - 1], xs[j], xs[j + 1]),
                          method="golden", options={"xtol": 1e-12})
    return float(max(F[j], -res.fun))


def barrier_cost(spec: PotentialSpec, x: float, A, n_grid: int = 4001) -> float:
    """1D barrier cost: min over a in A of (max F on [x, a]) - F(x).

    Exact in 1D because every path between two points covers the segment.
    """
    x = float(x)
    targets = [float(a) for a in A]
    if not targets:
        raise OutOfDomain("target set A is empty")
    for p in [x] + targets:
        if not math.isfinite(p):
            raise OutOfDomain(f"non-finite location {p}")
        if spec.dimension == 3 and p < 0:
            raise OutOfDomain(f"negative radius {p} in a radial spec")
    if any(abs(a - x) < 1e-300 for a in targets):
        return 0.0
    Fx = _eval_F(spec, x)[0]
    best = math.inf
    for a in targets:
        best = min(best, _segment_max_F(spec, x, a, n_grid) - Fx)
    return float(best)


def _as_index_set(A):
    out = set()
    for a in A:
        out.add(tuple(a) if isinstance(a, (tuple, list)) else int(a))
    return out


def _neighbors_2d(i, j, n, m):
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            ii, jj = i + di, j + dj
            if 0 <= ii < n and 0 <= jj < m:
                yield ii, jj


def barrier_cost_grid(F_samples, x, A) -> float:
    """Minimax Dijkstra on a sampled field (1D line or 8-connected 2D grid).

    Path cost is the max node value along the path, endpoints included;
    returns (minimax level over paths to A) - F(x).
    """
    F = np.asarray(F_samples, dtype=float)
    A = _as_index_set(A)
    if F.ndim == 1:
        x = int(x)
        if x in {a if isinstance(a, int) else a[0] for a in A}:
            return 0.0
        best = math.inf
        for a in A:
            a = a if isinstance(a, int) else a[0]
            lo, hi = min(x, a), max(x, a)
            best = min(best, float(np.max(F[lo:hi + 1])))
        return best - float(F[x])
    if F.ndim != 2:
        raise OutOfDomain("grid must be 1D or 2D")
    n, m = F.shape
    start = tuple(x)
    if start in A:
        return 0.0
    INF = math.inf
    level = np.full((n, m), INF)
    level[start] = F[start]
    pq = [(F[start], start)]
    while pq:
        lv, (i, j) = heapq.heappop(pq)
        if lv > level[i, j]:
            continue
        if (i, j) in A:
            return float(lv - F[tuple(x)])
        for ii, jj in _neighbors_2d(i, j, n, m):
            cand = max(lv, F[ii, jj])
            if cand < level[ii, jj]:
                level[ii, jj] = cand
                heapq.heappush(pq, (cand, (ii, jj)))
    raise OutOfDomain("target set unreachable")


def barrier_cost_bruteforce(F_samples, x, A) -> float:
    """Exhaustive minimax over simple grid paths; the oracle for the Dijkstra.

    Refuses grids beyond 7x7 (1D beyond 49 nodes): path enumeration blows up.
    """
    F = np.asarray(F_samples, dtype=float)
    if F.size > 49:
        raise TooLarge(f"{F.shape} grid too large for enumeration")
    A = _as_index_set(A)
    if F.ndim == 1:
        x = int(x)
        if x in {a if isinstance(a, int) else a[0] for a in A}:
            return 0.0
        # on a line the only simple path is the segment itself
        best = math.inf
        for a in A:
            a = a if isinstance(a, int) else a[0]
            lo, hi = min(x, a), max(x, a)
            best = min(best, float(np.max(F[lo:hi + 1])))
        return best - float(F[x])
    n, m = F.shape
    start = tuple(x)
    if start in A:
        return 0.0
    best = [math.inf]
    visited = np.zeros((n, m), dtype=bool)

    def walk(i, j, cur_max):
        if cur_max >= best[0]:
            return  # extensions can only keep or raise the max
        if (i, j) in A:
            best[0] = cur_max
            return
        visited[i, j] = True
        for ii, jj in _neighbors_2d(i, j, n, m):
            if not visited[ii, jj]:
                walk(ii, jj, max(cur_max, F[ii, jj]))
        visited[i, j] = False

    walk(start[0], start[1], float(F[start]))
    if not math.isfinite(best[0]):
        raise OutOfDomain("target set unreachable")
    return best[0] - float(F[start])


def well_structure(spec: PotentialSpec, domain, n_grid: int = 4001
                   ) -> WellStructure:
    """Minima plus critical depths, wells relabeled so depths decrease."""
    minima = find_minima(spec, domain, n_grid)
    x0 = minima[0]
    rest = minima[1:]
    if not rest:
        return WellStructure(minima=(x0,), depths=())
    # depth of each shallow well against the set of strictly deeper ones
    by_F = [x0] + sorted(rest, key=lambda p: p[1])
    costs = {}
    for i in range(1, len(by_F)):
        deeper = [p[0] for p in by_F[:i]]
        costs[by_F[i]] = barrier_cost(spec, by_F[i][0], deeper, n_grid)
    ordered = sorted(rest, key=lambda p: -costs[p])
    depths = tuple(costs[p] for p in ordered)
    for d, d_next in zip(depths, depths[1:]):
        if abs(d - d_next) < 1e-10:
            raise DegenerateDepths(f"depths {d:.12g} and {d_next:.12g} coincide")
    return WellStructure(minima=(x0, *ordered), depths=depths)


# ---------------------------------------------------------------------------
# Agmon distances
# ---------------------------------------------------------------------------

def _adaptive_simpson(f, a, b, tol, max_depth=50):
    """Classic adaptive Simpson with Richardson correction."""

    def simpson(fa, fm, fb, a, b):
        return (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, a, m)
        right = simpson(fm, frm, fb, m, b)
        if depth >= max_depth:
            raise QuadratureFailure(
                f"adaptive Simpson hit depth {max_depth} on [{a}, {b}]")
        if abs(left + right - whole) <= 15.0 * tol:
            return left + right + (left + right - whole) / 15.0
        return (recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)
                + recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1))

    fa, fb = f(a), f(b)
    fm = f(0.5 * (a + b))
    whole = simpson(fa, fm, fb, a, b)
    return recurse(a, b, fa, fm, fb, whole, tol, 0)


def agmon_distance(spec: PotentialSpec, x: float, sources,
                   tol: float = 1e-8) -> float:
    """min over sources s of |int_x^s sqrt(V)| by adaptive Simpson.

    In 1D the metric is pointwise, so the straight segment is the geodesic.
    """
    if spec.dimension != 1:
        raise OutOfDomain("agmon_distance is 1D only")
    x = float(x)

    def sqrtV(u):
        return 0.5 * abs(_eval_F(spec, u)[1])

    best = math.inf
    for s in sources:
        s = float(s)
        if s == x:
            return 0.0
        a, b = (x, s) if x < s else (s, x)
        val = _adaptive_simpson(sqrtV, a, b, tol)
        best = min(best, abs(val))
    if not math.isfinite(best):
        raise QuadratureFailure("empty source set")
    return best


def _field_1d(spec, grid, sources, refine=4):
    """Cumulative sqrt(V) integral on a refined union grid, then lookup."""
    grid = np.asarray(grid, dtype=float)
    pts = np.unique(np.concatenate([grid, np.asarray(sources, dtype=float)]))
    fine = []
    for a, b in zip(pts[:-1], pts[1:]):
        fine.append(np.linspace(a, b, refine + 1)[:-1])
    fine.append(pts[-1:])
    fine = np.concatenate(fine)
    sq = 0.5 * np.abs(_eval_F(spec, fine)[1])
    seg = 0.5 * (sq[:-1] + sq[1:]) * np.diff(fine)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    cum_at = dict(zip(fine.tolist(), cum.tolist()))
    I_grid = np.array([cum_at[v] for v in pts.tolist()])
    lookup = dict(zip(pts.tolist(), I_grid.tolist()))
    I_src = np.array([lookup[float(s)] for s in sources])
    I_nodes = np.interp(grid, pts, I_grid)
    dist = np.min(np.abs(I_nodes[:, None] - I_src[None, :]), axis=1)
    return dist


_STENCIL_2D = [(di, dj) for di in (-2, -1, 0, 1, 2) for dj in (-2, -1, 0, 1, 2)
               if (di, dj) != (0, 0) and math.gcd(abs(di), abs(dj)) == 1]


def _field_2d(spec, xs, ys, sources):
    """Additive Dijkstra in the sqrt(V) metric on a 16-neighborhood stencil.

    The knight moves cut the worst-direction overshoot of the 8-neighborhood
    from ~8% to ~2.8%; a fixed stencil can never do better than an O(1)
    angular error, so consumers should treat 2D fields as ~3%-accurate.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    n, m = len(xs), len(ys)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    R = np.hypot(X, Y)
    sq = 0.5 * np.abs(_eval_F(spec, R.ravel())[1]).reshape(n, m)
    dist = np.full((n, m), math.inf)
    pq = []
    for sx, sy in sources:
        i = int(np.argmin(np.abs(xs - sx)))
        j = int(np.argmin(np.abs(ys - sy)))
        dist[i, j] = 0.0
        heapq.heappush(pq, (0.0, (i, j)))
    while pq:
        d, (i, j) = heapq.heappop(pq)
        if d > dist[i, j]:
            continue
        for di, dj in _STENCIL_2D:
            ii, jj = i + di, j + dj
            if not (0 <= ii < n and 0 <= jj < m):
                continue
            step = math.hypot(xs[ii] - xs[i], ys[jj] - ys[j])
            w = 0.5 * (sq[i, j] + sq[ii, jj]) * step
            nd = d + w
            if nd < dist[ii, jj]:
                dist[ii, jj] = nd
                heapq.heappush(pq, (nd, (ii, jj)))
    return dist


def agmon_field(spec: PotentialSpec, grid, sources) -> AgmonField:
    """Agmon distance from the source set at every grid node.

    1D: grid is an array of x values (piecewise-exact cumulative integral).
    2D: grid is (xs, ys); V is evaluated radially and distances come from
    Dijkstra with edge weight (sqrt(V(p)) + sqrt(V(q)))/2 * |p - q|.
    Sources are snapped to the nearest node in 2D.
    """
    if isinstance(grid, tuple) and len(grid) == 2:
        dist = _field_2d(spec, grid[0], grid[1], sources)
        return AgmonField(grid=(np.asarray(grid[0], dtype=float),
                                np.asarray(grid[1], dtype=float)),
                          dist=dist, sources=tuple(map(tuple, sources)))
    dist = _field_1d(spec, grid, sources)
    return AgmonField(grid=np.asarray(grid, dtype=float), dist=dist,
                      sources=tuple(float(s) for s in sources))
