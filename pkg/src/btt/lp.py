"""The bad-triangle cover LP and its packing dual.

The primal minimises the weighted sum of per-edge values x_e subject to
every bad triangle summing to at least one; the dual packs fractional
bad-triangle masses y_t subject to a per-edge capacity of w_e.

Two solvers are provided:

* :func:`solve_exact` - dense exact-rational simplex run on the packing
  dual with Bland's rule.  Returns primal and dual optima together with a
  strong-duality certificate, enabling exact complementary-slackness
  checks downstream.
* :func:`solve_mwu` - a multiplicative-weights scheme for covering LPs.
  Returns a feasible primal within a caller-chosen factor (1+eps) of
  optimal, certified by a simultaneously maintained feasible dual.  No
  runtime guarantee is claimed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import CapacityError, ConvergenceError, InputError
from .graphs import BadTriangle, SignedGraph

#: Threshold separating "zero" from "positive" LP values in floating mode.
#: In rational mode the trichotomy is exact and the threshold is 0.
FLOAT_POSITIVITY_TAU = 1e-7

#: Default cap on the number of LP constraints (bad triangles) accepted by
#: the exact solver.
DEFAULT_EXACT_TRIANGLE_BOUND = 50_000

STATUS_EXACT = "exact-optimal"
STATUS_EPS = "eps-approximate"
STATUS_FEASIBLE = "feasible-only"


@dataclass(frozen=True)
class FractionalCover:
    """Per-edge LP values x_e >= 0 with their weighted objective."""

    values: tuple
    objective: object

    @classmethod
    def from_values(cls, g: SignedGraph, values: Sequence) -> "FractionalCover":
        if len(values) != g.m:
            raise InputError(f"expected {g.m} edge values, got {len(values)}")
        vals = tuple(values)
        obj = sum(e.weight * x for e, x in zip(g.edges, vals))
        return cls(vals, obj)

    def clamped(self, g: SignedGraph) -> "FractionalCover":
        """Values clamped into [0, 1]; never increases cost or breaks feasibility."""

        def clamp(v):
            if v < 0:
                return 0.0 if isinstance(v, float) else Fraction(0)
            if v > 1:
                return 1.0 if isinstance(v, float) else Fraction(1)
            return v

        return FractionalCover.from_values(g, [clamp(v) for v in self.values])


@dataclass(frozen=True)
class FractionalPacking:
    """Per-bad-triangle dual values y_t >= 0, aligned with g.bad_triangles()."""

    values: tuple
    objective: object

    @classmethod
    def from_values(cls, g: SignedGraph, values: Sequence) -> "FractionalPacking":
        if len(values) != len(g.bad_triangles()):
            raise InputError(
                f"expected {len(g.bad_triangles())} triangle values, got {len(values)}")
        vals = tuple(values)
        return cls(vals, sum(vals))


@dataclass(frozen=True)
class LpSolution:
    """A cover-LP solve result: primal, optional dual certificate, bounds.

    ``bounds = (lower, upper)`` bracket the LP optimum; in exact mode both
    equal the primal objective.
    """

    primal: FractionalCover
    dual: FractionalPacking | None
    status: str
    bounds: tuple
    eps: float | None = None

    @property
    def value(self):
        return self.primal.objective


def check_fractional_feasibility(g: SignedGraph, x: FractionalCover, tol=0) -> bool:
    """True iff all values >= -tol and every bad triangle sums to >= 1 - tol."""
    if len(x.values) != g.m:
        raise InputError(f"expected {g.m} edge values, got {len(x.values)}")
    if any(v < -tol for v in x.values):
        return False
    vals = x.values
    return all(sum(vals[i] for i in t.edge_ids) >= 1 - tol for t in g.bad_triangles())


def check_packing_feasibility(g: SignedGraph, y: FractionalPacking, tol=0) -> bool:
    """True iff y >= -tol and every edge load sum_{t: e in t} y_t <= w_e + tol."""
    if any(v < -tol for v in y.values):
        return False
    load = [0] * g.m
    for t, yt in zip(g.bad_triangles(), y.values):
        for eid in t.edge_ids:
            load[eid] += yt
    return all(load[i] <= g.edges[i].weight + tol for i in range(g.m))


def greedy_maximal_packing(g: SignedGraph) -> list[BadTriangle]:
    """Maximal set of pairwise edge-disjoint bad triangles, greedy in
    deterministic (lexicographic) triangle order.

    The induced 0/1 packing loads every edge at most once, so on
    unweighted graphs its size lower-bounds the cover-LP value.
    """
    used: set[int] = set()
    chosen: list[BadTriangle] = []
    for t in g.bad_triangles():
        if not any(eid in used for eid in t.edge_ids):
            chosen.append(t)
            used.update(t.edge_ids)
    return chosen


# -- exact rational simplex ------------------------------------------------


def _packing_simplex(triangles: list[tuple[int, int, int]], weights: list[Fraction]):
    """Simplex on: max sum(y) s.t. per-edge load <= weight, y >= 0 (Bland's rule).

    Returns (x, y, value): the packing optimum y, the cover optimum x read
    off the optimal tableau's slack reduced costs, and the shared objective
    value.  All exact Fractions.
    """
    m = len(weights)
    nt = len(triangles)
    ncols = nt + m
    zero = Fraction(0)
    one = Fraction(1)

    rows = [[zero] * ncols for _ in range(m)]
    rhs = [Fraction(w) for w in weights]
    for j, tri in enumerate(triangles):
        for eid in tri:
            rows[eid][j] = one
    for i in range(m):
        rows[i][nt + i] = one
    basis = list(range(nt, nt + m))
    # reduced costs c_j - z_j for the max problem; slack basis gives z = 0
    obj = [one] * nt + [zero] * m
    value = zero

    while True:
        enter = next((j for j in range(ncols) if obj[j] > 0), None)
        if enter is None:
            break
        leave_row = None
        best_ratio = None
        for i in range(m):
            coef = rows[i][enter]
            if coef > 0:
                ratio = rhs[i] / coef
                if (best_ratio is None or ratio < best_ratio
                        or (ratio == best_ratio and basis[i] < basis[leave_row])):
                    best_ratio = ratio
                    leave_row = i
        if leave_row is None:
            raise InputError("packing LP unbounded; graph invariants violated")
        piv_row = rows[leave_row]
        piv = piv_row[enter]
        if piv != 1:
            rows[leave_row] = piv_row = [a / piv for a in piv_row]
            rhs[leave_row] /= piv
        for i in range(m):
            if i == leave_row:
                continue
            factor = rows[i][enter]
            if factor != 0:
                row = rows[i]
                rows[i] = [a - factor * b if b else a for a, b in zip(row, piv_row)]
                rhs[i] -= factor * rhs[leave_row]
        factor = obj[enter]
        obj = [a - factor * b if b else a for a, b in zip(obj, piv_row)]
        value += factor * rhs[leave_row]
        basis[leave_row] = enter

    y = [zero] * nt
    for i, var in enumerate(basis):
        if var < nt:
            y[var] = rhs[i]
    x = [-obj[nt + e] for e in range(m)]
    return x, y, value


def solve_exact(g: SignedGraph,
                max_triangles: int = DEFAULT_EXACT_TRIANGLE_BOUND) -> LpSolution:
    """Exact-rational optimum of the cover LP with a dual certificate.

    Solves the packing dual by dense tableau simplex under Bland's rule;
    the cover optimum is recovered from the slack reduced costs, so primal
    and dual objectives agree identically (strong duality) and
    complementary slackness holds exactly.  Weights are converted to
    Fractions; float weights must be finite.

    Raises CapacityError when the bad-triangle count exceeds
    ``max_triangles``; use :func:`solve_mwu` there.
    """
    tris = g.bad_triangles()
    if len(tris) > max_triangles:
        raise CapacityError(
            f"{len(tris)} bad triangles exceed the exact-solver bound "
            f"{max_triangles}; use solve_mwu for an approximate solution")
    if not tris:
        primal = FractionalCover.from_values(g, [Fraction(0)] * g.m)
        dual = FractionalPacking.from_values(g, [])
        return LpSolution(primal, dual, STATUS_EXACT, (Fraction(0), Fraction(0)))
    weights = [Fraction(e.weight) for e in g.edges]
    x, y, value = _packing_simplex([t.edge_ids for t in tris], weights)
    primal = FractionalCover.from_values(g, x).clamped(g)
    dual = FractionalPacking.from_values(g, y)
    if primal.objective != value or dual.objective != value:
        raise AssertionError("simplex lost strong duality; this is a bug")
    return LpSolution(primal, dual, STATUS_EXACT, (value, value))


# -- multiplicative-weights covering solver --------------------------------


def _mwu_iteration_cap(num_triangles: int, eps: float) -> int:
    base = 4.0 * math.log(max(num_triangles, 2)) / (eps * eps)
    return 10 * int(math.ceil(base))


def solve_mwu(g: SignedGraph, eps: float,
              max_iterations: int | None = None) -> LpSolution:
    """(1+eps)-approximate cover-LP solve by multiplicative weights.

    Width-1 scheme on the triangle constraints with step eps/4: constraint
    weights decay exponentially in current coverage, each round the most
    cost-effective edge under those weights gains one unit, and the scan
    that reprices the cached triangle list also yields the least-covered
    triangle used for primal scaling.  Every round produces a feasible
    primal candidate (raw values divided by the minimum constraint sum)
    and a feasible dual candidate (constraint weights scaled into the
    packing polytope); the loop stops as soon as the best pair certifies
    primal <= (1+eps) * dual.

    Returns an LpSolution with ``bounds = (dual value, primal value)``.
    Raises ConvergenceError carrying the best bounds if the iteration cap
    is hit first (cap: O(log T / eps^2) times a safety factor of 10).
    """
    if not (0 < eps < 1):
        raise InputError(f"eps must lie in (0,1), got {eps}")
    tris_all = g.bad_triangles()
    if not tris_all:
        primal = FractionalCover.from_values(g, [0.0] * g.m)
        dual = FractionalPacking.from_values(g, [])
        return LpSolution(primal, dual, STATUS_EPS, (0.0, 0.0), eps=eps)

    # Edges of zero weight cover their triangles for free.
    free = {i for i, e in enumerate(g.edges) if e.weight == 0}
    keep_idx = [k for k, t in enumerate(tris_all)
                if not any(eid in free for eid in t.edge_ids)]
    x_final = np.zeros(g.m)
    for i in free:
        x_final[i] = 1.0
    if not keep_idx:
        primal = FractionalCover.from_values(g, x_final.tolist())
        dual = FractionalPacking.from_values(g, [0.0] * len(tris_all))
        return LpSolution(primal, dual, STATUS_EPS,
                          (0.0, float(primal.objective)), eps=eps)

    tri_edges = np.array([tris_all[k].edge_ids for k in keep_idx], dtype=np.int64)
    nt = len(keep_idx)
    w = np.array([float(e.weight) for e in g.edges])
    candidate = np.zeros(g.m, dtype=bool)
    candidate[np.unique(tri_edges)] = True
    candidate[list(free)] = False
    cand_ids = np.flatnonzero(candidate)

    eta = eps / 4.0
    cap = max_iterations if max_iterations is not None else _mwu_iteration_cap(nt, eps)

    x_raw = np.zeros(g.m)
    best_primal = math.inf
    best_x = None
    best_dual = 0.0
    best_y = None
    certified = False
    for _ in range(cap):
        cover_sums = x_raw[tri_edges].sum(axis=1)
        min_cov = cover_sums.min()
        p = np.exp(-eta * (cover_sums - min_cov))
        edge_scores = np.bincount(tri_edges.ravel(),
                                  weights=np.repeat(p, 3), minlength=g.m)
        ratios = edge_scores[cand_ids] / w[cand_ids]
        mu = ratios.max()
        dual_val = p.sum() / mu
        if dual_val > best_dual:
            best_dual = dual_val
            best_y = p / mu
        if min_cov > 0:
            cost = float(w @ x_raw) / min_cov
            if cost < best_primal:
                best_primal = cost
                best_x = x_raw / min_cov
        if best_x is not None and best_primal <= (1 + eps) * best_dual:
            certified = True
            break
        x_raw[cand_ids[np.argmax(ratios)]] += 1.0
    if not certified:
        raise ConvergenceError(
            f"MWU failed to certify a (1+{eps}) gap within {cap} iterations",
            (best_dual, best_primal))

    # Feasibility hardening against float slop, then clamp into [0, 1].
    scaled = x_raw_to_feasible(best_x, tri_edges)
    x_final += scaled
    np.clip(x_final, 0.0, 1.0, out=x_final)
    primal = FractionalCover.from_values(g, x_final.tolist())

    y_full = np.zeros(len(tris_all))
    y_full[keep_idx] = best_y * (1 - 1e-12)
    dual = FractionalPacking.from_values(g, y_full.tolist())
    return LpSolution(primal, dual, STATUS_EPS,
                      (float(dual.objective), float(primal.objective)), eps=eps)


def x_raw_to_feasible(x: np.ndarray, tri_edges: np.ndarray) -> np.ndarray:
    """Rescale so every triangle sum is >= 1 exactly in float arithmetic."""
    scaled = x.copy()
    for _ in range(5):
        min_cov = scaled[tri_edges].sum(axis=1).min()
        if min_cov >= 1.0:
            return scaled
        scaled /= min_cov
    raise AssertionError("rescaling failed to reach feasibility")


# -- JSON ------------------------------------------------------------------

LP_SCHEMA = "btt.lp-solution/1"


def _value_to_json(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, float):
        return v
    return str(v) if isinstance(v, int) and abs(v) > 2**52 else v


def lp_solution_to_json(g: SignedGraph, sol: LpSolution) -> dict:
    obj = {
        "schema": LP_SCHEMA,
        "status": sol.status,
        "eps": sol.eps,
        "bounds": [_value_to_json(sol.bounds[0]), _value_to_json(sol.bounds[1])],
        "objective": _value_to_json(sol.primal.objective),
        "edge_values": [_value_to_json(v) for v in sol.primal.values],
    }
    if sol.dual is not None:
        obj["dual_objective"] = _value_to_json(sol.dual.objective)
        obj["triangle_values"] = [_value_to_json(v) for v in sol.dual.values]
    return obj
