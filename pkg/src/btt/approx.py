"""Integral approximation algorithms for bad-triangle transversals.

Four families:

* the standard 3-approximation (all edges of a maximal edge-disjoint bad
  triangle packing);
* iterative LP rounding in the style of Krivelevich's triangle-cover
  algorithm, finished by a local-search max cut;
* single-shot deterministic rounding of an optimal fractional cover
  (negative edges with positive value, positive edges at or above 1/2);
* randomized threshold rounding and its derandomized threshold sweep,
  which also handle weighted instances and merely-feasible fractional
  covers.

Every algorithm returns a :class:`RoundingOutcome` whose cover is
re-checked for feasibility at construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import lp as lp_mod
from .errors import InputError
from .graphs import (EdgeCover, POSITIVE, SignedGraph, is_feasible_cover)
from .lp import (FLOAT_POSITIVITY_TAU, FractionalCover,
                 check_fractional_feasibility, greedy_maximal_packing)
from .rng import make_rng

ALG_THREE_APPROX = "3approx"
ALG_KRIVELEVICH = "kriv"
ALG_DETERMINISTIC = "det2"
ALG_RANDOMIZED = "rand2"
ALG_SWEEP = "sweep2"


@dataclass(frozen=True)
class RoundingOutcome:
    """A produced cover plus its certificate data.

    ``lower_bound`` is the LP-side quantity the ratio certifies against:
    the exact LP value where one was computed, the packing size for the
    packing-based 3-approximation, or None when the caller supplied no
    bound.  ``certified_ratio`` is cover cost over that bound (cover size
    for the 3-approximation, whose certificate is cardinality-based).
    """

    cover: EdgeCover
    algorithm: str
    threshold: object = None
    threshold_side: str | None = None
    seed: int | None = None
    lower_bound: object = None
    certified_ratio: object = None

    @classmethod
    def create(cls, g: SignedGraph, edge_ids, algorithm: str, *,
               threshold=None, threshold_side=None, seed=None,
               lower_bound=None, ratio_numerator=None) -> "RoundingOutcome":
        cover = EdgeCover.from_ids(g, edge_ids)
        if not is_feasible_cover(g, cover):
            raise AssertionError(
                f"{algorithm} produced an infeasible cover; this is a bug")
        ratio = None
        if lower_bound is not None:
            num = cover.cost if ratio_numerator is None else ratio_numerator
            if lower_bound == 0:
                ratio = 1
            elif isinstance(num, (int, Fraction)) and isinstance(lower_bound, (int, Fraction)):
                ratio = Fraction(num) / Fraction(lower_bound)
            else:
                ratio = num / lower_bound
        return cls(cover, algorithm, threshold, threshold_side, seed,
                   lower_bound, ratio)


def _is_float_mode(x: FractionalCover) -> bool:
    return any(isinstance(v, float) for v in x.values)


def _require_feasible(g: SignedGraph, x: FractionalCover) -> None:
    tol = 1e-9 if _is_float_mode(x) else 0
    if not check_fractional_feasibility(g, x, tol=tol):
        raise InputError("fractional cover is infeasible for this graph")


def standard_three_approx(g: SignedGraph) -> RoundingOutcome:
    """Union of all edges of a greedy maximal edge-disjoint packing.

    Feasible by maximality; exactly 3 edges per packed triangle, so the
    cardinality certificate is size <= 3 x packing size.
    """
    packing = greedy_maximal_packing(g)
    ids = sorted({eid for t in packing for eid in t.edge_ids})
    return RoundingOutcome.create(
        g, ids, ALG_THREE_APPROX,
        lower_bound=len(packing), ratio_numerator=len(ids))


def local_search_max_cut(g: SignedGraph, edge_ids=None) -> tuple[set[int], set[int]]:
    """Single-vertex-move local search, first improvement in node-id order.

    At a fixpoint every vertex has at least half its incident weight cut,
    so the cut carries at least half the total edge weight.  Signs are
    ignored; ``edge_ids`` restricts the instance to a subgraph.
    """
    ids = range(g.m) if edge_ids is None else sorted(edge_ids)
    incident: list[list[tuple[int, object]]] = [[] for _ in range(g.n)]
    for eid in ids:
        e = g.edges[eid]
        incident[e.u].append((e.v, e.weight))
        incident[e.v].append((e.u, e.weight))
    side = [0] * g.n
    improved = True
    while improved:
        improved = False
        for node in range(g.n):
            cut = sum(w for other, w in incident[node] if side[other] != side[node])
            uncut = sum(w for other, w in incident[node] if side[other] == side[node])
            if uncut > cut:
                side[node] = 1 - side[node]
                improved = True
    part1 = {v for v in range(g.n) if side[v] == 0}
    return part1, set(range(g.n)) - part1


def krivelevich(g: SignedGraph, solver=lp_mod.solve_exact) -> RoundingOutcome:
    """Iterative LP rounding: harvest high-value edges, drop zero-value
    edges, re-solve, and finish the residual graph with a max-cut step.

    While some surviving edge has value zero: edges at >= 1/2 join the
    cover, edges at zero or >= 1/2 leave the graph, and the LP is
    re-solved on what remains.  When no zero-value edge is left, all
    within-part edges of an approximate max cut of the residual graph are
    added; any triangle has two nodes on one side, so residual bad
    triangles are covered, and earlier deletions were covered at deletion
    time (a zero-value edge in a triangle forces some edge at >= 1/2).

    The certificate (cost <= 2 x the first LP value) is recorded against
    the original graph's exact LP optimum.
    """
    first = solver(g)
    lp_value = first.primal.objective
    cover: set[int] = set()
    alive = list(range(g.m))
    values = list(first.primal.values)
    float_mode = _is_float_mode(first.primal)
    tau = FLOAT_POSITIVITY_TAU if float_mode else 0
    half = (1 - tau) / 2 if float_mode else Fraction(1, 2)

    while any(v <= tau for v in values):
        cover.update(eid for eid, v in zip(alive, values) if v >= half)
        survivors = [eid for eid, v in zip(alive, values) if tau < v < half]
        alive = survivors
        sub = _restriction(g, alive)
        sol = solver(sub)
        values = list(sol.primal.values)
    sub = _restriction(g, alive)
    part1, part2 = local_search_max_cut(sub)
    for sub_eid, e in enumerate(sub.edges):
        same1 = e.u in part1 and e.v in part1
        same2 = e.u in part2 and e.v in part2
        if same1 or same2:
            cover.add(alive[sub_eid])
    return RoundingOutcome.create(g, cover, ALG_KRIVELEVICH, lower_bound=lp_value)


def _restriction(g: SignedGraph, edge_ids: list[int]) -> SignedGraph:
    """Subgraph on the same node set keeping edges in id order."""
    tuples = [(g.edges[i].u, g.edges[i].v, g.edges[i].sign, g.edges[i].weight)
              for i in edge_ids]
    return SignedGraph(g.n, tuples, complete=False)


def round_deterministic(g: SignedGraph, x: FractionalCover,
                        lower_bound=None) -> RoundingOutcome:
    """Negative edges with positive value plus positive edges at >= 1/2.

    Feasible for any feasible ``x``; the 2x cost guarantee additionally
    needs ``x`` optimal (complementary slackness).  In floating mode
    "positive" means above FLOAT_POSITIVITY_TAU and the positive-edge
    threshold relaxes to (1 - tau)/2.
    """
    _require_feasible(g, x)
    x = x.clamped(g)
    float_mode = _is_float_mode(x)
    tau = FLOAT_POSITIVITY_TAU if float_mode else 0
    # positive threshold drops by tau so that excluding a negative edge at
    # <= tau still leaves an includable positive edge for tol-feasible x
    half = (1 - 2 * tau) / 2 if float_mode else Fraction(1, 2)
    ids = [i for i, e in enumerate(g.edges)
           if (e.sign != POSITIVE and x.values[i] > tau)
           or (e.sign == POSITIVE and x.values[i] >= half)]
    return RoundingOutcome.create(g, ids, ALG_DETERMINISTIC, lower_bound=lower_bound)


def _threshold_cover_ids(g: SignedGraph, values, r, side: str) -> list[int]:
    """Edges selected at threshold r; ``side`` 'above' takes the right limit.

    In floating mode both rules gain an inclusion slack of tau, so any x
    whose triangle sums are within 3*tau of feasible still rounds to a
    feasible cover at every threshold (an uncovered triangle would force
    a sum below 1 - 3*tau).
    """
    tau = FLOAT_POSITIVITY_TAU if any(isinstance(v, float) for v in values) else 0
    ids = []
    for i, e in enumerate(g.edges):
        v = values[i]
        if e.sign == POSITIVE:
            take = v > r / 2 - tau if side == "above" else v >= r / 2 - tau
        else:
            take = v >= 1 - r - tau if side == "above" else v > 1 - r - tau
        if take:
            ids.append(i)
    return ids


def round_fixed_threshold(g: SignedGraph, x: FractionalCover, r, *,
                          lower_bound=None, seed=None,
                          algorithm=ALG_RANDOMIZED) -> RoundingOutcome:
    """Threshold rounding at a fixed r: positive edges with x >= r/2 and
    negative edges with x strictly above 1-r.

    Always feasible for feasible x: an uncovered bad triangle would make
    its constraint sum strictly below (1-r) + r/2 + r/2 = 1.
    """
    _require_feasible(g, x)
    if not (0 <= r <= 1):
        raise InputError(f"threshold must lie in [0,1], got {r}")
    x = x.clamped(g)
    ids = _threshold_cover_ids(g, x.values, r, side="at")
    return RoundingOutcome.create(g, ids, algorithm, threshold=r,
                                  threshold_side="at", seed=seed,
                                  lower_bound=lower_bound)


def round_randomized(g: SignedGraph, x: FractionalCover, seed: int,
                     lower_bound=None) -> RoundingOutcome:
    """Draw r uniformly from the seeded counter-based stream and round.

    Per-edge inclusion probability is x_e for negative edges and
    min(1, 2 x_e) for positive edges, so the expected weighted cost is at
    most the negative part plus twice the positive part of the objective.
    """
    r = float(make_rng(seed).random())
    return round_fixed_threshold(g, x, r, lower_bound=lower_bound, seed=seed)


def expected_rounding_cost(g: SignedGraph, x: FractionalCover):
    """Exact expectation of the randomized-rounding cover cost."""
    x = x.clamped(g)
    total = 0
    for e, v in zip(g.edges, x.values):
        total += e.weight * (min(1, 2 * v) if e.sign == POSITIVE else v)
    return total


def derandomized_sweep(g: SignedGraph, x: FractionalCover,
                       lower_bound=None) -> RoundingOutcome:
    """Minimum-cost cover over every combinatorially distinct threshold.

    Walks the sorted breakpoints (r = 2 x_e for positive edges, r = 1 - x_e
    for negative edges, both one-sided limits at each, plus the interval
    ends) while updating the running cover cost incrementally, so the scan
    is sort-plus-linear after the breakpoint sort.  The result costs no
    more than any fixed-threshold rounding, hence no more than the
    randomized expectation.
    """
    _require_feasible(g, x)
    x = x.clamped(g)
    values = x.values
    tau = FLOAT_POSITIVITY_TAU if _is_float_mode(x) else 0
    # Cost at r = 0: every positive edge, plus (float mode) negative edges
    # already inside the tau inclusion slack.
    running = sum(e.weight for i, e in enumerate(g.edges)
                  if e.sign == POSITIVE or values[i] > 1 - tau)
    events: dict[object, object] = {}
    for i, e in enumerate(g.edges):
        if e.sign == POSITIVE:
            v = 2 * values[i] + 2 * tau  # drops out once r exceeds this
            if v < 1:
                events[v] = events.get(v, 0) - e.weight
        else:
            v = 1 - values[i] - tau  # enters once r exceeds this
            if 0 <= v < 1:
                events[v] = events.get(v, 0) + e.weight
    best_cost, best_r, best_side = running, 0, "at"
    for v in sorted(events):
        if v > 0 and running < best_cost:
            best_cost, best_r, best_side = running, v, "at"
        running += events[v]
        if running < best_cost:
            best_cost, best_r, best_side = running, v, "above"
    # r = 1 candidate equals the last "above" (or the r=0 baseline when
    # there are no events), so it is already covered by the walk.
    ids = _threshold_cover_ids(g, values, best_r, best_side)
    outcome = RoundingOutcome.create(
        g, ids, ALG_SWEEP, threshold=best_r, threshold_side=best_side,
        lower_bound=lower_bound)
    if outcome.cover.cost != best_cost:
        raise AssertionError("sweep bookkeeping drifted from the rebuilt cover")
    return outcome


def randomized_rounding_trials(g: SignedGraph, x: FractionalCover,
                               trials: int, seed: int) -> dict:
    """Vectorised Monte Carlo batch of randomized rounding.

    Returns per-trial costs, per-edge inclusion counts and the drawn
    thresholds; used by the expectation tests and the CLI trial reports.
    Covers are not individually re-verified here (feasibility holds for
    every r by construction); use round_randomized for audited single runs.
    """
    import numpy as np

    _require_feasible(g, x)
    x = x.clamped(g)
    rng = make_rng(seed)
    r = rng.random(trials)
    vals = np.array([float(v) for v in x.values])
    w = np.array([float(e.weight) for e in g.edges])
    pos = np.array([e.sign == POSITIVE for e in g.edges])
    tau = FLOAT_POSITIVITY_TAU if _is_float_mode(x) else 0.0
    included = np.where(pos[None, :],
                        vals[None, :] >= r[:, None] / 2 - tau,
                        vals[None, :] > 1 - r[:, None] - tau)
    costs = included @ w
    return {
        "costs": costs,
        "inclusion_counts": included.sum(axis=0),
        "thresholds": r,
        "trials": trials,
        "seed": seed,
    }


ALGORITHMS = {
    ALG_THREE_APPROX: standard_three_approx,
    ALG_KRIVELEVICH: krivelevich,
    ALG_DETERMINISTIC: round_deterministic,
    ALG_RANDOMIZED: round_randomized,
    ALG_SWEEP: derandomized_sweep,
}

OUTCOME_SCHEMA = "btt.rounding-outcome/1"


def outcome_to_json(g: SignedGraph, outcome: RoundingOutcome) -> dict:
    def enc(v):
        return str(v) if isinstance(v, Fraction) else v

    return {
        "schema": OUTCOME_SCHEMA,
        "algorithm": outcome.algorithm,
        "seed": outcome.seed,
        "threshold": enc(outcome.threshold),
        "threshold_side": outcome.threshold_side,
        "cover_edge_ids": sorted(outcome.cover.edge_ids),
        "cover_pairs": [list(p) for p in outcome.cover.pairs(g)],
        "cost": enc(outcome.cover.cost),
        "size": outcome.cover.size,
        "lp_lower_bound": enc(outcome.lower_bound),
        "certified_ratio": enc(outcome.certified_ratio),
    }
