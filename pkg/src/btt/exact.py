"""Exact oracles: minimum bad-triangle covers, minimum-disagreement
clusterings, and the cover-versus-clustering ratio survey.

The cover search is a branch-and-bound over edges: branch on one edge of
a currently uncovered bad triangle (include it or forbid it), prune with
a greedy edge-disjoint packing bound.  The clustering search enumerates
set partitions as restricted growth strings with incremental cost and
incumbent pruning.  Both are desk-scale tools; budgets guard against
runaway instances and witnesses are re-validated through the graph
evaluators rather than trusted from the search.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass
from fractions import Fraction

from . import lp as lp_mod
from .errors import BudgetExceededError, CapacityError, InputError
from .graphs import (Clustering, EdgeCover, POSITIVE, SignedGraph, cc_cost,
                     format_edge_list, is_feasible_cover)
from .lp import greedy_maximal_packing
from .rng import spawn_seeds

DEFAULT_BTT_TRIANGLE_BUDGET = 5000
DEFAULT_BTT_NODE_BUDGET = 5_000_000
DEFAULT_CC_NODE_CAP = 12
DEFAULT_CC_NODE_BUDGET = 50_000_000


@dataclass(frozen=True)
class ExactResult:
    """An exact optimum with its witness and a summary of the search.

    ``trail`` records incumbent improvements as (nodes_explored, value)
    pairs; together with ``root_lower_bound`` it documents why the final
    value is optimal.  ``optima`` is populated only by enumeration runs.
    """

    value: object
    witness: object
    nodes_explored: int
    root_lower_bound: object
    trail: tuple
    optima: tuple | None = None
    optima_truncated: bool = False


def _btt_search(g: SignedGraph, allowed: list[int], *,
                triangle_budget: int, node_budget: int,
                enumerate_cap=None, max_optima: int = 10_000):
    """Shared branch-and-bound core.

    In optimisation mode (enumerate_cap None) returns the best cover.  In
    enumeration mode collects every feasible cover of cost exactly
    ``enumerate_cap`` (which must be the optimum for that to be the set of
    optima).
    """
    tris = g.bad_triangles()
    if len(tris) > triangle_budget:
        raise CapacityError(
            f"{len(tris)} bad triangles exceed the search budget {triangle_budget}")
    allowed_set = frozenset(allowed)
    for t in tris:
        if not any(eid in allowed_set for eid in t.edge_ids):
            raise InputError(
                f"triangle {t.nodes} has no allowed edge; no feasible cover exists")
    nt = len(tris)
    full = (1 << nt) - 1
    weights = [g.edges[i].weight for i in range(g.m)]
    tri_edges = [tuple(eid for eid in t.edge_ids if eid in allowed_set)
                 for t in tris]
    edge_tri_mask = [0] * g.m
    for ti, t in enumerate(tris):
        for eid in t.edge_ids:
            if eid in allowed_set:
                edge_tri_mask[eid] |= 1 << ti

    def packing_bound(covered: int, excluded: int):
        """Greedy edge-disjoint packing of uncovered triangles; each packed
        triangle forces at least its cheapest allowed edge.  Returns None
        when some triangle has no allowed edge left (infeasible branch)."""
        bound = 0
        used = 0
        remaining = full & ~covered
        while remaining:
            low = remaining & -remaining
            ti = low.bit_length() - 1
            remaining ^= low
            open_edges = [e for e in tri_edges[ti] if not excluded & (1 << e)]
            if not open_edges:
                return None
            mask = 0
            for e in open_edges:
                mask |= 1 << e
            if not mask & used:
                used |= mask
                bound += min(weights[e] for e in open_edges)
        return bound

    # Seed the incumbent with the packing-based 3-approximation.
    state = {"nodes": 0, "best": None, "best_cover": None, "trail": []}
    if enumerate_cap is None:
        from .approx import standard_three_approx
        seed_ids = [i for i in standard_three_approx(g).cover.edge_ids
                    if i in allowed_set]
        # The packing union may use forbidden edges; fall back to all
        # allowed edges (always feasible here).
        if not is_feasible_cover(g, seed_ids):
            seed_ids = sorted(allowed_set)
        state["best"] = sum(weights[i] for i in seed_ids)
        state["best_cover"] = frozenset(seed_ids)
        state["trail"] = [(0, state["best"])]
    optima: list[frozenset] = []
    truncated = [False]
    included: list[int] = []

    def select(covered: int, excluded: int):
        best = None
        remaining = full & ~covered
        while remaining:
            low = remaining & -remaining
            ti = low.bit_length() - 1
            remaining ^= low
            open_edges = [e for e in tri_edges[ti] if not excluded & (1 << e)]
            key = (len(open_edges), open_edges[0] if open_edges else -1, ti)
            if best is None or key < best[0]:
                best = (key, open_edges)
                if key[0] <= 1:
                    break
        return best[1]

    def dfs(covered: int, excluded: int, cost):
        state["nodes"] += 1
        if state["nodes"] > node_budget:
            lb = packing_bound(0, 0) or 0
            raise BudgetExceededError(
                f"cover search exceeded {node_budget} nodes",
                (lb, state["best"]))
        bound = packing_bound(covered, excluded)
        if bound is None:
            return
        if enumerate_cap is None:
            if cost + bound >= state["best"]:
                return
        elif cost + bound > enumerate_cap:
            return
        if covered == full:
            if enumerate_cap is None:
                state["best"] = cost
                state["best_cover"] = frozenset(included)
                state["trail"].append((state["nodes"], cost))
            else:
                if len(optima) < max_optima:
                    optima.append(frozenset(included))
                else:
                    truncated[0] = True
            return
        open_edges = select(covered, excluded)
        if not open_edges:
            return
        branch = open_edges[0]
        included.append(branch)
        dfs(covered | edge_tri_mask[branch], excluded, cost + weights[branch])
        included.pop()
        dfs(covered, excluded | (1 << branch), cost)

    root_bound = packing_bound(0, 0)
    dfs(0, 0, 0)
    return state, optima, truncated[0], root_bound


def exact_btt(g: SignedGraph, *,
              triangle_budget: int = DEFAULT_BTT_TRIANGLE_BUDGET,
              node_budget: int = DEFAULT_BTT_NODE_BUDGET) -> ExactResult:
    """Minimum-weight feasible bad-triangle cover, branch-and-bound.

    Raises CapacityError when the triangle count exceeds the budget and
    BudgetExceededError (with best bounds) when the node budget runs out.
    """
    tris = g.bad_triangles()
    if not tris:
        return ExactResult(0, EdgeCover(frozenset(), 0), 0, 0, ((0, 0),))
    state, _, _, root_bound = _btt_search(
        g, list(range(g.m)), triangle_budget=triangle_budget,
        node_budget=node_budget)
    cover = EdgeCover.from_ids(g, state["best_cover"])
    if not is_feasible_cover(g, cover) or cover.cost != state["best"]:
        raise AssertionError("cover search returned an invalid witness")
    return ExactResult(state["best"], cover, state["nodes"], root_bound,
                       tuple(state["trail"]))


def exact_btt_positive_only(g: SignedGraph, *,
                            triangle_budget: int = DEFAULT_BTT_TRIANGLE_BUDGET,
                            node_budget: int = DEFAULT_BTT_NODE_BUDGET,
                            enumerate_optima: int | None = None) -> ExactResult:
    """Minimum cover drawn from positive edges only.

    Always feasible: every bad triangle has two positive edges.  With
    ``enumerate_optima`` set, a second pass collects all optimal covers up
    to that count cap (exact search, so the list is complete unless the
    ``optima_truncated`` flag is set).
    """
    tris = g.bad_triangles()
    allowed = g.positive_edge_ids()
    if not tris:
        return ExactResult(0, EdgeCover(frozenset(), 0), 0, 0, ((0, 0),),
                           optima=(frozenset(),) if enumerate_optima else None)
    state, _, _, root_bound = _btt_search(
        g, allowed, triangle_budget=triangle_budget, node_budget=node_budget)
    cover = EdgeCover.from_ids(g, state["best_cover"])
    if not is_feasible_cover(g, cover):
        raise AssertionError("positive-only search returned an invalid witness")
    optima = None
    truncated = False
    if enumerate_optima is not None:
        _, found, truncated, _ = _btt_search(
            g, allowed, triangle_budget=triangle_budget,
            node_budget=node_budget, enumerate_cap=state["best"],
            max_optima=enumerate_optima)
        optima = tuple(sorted(found, key=sorted))
    return ExactResult(state["best"], cover, state["nodes"], root_bound,
                       tuple(state["trail"]), optima=optima,
                       optima_truncated=truncated)


def exact_cc(g: SignedGraph, *,
             max_nodes: int = DEFAULT_CC_NODE_CAP,
             node_budget: int = DEFAULT_CC_NODE_BUDGET,
             lower_bound=None) -> ExactResult:
    """Minimum-disagreement clustering by restricted-growth enumeration.

    Assigns nodes in id order to an existing cluster or a fresh one,
    carrying the cost of finalised pairs and pruning on the incumbent.
    ``lower_bound`` (for instance a known minimum cover cost) allows early
    exit once matched.  Guarded by ``max_nodes``; larger instances need a
    different oracle.
    """
    if g.n > max_nodes:
        raise CapacityError(
            f"exact clustering search capped at {max_nodes} nodes (n={g.n}); "
            "raise max_nodes explicitly if you accept the cost")
    if g.n == 0:
        return ExactResult(0, Clustering((), 0), 0, 0, ((0, 0),))
    # Adjacency of finalised pairs: for node i, its weighted signed edges
    # to nodes j < i.
    back_edges: list[list[tuple[int, int, object]]] = [[] for _ in range(g.n)]
    for e in g.edges:
        back_edges[e.v].append((e.u, e.sign, e.weight))
    singletons = Clustering.from_labels(list(range(g.n)))
    one_cluster = Clustering.from_labels([0] * g.n)
    seeds = [(cc_cost(g, singletons), singletons),
             (cc_cost(g, one_cluster), one_cluster)]
    best_value, best_witness = min(seeds, key=lambda s: s[0])
    trail = [(0, best_value)]
    labels = [0] * g.n
    state = {"nodes": 0, "best": best_value, "witness": best_witness,
             "done": best_value == lower_bound}

    def assign(i: int, k: int, cost):
        if state["done"]:
            return
        state["nodes"] += 1
        if state["nodes"] > node_budget:
            raise BudgetExceededError(
                f"clustering search exceeded {node_budget} nodes",
                (lower_bound if lower_bound is not None else 0, state["best"]))
        if i == g.n:
            if cost < state["best"]:
                state["best"] = cost
                state["witness"] = Clustering.from_labels(labels)
                trail.append((state["nodes"], cost))
                if lower_bound is not None and cost == lower_bound:
                    state["done"] = True
            return
        # cost of putting node i into cluster c: negative edges inside,
        # positive edges towards every other existing cluster
        pos_to: dict[int, object] = {}
        neg_to: dict[int, object] = {}
        pos_total = 0
        for j, sign, w in back_edges[i]:
            c = labels[j]
            if sign == POSITIVE:
                pos_to[c] = pos_to.get(c, 0) + w
                pos_total += w
            else:
                neg_to[c] = neg_to.get(c, 0) + w
        for c in range(k + 1):
            added = (pos_total - pos_to.get(c, 0)) + neg_to.get(c, 0)
            new_cost = cost + added
            if new_cost >= state["best"]:
                continue
            labels[i] = c
            assign(i + 1, max(k, c + 1), new_cost)
        labels[i] = 0

    labels[0] = 0
    assign(1, 1, 0)
    witness = state["witness"]
    if cc_cost(g, witness) != state["best"]:
        raise AssertionError("clustering search returned an invalid witness")
    return ExactResult(state["best"], witness, state["nodes"],
                       lower_bound if lower_bound is not None else 0,
                       tuple(trail))


# -- cover-versus-clustering survey -----------------------------------------


def _is_unit_weighted(g: SignedGraph) -> bool:
    return all(e.weight == 1 for e in g.edges)


def sandwich_report(g: SignedGraph, **budgets) -> dict:
    """Compute packing size, LP value, minimum cover and minimum clustering
    cost for one instance, plus the inequality checks that apply to it.

    The count-based inequalities (packing <= LP, cover <= 3 x packing) are
    checked on unit-weight graphs; the 1.5 clustering bound additionally
    needs completeness.  LP <= cover <= clustering holds for any signed
    graph and is always checked.
    """
    packing = len(greedy_maximal_packing(g))
    lp_value = lp_mod.solve_exact(g).value
    btt = exact_btt(g, **budgets)
    # the disagreement edges of any clustering form a feasible cover, so
    # the minimum cover cost lower-bounds the clustering optimum
    cc = exact_cc(g, lower_bound=btt.value)
    unit = _is_unit_weighted(g)
    checks = {
        "lp_le_cover": lp_value <= btt.value,
        "cover_le_clustering": btt.value <= cc.value,
    }
    if unit:
        checks["packing_le_lp"] = packing <= lp_value
        checks["cover_le_3_packing"] = btt.value <= 3 * packing
    if unit and g.complete:
        checks["clustering_le_1.5_cover"] = 2 * cc.value <= 3 * btt.value
    return {
        "n": g.n,
        "complete": g.complete,
        "unit_weights": unit,
        "packing_size": packing,
        "lp_value": lp_value,
        "min_cover": btt.value,
        "min_clustering": cc.value,
        "checks": checks,
        "violations": sorted(name for name, ok in checks.items() if not ok),
    }


def _survey_one(index: int, seed: int, g: SignedGraph, budgets: dict) -> dict:
    start = time.perf_counter()
    row: dict = {"instance": index, "seed": seed, "n": g.n}
    try:
        btt = exact_btt(g, **{k: v for k, v in budgets.items()
                              if k in ("triangle_budget", "node_budget")})
        cc = exact_cc(g, lower_bound=btt.value)
        error = None
        if btt.value == 0:
            # both optima vanish together on complete graphs; a positive
            # clustering optimum over an empty cover can only happen on
            # non-complete instances (bad cycles without bad triangles)
            ratio = Fraction(1) if cc.value == 0 else None
            if ratio is None:
                error = "ratio undefined: cover optimum 0, clustering optimum > 0"
        else:
            ratio = Fraction(cc.value) / Fraction(btt.value)
        row.update(opt_cover=btt.value, opt_clustering=cc.value,
                   ratio=ratio, error=error)
    except CapacityError as exc:
        row.update(opt_cover=None, opt_clustering=None, ratio=None,
                   error=str(exc))
    row["runtime_s"] = time.perf_counter() - start
    return row


def workers_from_env() -> int:
    """Worker count for survey fan-out, from BTT_WORKERS (default 1)."""
    try:
        return max(1, int(os.environ.get("BTT_WORKERS", "1")))
    except ValueError:
        return 1


def ratio_survey(make_instance, count: int, seed: int, *,
                 workers: int | None = None, dump_dir=None, **budgets) -> dict:
    """Compare minimum cover and minimum clustering costs over a seeded
    instance suite.

    ``make_instance(instance_seed)`` builds one signed graph.  Each row
    records both optima and their ratio (0/0 counts as 1).  Ratios outside
    [1, 3/2] are collected as violations; ratios strictly above 1 are
    flagged as equality counterexample candidates and serialised in full
    (also written to ``dump_dir`` when given).  Budget errors are recorded
    per instance and the survey continues.
    """
    seeds = spawn_seeds(seed, count)
    graphs = [make_instance(s) for s in seeds]
    nworkers = workers_from_env() if workers is None else max(1, workers)
    if nworkers > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=nworkers) as pool:
            rows = list(pool.map(
                _survey_worker,
                [(i, seeds[i], graphs[i], budgets) for i in range(count)]))
    else:
        rows = [_survey_one(i, seeds[i], graphs[i], budgets)
                for i in range(count)]
    violations = []
    candidates = []
    for row, g in zip(rows, graphs):
        ratio = row["ratio"]
        if ratio is None:
            continue
        if not (1 <= ratio <= Fraction(3, 2)):
            violations.append(row["instance"])
        if ratio > 1:
            candidate = dict(row)
            candidate["edge_list"] = format_edge_list(g)
            candidates.append(candidate)
            if dump_dir is not None:
                path = os.path.join(dump_dir, f"candidate_{row['instance']}.txt")
                with open(path, "w", encoding="utf-8") as fh:
                    fh.write(candidate["edge_list"])
    return {
        "count": count,
        "seed": seed,
        "rows": rows,
        "violations": violations,
        "equality_counterexample_candidates": candidates,
    }


def _survey_worker(args):
    index, seed, g, budgets = args
    return _survey_one(index, seed, g, budgets)


SURVEY_CSV_HEADER = "instance,seed,n,opt_cover,opt_clustering,ratio,runtime_s"


def survey_rows_to_csv(rows: list[dict]) -> str:
    lines = [SURVEY_CSV_HEADER]
    for row in rows:
        ratio = row["ratio"]
        lines.append(",".join([
            str(row["instance"]), str(row["seed"]), str(row["n"]),
            "" if row["opt_cover"] is None else str(row["opt_cover"]),
            "" if row["opt_clustering"] is None else str(row["opt_clustering"]),
            "" if ratio is None else str(float(ratio)),
            f"{row['runtime_s']:.6f}",
        ]))
    return "\n".join(lines) + "\n"
