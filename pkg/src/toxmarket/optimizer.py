"""Budget-constrained basket selection with pairwise synergies.

Pick a subset of assets maximizing stand-alone values plus synergies of
co-selected pairs, subject to a budget on acquisition costs. The
quadratic objective linearizes to a mixed integer program with one
auxiliary y_ij per synergy pair (y_ij <= x_i, y_ij <= x_j bind positive
synergies; y_ij >= x_i + x_j - 1, y_ij >= 0 bind negative ones), and the
model can be exported in a plain-text <=-form for an industrial solver.

Solving here is a self-contained exact branch-and-bound: desk-scale
instances do not justify a solver dependency, and integer-cents
arithmetic throughout makes oracle comparisons exact. A 2^n brute-force
oracle (n <= 20) verifies it.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from .errors import ArgumentError

OPTIMAL = "OPTIMAL"
BOUND_GAP = "BOUND_GAP"


@dataclass(frozen=True)
class BasketInstance:
    """Assets with values, costs, pairwise synergies, and a budget (all cents)."""

    values: tuple[int, ...]
    costs: tuple[int, ...]
    synergies: Mapping[tuple[int, int], int] = field(default_factory=dict)
    budget: int = 0

    @property
    def n(self) -> int:
        return len(self.values)

    def __post_init__(self) -> None:
        if len(self.costs) != self.n:
            raise ArgumentError("values and costs must have equal length")
        if any(not isinstance(v, int) for v in self.values):
            raise ArgumentError("values must be integers (cents)")
        if any(not isinstance(c, int) or c <= 0 for c in self.costs):
            raise ArgumentError("costs must be strictly positive integers (cents)")
        if not isinstance(self.budget, int) or self.budget < 0:
            raise ArgumentError("budget must be a non-negative integer (cents)")
        canonical: dict[tuple[int, int], int] = {}
        for (i, j), s in self.synergies.items():
            if i == j:
                raise ArgumentError(f"self-pair ({i},{j}) not allowed")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ArgumentError(f"pair ({i},{j}) out of range for n={self.n}")
            key = (min(i, j), max(i, j))
            if key in canonical:
                raise ArgumentError(f"pair {key} appears more than once")
            if not isinstance(s, int):
                raise ArgumentError("synergies must be integers (cents)")
            canonical[key] = s
        object.__setattr__(self, "synergies", canonical)

    def evaluate(self, selected: Iterable[int]) -> tuple[int, int]:
        """(objective, spend) of a selection, in cents."""
        chosen = set(selected)
        objective = sum(self.values[i] for i in chosen)
        objective += sum(
            s for (i, j), s in self.synergies.items() if i in chosen and j in chosen
        )
        spend = sum(self.costs[i] for i in chosen)
        return objective, spend


@dataclass(frozen=True)
class BasketSolution:
    selected: tuple[int, ...]
    objective_cents: int
    spend_cents: int
    proof: str  # OPTIMAL or BOUND_GAP
    bound_cents: Optional[int] = None  # best proven upper bound when BOUND_GAP

    def __post_init__(self) -> None:
        if self.proof not in (OPTIMAL, BOUND_GAP):
            raise ArgumentError(f"unknown proof kind {self.proof!r}")


# ----------------------------------------------------------------------
# Linearized model
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class Constraint:
    """sum(coef * var) <= rhs."""

    name: str
    terms: tuple[tuple[int, str], ...]
    rhs: int


@dataclass(frozen=True)
class LinearModel:
    objective: tuple[tuple[int, str], ...]  # maximize sum(coef * var)
    constraints: tuple[Constraint, ...]
    binaries: tuple[str, ...]
    unit_bounded: tuple[str, ...]  # continuous vars in [0, 1]


def build_model(instance: BasketInstance) -> LinearModel:
    """Linearize the quadratic basket objective.

    For each synergy pair the auxiliary y equals x_i*x_j at every binary
    point: maximization pushes y up against y <= x_i, y <= x_j when the
    synergy is positive, and down against y >= x_i + x_j - 1, y >= 0
    (written in <=-form) when it is negative.
    """
    x = [f"x{i}" for i in range(instance.n)]
    objective: list[tuple[int, str]] = [
        (v, x[i]) for i, v in enumerate(instance.values) if v != 0
    ]
    constraints: list[Constraint] = [
        Constraint(
            name="budget",
            terms=tuple((c, x[i]) for i, c in enumerate(instance.costs)),
            rhs=instance.budget,
        )
    ]
    ys: list[str] = []
    for (i, j), s in sorted(instance.synergies.items()):
        if s == 0:
            continue
        y = f"y{i}_{j}"
        ys.append(y)
        objective.append((s, y))
        if s > 0:
            constraints.append(
                Constraint(name=f"lift_{i}_{j}_a", terms=((1, y), (-1, x[i])), rhs=0)
            )
            constraints.append(
                Constraint(name=f"lift_{i}_{j}_b", terms=((1, y), (-1, x[j])), rhs=0)
            )
        else:
            # y >= x_i + x_j - 1  and  y >= 0, both as <=
            constraints.append(
                Constraint(
                    name=f"meet_{i}_{j}",
                    terms=((1, x[i]), (1, x[j]), (-1, y)),
                    rhs=1,
                )
            )
            constraints.append(
                Constraint(name=f"nonneg_{i}_{j}", terms=((-1, y),), rhs=0)
            )
    return LinearModel(
        objective=tuple(objective),
        constraints=tuple(constraints),
        binaries=tuple(x),
        unit_bounded=tuple(ys),
    )


def _format_terms(terms: Iterable[tuple[int, str]]) -> str:
    parts = []
    for coef, var in terms:
        if not parts:
            parts.append(f"{coef} {var}" if coef >= 0 else f"-{-coef} {var}")
        elif coef >= 0:
            parts.append(f"+ {coef} {var}")
        else:
            parts.append(f"- {-coef} {var}")
    return " ".join(parts) if parts else "0"


def format_model(model: LinearModel) -> str:
    """Readable text export, one <=-constraint per line."""
    lines = [f"maximize: {_format_terms(model.objective)}", "subject to:"]
    for c in model.constraints:
        lines.append(f"{c.name}: {_format_terms(c.terms)} <= {c.rhs}")
    if model.binaries:
        lines.append("binary: " + " ".join(model.binaries))
    for y in model.unit_bounded:
        lines.append(f"bounds: 0 <= {y} <= 1")
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------------
# Exact solvers
# ----------------------------------------------------------------------

BRUTE_FORCE_LIMIT = 20


def brute_force_basket(instance: BasketInstance) -> BasketSolution:
    """Enumerate all 2^n subsets (n <= 20); ties to the lexicographically
    smallest selected set."""
    n = instance.n
    if n > BRUTE_FORCE_LIMIT:
        raise ArgumentError(f"brute force refused for n={n} > {BRUTE_FORCE_LIMIT}")
    best_sel: tuple[int, ...] = ()
    best_obj, best_spend = 0, 0
    for mask in range(1, 1 << n):
        sel = tuple(i for i in range(n) if mask >> i & 1)
        obj, spend = instance.evaluate(sel)
        if spend > instance.budget:
            continue
        if obj > best_obj or (obj == best_obj and sel < best_sel):
            best_sel, best_obj, best_spend = sel, obj, spend
    return BasketSolution(
        selected=best_sel,
        objective_cents=best_obj,
        spend_cents=best_spend,
        proof=OPTIMAL,
    )


class _Timeout(Exception):
    pass


def optimize_basket(
    instance: BasketInstance, time_limit: Optional[float] = None
) -> BasketSolution:
    """Exact branch-and-bound over inclusion decisions.

    Branching order is fixed (descending value/cost density, ties by
    index) and subtrees prune against the incumbent using the remaining
    budget-relaxed knapsack value plus all still-attainable positive
    synergies, so results are deterministic. Within ``time_limit``
    seconds (wall clock) the search either completes with an OPTIMAL
    proof or returns the best incumbent with the best proven upper bound.
    """
    n = instance.n
    if n == 0:
        return BasketSolution(selected=(), objective_cents=0, spend_cents=0, proof=OPTIMAL)

    values, costs, budget = instance.values, instance.costs, instance.budget
    order = sorted(range(n), key=lambda i: (-(values[i] / costs[i]), i))
    depth_of = {item: d for d, item in enumerate(order)}

    pos_adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    neg_syn: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    total_pos = 0
    for (i, j), s in instance.synergies.items():
        if s > 0:
            pos_adj[i].append((j, s))
            pos_adj[j].append((i, s))
            total_pos += s
        elif s < 0:
            neg_syn[i].append((j, s))
            neg_syn[j].append((i, s))

    deadline = None if time_limit is None else time.monotonic() + time_limit

    in_set = [False] * n
    excluded = [False] * n
    best_obj, best_sel = 0, ()
    root_bound_holder = [None]

    def relax_bound(depth: int, spend: int, obj: int, pos_active: int) -> int:
        """Upper bound: fractional knapsack on undecided non-negative values
        plus every positive synergy not yet cut off."""
        bound = obj + pos_active
        room = budget - spend
        for d in range(depth, n):
            item = order[d]
            v, c = values[item], costs[item]
            if v <= 0:
                continue
            if c <= room:
                room -= c
                bound += v
            else:
                bound += -((-room * v) // c)  # ceil(room*v/c), integer-safe
                break
        return bound

    def dfs(depth: int, spend: int, obj: int, pos_active: int) -> None:
        nonlocal best_obj, best_sel
        if deadline is not None and time.monotonic() > deadline:
            raise _Timeout
        if obj > best_obj:
            best_obj = obj
            best_sel = tuple(sorted(i for i in range(n) if in_set[i]))
        if depth == n:
            return
        bound = relax_bound(depth, spend, obj, pos_active)
        if root_bound_holder[0] is None:
            root_bound_holder[0] = bound
        if bound <= best_obj:
            return
        item = order[depth]

        if spend + costs[item] <= budget:
            gain = values[item]
            for other, s in pos_adj[item]:
                if in_set[other]:
                    gain += s
            for other, s in neg_syn[item]:
                if in_set[other]:
                    gain += s
            realized_pos = sum(
                s for other, s in pos_adj[item] if in_set[other]
            )
            in_set[item] = True
            dfs(depth + 1, spend + costs[item], obj + gain, pos_active - realized_pos)
            in_set[item] = False

        lost_pos = sum(s for other, s in pos_adj[item] if not excluded[other])
        excluded[item] = True
        dfs(depth + 1, spend, obj, pos_active - lost_pos)
        excluded[item] = False

    try:
        if time_limit is not None and time_limit <= 0:
            root_bound_holder[0] = relax_bound(0, 0, 0, total_pos)
            raise _Timeout
        dfs(0, 0, 0, total_pos)
    except _Timeout:
        _, spend = instance.evaluate(best_sel)
        return BasketSolution(
            selected=best_sel,
            objective_cents=best_obj,
            spend_cents=spend,
            proof=BOUND_GAP,
            bound_cents=root_bound_holder[0],
        )
    _, spend = instance.evaluate(best_sel)
    return BasketSolution(
        selected=best_sel,
        objective_cents=best_obj,
        spend_cents=spend,
        proof=OPTIMAL,
    )


# ----------------------------------------------------------------------
# Instance file format
# ----------------------------------------------------------------------


def parse_instance(text: str) -> BasketInstance:
    """Parse the instance file format.

    Header ``n,budget_cents``; then n asset lines ``i,value_cents,cost_cents``
    (0-based, each index exactly once); then any number of pair lines
    ``i,j,synergy_cents``.
    """
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ArgumentError("empty instance file")
    try:
        n_s, budget_s = lines[0].split(",")
        n, budget = int(n_s), int(budget_s)
    except ValueError:
        raise ArgumentError(f"bad header {lines[0]!r}; expected 'n,budget_cents'") from None
    if n < 0 or len(lines) < 1 + n:
        raise ArgumentError(f"expected {n} asset lines after the header")
    values = [0] * n
    costs = [0] * n
    seen = set()
    for ln in lines[1 : 1 + n]:
        try:
            i_s, v_s, c_s = ln.split(",")
            i, v, c = int(i_s), int(v_s), int(c_s)
        except ValueError:
            raise ArgumentError(f"bad asset line {ln!r}") from None
        if not 0 <= i < n or i in seen:
            raise ArgumentError(f"asset index {i} out of range or repeated")
        seen.add(i)
        values[i], costs[i] = v, c
    synergies = {}
    for ln in lines[1 + n :]:
        try:
            i_s, j_s, s_s = ln.split(",")
            i, j, s = int(i_s), int(j_s), int(s_s)
        except ValueError:
            raise ArgumentError(f"bad pair line {ln!r}") from None
        synergies[(i, j)] = s
    return BasketInstance(
        values=tuple(values), costs=tuple(costs), synergies=synergies, budget=budget
    )


def format_instance(instance: BasketInstance) -> str:
    lines = [f"{instance.n},{instance.budget}"]
    for i in range(instance.n):
        lines.append(f"{i},{instance.values[i]},{instance.costs[i]}")
    for (i, j), s in sorted(instance.synergies.items()):
        lines.append(f"{i},{j},{s}")
    return "\n".join(lines) + "\n"
