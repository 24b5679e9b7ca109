"""Exact enumeration of equilibria by minimum pain-per-buck patterns.

Every equilibrium induces a pattern: for each agent, the set of chores tied at
the minimum pain-per-buck ratio.  For each candidate pattern we solve one
exact LP -- maximizing a slack that keeps prices positive and the off-pattern
ratios strictly worse -- and read an equilibrium off any strictly feasible
solution.  Enumerating all patterns is therefore complete, and every returned
candidate is re-verified, so the output is exactly the set of equilibrium
price rays.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from typing import Iterator, List, Optional, Sequence, Tuple

from . import lp
from .errors import Malformed, PatternBudgetExceeded
from .model import (
    EXCHANGE,
    EquilibriumCandidate,
    Instance,
    agent_budget,
    chore_supply,
    normalize_prices,
)
from .verification import verify_equilibrium

#: Default cap on the number of candidate patterns.
PATTERN_CAP = 10**6


@dataclass(frozen=True)
class EnumeratedEquilibrium:
    """One equilibrium price ray with a witness allocation.

    ``ray`` is the normalized (sum-one) price vector identifying the ray;
    ``candidate`` keeps the prices at the LP's natural scale, which for
    fixed-earnings instances is the scale on which budgets are met.
    """

    ray: Tuple[Fraction, ...]
    pattern: Tuple[frozenset, ...]
    candidate: EquilibriumCandidate


@dataclass(frozen=True)
class EquilibriumSet:
    equilibria: Tuple[EnumeratedEquilibrium, ...]
    patterns_tried: int

    @property
    def rays(self) -> Tuple[Tuple[Fraction, ...], ...]:
        return tuple(e.ray for e in self.equilibria)


def _agent_options(inst: Instance) -> Optional[List[List[frozenset]]]:
    """Candidate MPB sets per agent, or ``None`` when no pattern can exist."""
    options = []
    for i in range(inst.n):
        finite = inst.finite_chores(i)
        if not inst.has_positive_wealth(i):
            options.append([frozenset()])
            continue
        if not finite:
            return None  # must earn, but cannot touch any chore
        subsets = []
        for size in range(1, len(finite) + 1):
            subsets.extend(frozenset(c) for c in combinations(finite, size))
        options.append(subsets)
    return options


def _pattern_count(options) -> int:
    count = 1
    for subsets in options:
        count *= len(subsets)
    return count


def _pattern_lp(inst: Instance, pattern, epsilon: Fraction) -> Optional[lp.LinearProgram]:
    """Build the strict-feasibility LP for one pattern.

    Variables: prices ``p_j``, flows ``f_ij`` for ``j`` in the agent's
    pattern set, and one slack ``s`` (maximized).  Feasible with positive
    optimum iff the pattern supports an equilibrium.
    """
    m, n = inst.m, inst.n
    flow_index = {}
    for i in range(n):
        for j in sorted(pattern[i]):
            flow_index[(i, j)] = m + len(flow_index)
    slack = m + len(flow_index)
    num = slack + 1
    zero = [Fraction(0)] * num
    cons = []

    def row():
        return list(zero)

    for i in range(n):
        members = sorted(pattern[i])
        finite = inst.finite_chores(i)
        if members:
            rep = members[0]
            d_rep = inst.disutility[i][rep]
            # Equal ratios inside the pattern: d(i,rep) p_j = d(i,j) p_rep.
            for j in members[1:]:
                r = row()
                r[j] = d_rep
                r[rep] -= inst.disutility[i][j]
                cons.append(lp.Constraint(tuple(r), lp.EQ, Fraction(0)))
            # Strictly worse ratios outside: d(i,rep) p_j' + s <= d(i,j') p_rep.
            for j in finite:
                if j in pattern[i]:
                    continue
                r = row()
                r[j] = d_rep
                r[rep] -= inst.disutility[i][j]
                r[slack] = Fraction(1)
                cons.append(lp.Constraint(tuple(r), lp.LE, Fraction(0)))
        # Budget: sum of flows equals the agent's budget.
        r = row()
        for j in members:
            r[flow_index[(i, j)]] = Fraction(1)
        if inst.variant == EXCHANGE:
            for j in range(m):
                r[j] -= inst.endowment[i][j]
            cons.append(lp.Constraint(tuple(r), lp.EQ, Fraction(0)))
        else:
            cons.append(lp.Constraint(tuple(r), lp.EQ, inst.earning[i]))

    for j in range(m):
        supply = chore_supply(inst, j)
        units = [(flow_index[(i, j)], 1) for i in range(n) if (i, j) in flow_index]
        if epsilon == 0:
            r = row()
            for k, _ in units:
                r[k] = Fraction(1)
            r[j] -= supply
            cons.append(lp.Constraint(tuple(r), lp.EQ, Fraction(0)))
        else:
            r = row()
            for k, _ in units:
                r[k] = Fraction(1)
            r[j] -= (1 - epsilon) * supply
            cons.append(lp.Constraint(tuple(r), lp.GE, Fraction(0)))
            r = row()
            for k, _ in units:
                r[k] = Fraction(1)
            r[j] -= supply / (1 - epsilon)
            cons.append(lp.Constraint(tuple(r), lp.LE, Fraction(0)))

    # Positive prices: p_j >= s for every chore.
    for j in range(m):
        r = row()
        r[j] = Fraction(1)
        r[slack] = Fraction(-1)
        cons.append(lp.Constraint(tuple(r), lp.GE, Fraction(0)))

    if inst.variant == EXCHANGE:
        # Fix the scale of the price ray; fixed-earnings budgets pin it already.
        r = row()
        for j in range(m):
            r[j] = Fraction(1)
        cons.append(lp.Constraint(tuple(r), lp.EQ, Fraction(1)))

    obj = list(zero)
    obj[slack] = Fraction(1)
    return lp.LinearProgram(num, tuple(cons), tuple(obj))


def _solve_pattern(inst, pattern, epsilon) -> Optional[EnumeratedEquilibrium]:
    program = _pattern_lp(inst, pattern, epsilon)
    result = lp.lp_solve(program)
    if result.status != lp.OPTIMAL or result.value <= 0:
        return None
    point = result.point
    prices = list(point[: inst.m])
    m = inst.m
    flow = [[Fraction(0)] * m for _ in range(inst.n)]
    k = m
    for i in range(inst.n):
        for j in sorted(pattern[i]):
            flow[i][j] = point[k]
            k += 1
    allocation = [
        [flow[i][j] / prices[j] for j in range(m)] for i in range(inst.n)
    ]
    cand = EquilibriumCandidate(prices, allocation, flow=tuple(map(tuple, flow)))
    if not verify_equilibrium(inst, cand, epsilon).ok:
        return None
    return EnumeratedEquilibrium(normalize_prices(prices), tuple(pattern), cand)


def _patterns(inst: Instance, cap: int) -> Iterator[Tuple[frozenset, ...]]:
    options = _agent_options(inst)
    if options is None:
        return
    if _pattern_count(options) > cap:
        raise PatternBudgetExceeded(
            f"{_pattern_count(options)} patterns exceed the cap of {cap}"
        )
    all_chores = frozenset(range(inst.m))
    for pattern in product(*options):
        covered = frozenset().union(*pattern) if pattern else frozenset()
        if covered != all_chores:
            continue  # some chore could not be cleared at positive price
        yield pattern


def enumerate_equilibria(
    inst: Instance,
    epsilon: Fraction = Fraction(0),
    cap: int = PATTERN_CAP,
) -> EquilibriumSet:
    """All equilibrium price rays (one witness allocation per ray).

    Raises :class:`PatternBudgetExceeded` when the pattern space is larger
    than ``cap``.
    """
    epsilon = Fraction(epsilon)
    if not 0 <= epsilon < 1:
        raise Malformed("epsilon must lie in [0, 1)")
    found = {}
    tried = 0
    for pattern in _patterns(inst, cap):
        tried += 1
        hit = _solve_pattern(inst, pattern, epsilon)
        if hit is not None and hit.ray not in found:
            found[hit.ray] = hit
    return EquilibriumSet(tuple(found.values()), tried)


def exists_equilibrium(
    inst: Instance,
    epsilon: Fraction = Fraction(0),
    cap: int = PATTERN_CAP,
) -> Optional[EnumeratedEquilibrium]:
    """First equilibrium found, or ``None``; stops at the first hit."""
    epsilon = Fraction(epsilon)
    if not 0 <= epsilon < 1:
        raise Malformed("epsilon must lie in [0, 1)")
    for pattern in _patterns(inst, cap):
        hit = _solve_pattern(inst, pattern, epsilon)
        if hit is not None:
            return hit
    return None
