"""Exact-rational fair-allocation algorithms.

Single-resource max-min filling, dominant-share allocation for multiple
resource types, and the precomputed variant that replaces the task-by-task
allocation loop with a closed-form cycle count.  Everything here computes
with exact rationals so results are bit-reproducible and usable as ground
truth for the fixed-point machine.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .vectors import DemandSet, Rational, ResourceVector, WeightVector


@dataclass(frozen=True)
class AllocationResult:
    """Outcome of a whole-set allocation: unit-task counts per user."""

    task_counts: tuple[int, ...]
    allocations: tuple[ResourceVector, ...]
    remaining: ResourceVector
    # Precomputed cycle count when the allocator uses one, else 0.
    cycles: Fraction


@dataclass(frozen=True)
class DiffStats:
    """Per-user task-count deltas between the loop allocator and the
    precomputed allocator (loop minus precomputed)."""

    deltas: tuple[int, ...]
    exact: int
    under_by_one: int
    under_by_more: int
    over: int

    @property
    def total(self) -> int:
        return len(self.deltas)


def _as_fraction(value: Rational, what: str) -> Fraction:
    f = Fraction(value)
    if f < 0:
        raise ValueError(f"{what} must be non-negative, got {value}")
    return f


def progressive_filling(
    demands: Sequence[Rational], reserve: Rational
) -> list[Fraction]:
    """Max-min fair split of a single divisible resource.

    Each round reserves an equal share of what is left for every
    unsatisfied user; users whose maximum demand fits their share are
    paid in full and removed, and the residue is re-split.  When a round
    satisfies nobody, everyone takes exactly their share and the reserve
    is exhausted.
    """
    total = _as_fraction(reserve, "reserve")
    wants = [_as_fraction(d, "demand") for d in demands]
    allocs: list[Fraction] = [Fraction(0)] * len(wants)
    active = [i for i, d in enumerate(wants) if d > 0]
    while active and total > 0:
        share = total / len(active)
        satisfied = [i for i in active if wants[i] <= share]
        if not satisfied:
            for i in active:
                allocs[i] = share
            return allocs
        for i in satisfied:
            allocs[i] = wants[i]
            total -= wants[i]
        active = [i for i in active if i not in satisfied]
    return allocs


def weighted_progressive_filling(
    demands: Sequence[Rational],
    weights: WeightVector,
    reserve: Rational,
) -> list[Fraction]:
    """Progressive filling with per-user shares proportional to weights.

    Equal weights reduce to plain progressive_filling exactly.
    """
    if len(weights) != len(demands):
        raise ValueError(
            f"need one weight per user: {len(weights)} weights, {len(demands)} users"
        )
    total = _as_fraction(reserve, "reserve")
    wants = [_as_fraction(d, "demand") for d in demands]
    allocs: list[Fraction] = [Fraction(0)] * len(wants)
    active = [i for i, d in enumerate(wants) if d > 0]
    while active and total > 0:
        weight_sum = sum(weights[i] for i in active)
        shares = {i: total * weights[i] / weight_sum for i in active}
        satisfied = [i for i in active if wants[i] <= shares[i]]
        if not satisfied:
            for i in active:
                allocs[i] = min(wants[i], shares[i])
            return allocs
        for i in satisfied:
            allocs[i] = wants[i]
            total -= wants[i]
        active = [i for i in active if i not in satisfied]
    return allocs


def dominant_share(
    demand: ResourceVector, reserves: ResourceVector
) -> tuple[Fraction, int]:
    """Highest demand-to-reserve ratio and the resource index attaining it.

    Ties break toward the lowest resource index.
    """
    if len(demand) != len(reserves):
        raise ValueError("demand and reserves must have the same resource count")
    if demand.is_zero():
        raise ValueError("demand must have a positive component")
    best: Fraction | None = None
    best_index = -1
    for r, (d, res) in enumerate(zip(demand, reserves)):
        if res == 0:
            raise ValueError(f"reserve for resource {r} is zero")
        ratio = Fraction(d, res)
        if best is None or ratio > best:
            best = ratio
            best_index = r
    assert best is not None
    return best, best_index


def weighted_dominant_share(
    demand: ResourceVector,
    weights: WeightVector,
    reserves: ResourceVector,
) -> tuple[Fraction, int]:
    """Dominant share with each reserve scaled by its weight.

    Unit weights reduce to dominant_share exactly.
    """
    if len(weights) != len(reserves):
        raise ValueError("need one weight per resource")
    if len(demand) != len(reserves):
        raise ValueError("demand and reserves must have the same resource count")
    if demand.is_zero():
        raise ValueError("demand must have a positive component")
    best: Fraction | None = None
    best_index = -1
    for r, (d, res) in enumerate(zip(demand, reserves)):
        if res == 0:
            raise ValueError(f"reserve for resource {r} is zero")
        ratio = Fraction(d) / (weights[r] * res)
        if best is None or ratio > best:
            best = ratio
            best_index = r
    assert best is not None
    return best, best_index


def _check_reserves_positive(reserves: ResourceVector) -> None:
    for r, v in enumerate(reserves):
        if v == 0:
            raise ValueError(f"reserve for resource {r} is zero")


def _drf_loop(
    demands: Sequence[ResourceVector],
    shares: Sequence[Fraction],
    reserves: ResourceVector,
) -> tuple[list[int], list[int]]:
    """Task-by-task allocation loop equalizing allocated dominant shares.

    Repeatedly selects the user with the minimum allocated share (ties:
    lowest position) and grants one task; stops the first time the
    selected user's demand no longer fits the remaining reserves.
    """
    n = len(demands)
    m = len(reserves)
    # Compare t_a*s_a < t_b*s_b by integer cross-multiplication.
    nums = [s.numerator for s in shares]
    dens = [s.denominator for s in shares]
    tasks = [0] * n
    remaining = list(reserves)
    while True:
        pick = 0
        for i in range(1, n):
            if tasks[i] * nums[i] * dens[pick] < tasks[pick] * nums[pick] * dens[i]:
                pick = i
        d = demands[pick]
        if any(d[r] > remaining[r] for r in range(m)):
            break
        for r in range(m):
            remaining[r] -= d[r]
        tasks[pick] += 1
    return tasks, remaining


def _result(
    demands: Sequence[ResourceVector],
    tasks: Sequence[int],
    reserves: ResourceVector,
    cycles: Fraction,
) -> AllocationResult:
    allocations = tuple(d.scale(t) for d, t in zip(demands, tasks))
    remaining = reserves
    for a in allocations:
        remaining = remaining - a
    return AllocationResult(tuple(tasks), allocations, remaining, cycles)


def drf_allocate(demands: DemandSet, reserves: ResourceVector) -> AllocationResult:
    """Dominant-resource-fair allocation by the task-by-task loop.

    This is the reference ground truth the precomputed allocator is
    measured against.
    """
    if not len(demands):
        return AllocationResult((), (), reserves, Fraction(0))
    _check_reserves_positive(reserves)
    vectors = demands.demands
    shares = [dominant_share(d, reserves)[0] for d in vectors]
    tasks, _ = _drf_loop(vectors, shares, reserves)
    return _result(vectors, tasks, reserves, Fraction(0))


def _pdrf_counts(
    demands: Sequence[ResourceVector],
    shares: Sequence[Fraction],
    reserves: ResourceVector,
) -> tuple[list[int], Fraction]:
    """Closed-form cycle count and floored per-user task counts.

    One cycle drains, per resource, the demand of every user scaled by
    the ratio of the largest dominant share to her own; the cycle count
    is the tightest reserve-to-drain ratio.
    """
    share_star = max(shares)
    ratios = [share_star / s for s in shares]
    cycles: Fraction | None = None
    for r, reserve in enumerate(reserves):
        drain = sum(ratios[i] * demands[i][r] for i in range(len(demands)))
        if drain == 0:
            continue
        bound = Fraction(reserve) / drain
        if cycles is None or bound < cycles:
            cycles = bound
    assert cycles is not None  # every demand has a positive component
    tasks = [int(cycles * ratio) for ratio in ratios]
    return tasks, cycles


def pdrf_allocate(demands: DemandSet, reserves: ResourceVector) -> AllocationResult:
    """Precomputed dominant-resource-fair allocation.

    Computes how many whole task cycles fit before some resource depletes
    and hands every user her floored cycle multiple in one step, with no
    per-task loop.
    """
    if not len(demands):
        return AllocationResult((), (), reserves, Fraction(0))
    _check_reserves_positive(reserves)
    vectors = demands.demands
    shares = [dominant_share(d, reserves)[0] for d in vectors]
    tasks, cycles = _pdrf_counts(vectors, shares, reserves)
    return _result(vectors, tasks, reserves, cycles)


def weighted_pdrf_allocate(
    demands: DemandSet,
    weights: Sequence[WeightVector],
    reserves: ResourceVector,
) -> AllocationResult:
    """Precomputed allocation with per-user per-resource weights.

    Unit weights reproduce pdrf_allocate exactly.
    """
    if len(weights) != len(demands):
        raise ValueError(
            f"need one weight vector per user: {len(weights)} for {len(demands)} users"
        )
    if not len(demands):
        return AllocationResult((), (), reserves, Fraction(0))
    _check_reserves_positive(reserves)
    vectors = demands.demands
    shares = [
        weighted_dominant_share(d, w, reserves)[0]
        for d, w in zip(vectors, weights)
    ]
    tasks, cycles = _pdrf_counts(vectors, shares, reserves)
    return _result(vectors, tasks, reserves, cycles)


def compare_pdrf_drf(demands: DemandSet, reserves: ResourceVector) -> DiffStats:
    """Run both allocators and tabulate per-user task-count deltas."""
    loop = drf_allocate(demands, reserves)
    pre = pdrf_allocate(demands, reserves)
    deltas = tuple(
        a - b for a, b in zip(loop.task_counts, pre.task_counts)
    )
    return DiffStats(
        deltas=deltas,
        exact=sum(1 for d in deltas if d == 0),
        under_by_one=sum(1 for d in deltas if d == 1),
        under_by_more=sum(1 for d in deltas if d > 1),
        over=sum(1 for d in deltas if d < 0),
    )
