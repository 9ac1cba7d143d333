import logging
from typing import List, Sequence, Tuple

from cng.errors import ErrorCode, InstanceError
from cng.models import FEASIBILITY_TOL, KnapsackProblem, KnapsackSolution

logger = logging.getLogger(__name__)

BOUND_TOL = 1e-9


class KnapsackBranchAndBound:
    """Depth-first branch-and-bound for the 0/1 knapsack with real data.

    Items are visited by decreasing value/weight ratio (lowest index first on
    ties); the include branch is explored before the exclude branch and the
    Dantzig fractional relaxation bounds every node. Items with nonpositive
    value, or heavier than the capacity, never enter the search.
    """

    def __init__(self, values: Sequence[float], weights: Sequence[float], capacity: float):
        self._values = list(values)
        self._weights = list(weights)
        self._capacity = capacity
        self._order = sorted(
            (
                i
                for i in range(len(self._values))
                if self._values[i] > 0 and self._weights[i] <= capacity + FEASIBILITY_TOL
            ),
            key=lambda i: (-self._values[i] / self._weights[i], i),
        )
        self.nodes = 0

    def bound(self, level: int, weight: float, value: float) -> float:
        room = self._capacity - weight
        bound = value
        for k in self._order[level:]:
            if self._weights[k] <= room:
                room -= self._weights[k]
                bound += self._values[k]
            else:
                return bound + room * self._values[k] / self._weights[k]
        return bound

    def solve(self) -> Tuple[List[int], float]:
        best_value = 0.0
        best_items: Tuple[int, ...] = ()
        stack = [(0, 0.0, 0.0, ())]
        depth = len(self._order)

        while stack:
            level, weight, value, items = stack.pop()
            self.nodes += 1
            if value > best_value:
                best_value, best_items = value, items
            if level == depth or self.bound(level, weight, value) <= best_value + BOUND_TOL:
                continue
            k = self._order[level]
            stack.append((level + 1, weight, value, items))
            if weight + self._weights[k] <= self._capacity + FEASIBILITY_TOL:
                stack.append((level + 1, weight + self._weights[k], value + self._values[k], items + (k,)))

        selected = [0] * len(self._values)
        for k in best_items:
            selected[k] = 1
        return selected, best_value


def solve_knapsack(problem: KnapsackProblem) -> KnapsackSolution:
    """Maximize values . s over binary s with weights . s <= capacity.

    Args:
        problem: Values (any sign), strictly positive weights and a capacity

    Returns:
        The first optimal selection met in ratio-then-index order
    """
    if len(problem.values) != len(problem.weights):
        raise InstanceError(
            ErrorCode.SHAPE_MISMATCH,
            f"{len(problem.values)} values but {len(problem.weights)} weights",
        )
    if any(w <= 0 for w in problem.weights):
        raise InstanceError(ErrorCode.NONPOSITIVE_WEIGHT, "knapsack weights must be strictly positive")
    if problem.capacity < 0:
        raise InstanceError(ErrorCode.NEGATIVE_VALUE, f"capacity {problem.capacity} is negative")

    solver = KnapsackBranchAndBound(problem.values, problem.weights, problem.capacity)
    selected, objective = solver.solve()
    logger.debug(f"Knapsack over {len(problem.values)} items solved in {solver.nodes} nodes, objective {objective}")
    return KnapsackSolution(selected=tuple(selected), objective=objective)
