from collections.abc import Sequence

from ortools.sat.python import cp_model

from mathutil.linalg import nullspace
from mathutil.rationals import primitive_integer_vector


def find_integer_relation(
    coords: Sequence[Sequence[int]], rank: int
) -> tuple[int, ...] | None:
    """Find a primitive integer vector alpha with alpha . k = 0 for every k in coords.

    Among all such vectors the one with the smallest max-norm is returned, ties broken
    by lexicographic order, with the first nonzero entry positive. Returns None when
    the coordinates have full rank.
    """
    rows = sorted(set(tuple(int(k) for k in row) for row in coords))
    basis = nullspace(rows, rank)
    if not basis:
        return None

    # A one-dimensional kernel has a unique primitive vector up to sign
    if len(basis) == 1:
        return primitive_integer_vector(basis[0])

    # Any primitive kernel vector bounds the optimal max-norm
    bound = min(max(abs(a) for a in primitive_integer_vector(v)) for v in basis)
    return solve(rows, rank, bound)


def solve(rows: list[tuple[int, ...]], rank: int, bound: int) -> tuple[int, ...]:
    """Solve the relation search with CP-SAT: minimize the max-norm, then lex order."""
    model = cp_model.CpModel()
    variables = create_variables(model, rank, bound)
    create_constraints(model, variables, rows, rank)

    # Minimize the max-norm first
    model.Minimize(variables["norm"])
    norm = get_value(model, variables["norm"])
    model.Add(variables["norm"] == norm)

    # Then fix entries one at a time to their smallest feasible value
    relation = []
    for i in range(rank):
        model.ClearObjective()
        model.Minimize(variables["alpha"][i])
        value = get_value(model, variables["alpha"][i])
        model.Add(variables["alpha"][i] == value)
        relation.append(value)

    return tuple(relation)


def create_variables(model: cp_model.CpModel, rank: int, bound: int) -> dict:
    """Create the decision variables for the relation search."""
    variables = dict()
    variables["alpha"] = [
        model.NewIntVar(-bound, bound, f"alpha_{i}") for i in range(rank)
    ]
    variables["abs"] = [model.NewIntVar(0, bound, f"abs_{i}") for i in range(rank)]
    variables["lead"] = [model.NewBoolVar(f"lead_{i}") for i in range(rank)]
    variables["norm"] = model.NewIntVar(1, bound, "norm")
    return variables


def create_constraints(
    model: cp_model.CpModel,
    variables: dict,
    rows: list[tuple[int, ...]],
    rank: int,
):
    """Create the constraints for the relation search."""
    alpha = variables["alpha"]
    lead = variables["lead"]

    # Every coordinate tuple is annihilated
    for row in rows:
        model.Add(sum(k * a for k, a in zip(row, alpha, strict=True)) == 0)

    # Exactly one leading entry: it is positive and everything before it is zero
    model.AddExactlyOne(lead)
    for i in range(rank):
        model.Add(alpha[i] >= 1).OnlyEnforceIf(lead[i])
        for j in range(i):
            model.Add(alpha[j] == 0).OnlyEnforceIf(lead[i])

    # The norm is the largest absolute entry
    for i in range(rank):
        model.AddAbsEquality(variables["abs"][i], alpha[i])
    model.AddMaxEquality(variables["norm"], variables["abs"])


def get_value(model: cp_model.CpModel, variable: cp_model.IntVar) -> int:
    """Solve the current model and read the optimal value of `variable`."""
    solver = cp_model.CpSolver()
    solver.parameters.num_workers = 1
    status = solver.Solve(model)
    if status != cp_model.OPTIMAL:
        raise RuntimeError(f"Solver failed with status {solver.StatusName(status)}.")
    return int(solver.Value(variable))
