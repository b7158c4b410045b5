"""Extractive slate construction.

The central solver minimizes the size J of the largest blocking coalition
over all k-subsets of the proposed questions. Coalition sizes are counted on
a grid of utility levels: at level s, a voter v is satisfied once some chosen
question gives it utility >= s, and an unchosen question q blocks with count
|{v : u(v, q) >= s and v unsatisfied at s}|. With the exact grid (all
distinct utility values) the optimum equals the minimum audited coalition
size; coarser grids may understate it, so the reported JR value is always
re-audited on the exact utilities.

Backends: a built-in branch-and-bound (deterministic, lexicographic
tie-breaking), the HiGHS MILP solver via scipy (binary x, relaxed y in
[0, 1], integral J), and an LP-format text export for external solvers.
"""

from __future__ import annotations

import itertools
import math
import random
import time
from dataclasses import dataclass

import numpy as np

from .audit import audit_fast
from .model import Session, Slate, UtilityMatrix, slate_from_indices

EXACT_GRID_CELL_LIMIT = 250_000
EXACT_GRID_LEVEL_LIMIT = 4_000
DEFAULT_STEP = 0.01
ENUMERATION_CAP = 1_000_000


class EnumerationCapExceeded(ValueError):
    pass


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class ThresholdGrid:
    levels: tuple[float, ...]
    mode: str  # "exact" or "step:<h>"

    def __post_init__(self) -> None:
        if not self.levels:
            raise ValueError("empty threshold grid")


def threshold_grid(
    matrix: UtilityMatrix, mode: str = "exact", step: float = DEFAULT_STEP
) -> ThresholdGrid:
    """Utility levels for the optimizer: every distinct value (``exact``) or
    multiples of ``step`` spanning [0, max utility] (``step``)."""
    if mode == "exact":
        levels = tuple(float(x) for x in np.unique(matrix.values))
        return ThresholdGrid(levels=levels, mode="exact")
    if mode == "step":
        if step <= 0:
            raise ValueError("step must be positive")
        top = float(matrix.values.max(initial=0.0))
        count = max(0, math.ceil(round(top / step, 9)))
        levels = tuple(round(i * step, 10) for i in range(count + 1))
        return ThresholdGrid(levels=levels, mode=f"step:{step:g}")
    raise ValueError(f"unknown grid mode {mode!r}")


def parse_grid_spec(spec: str) -> tuple[str, float]:
    """Parse a CLI-style grid spec: ``exact`` or ``step:0.01``."""
    if spec == "exact":
        return "exact", DEFAULT_STEP
    if spec.startswith("step:"):
        return "step", float(spec.split(":", 1)[1])
    raise ValueError(f"unknown grid spec {spec!r}")


def default_grid(matrix: UtilityMatrix) -> ThresholdGrid:
    """Exact levels when affordable, otherwise the production 0.01 step.

    Besides the cell-count limit, continuous utilities can make the exact
    grid as large as n*m distinct levels, which blows up the program; a
    level-count cap guards that case.
    """
    if matrix.n * matrix.m <= EXACT_GRID_CELL_LIMIT:
        grid = threshold_grid(matrix, "exact")
        if len(grid.levels) <= EXACT_GRID_LEVEL_LIMIT:
            return grid
    return threshold_grid(matrix, "step", DEFAULT_STEP)


def select_random(session: Session, seed: int, matrix: UtilityMatrix) -> Slate:
    """Uniformly random k-subset of the proposed questions, reproducible
    from the seed."""
    if session.k > matrix.m:
        raise ValueError("k exceeds question count")
    rng = random.Random(seed)
    indices = sorted(rng.sample(range(matrix.m), session.k))
    return slate_from_indices(matrix, indices, provenance="random")


def enumerate_exhaustive(
    matrix: UtilityMatrix, k: int, cap: int = ENUMERATION_CAP
) -> tuple[Slate, float]:
    """Ground-truth optimizer: audit every k-subset, return a minimizer.

    Ties break lexicographically by sorted member ids. Refuses instances
    with more than ``cap`` subsets; use optimize_ip for those.
    """
    if not 1 <= k <= matrix.m:
        raise ValueError(f"k={k} outside [1, {matrix.m}]")
    total = math.comb(matrix.m, k)
    if total > cap:
        raise EnumerationCapExceeded(
            f"C({matrix.m}, {k}) = {total} exceeds the enumeration cap {cap}; "
            "use optimize_ip instead"
        )
    best: tuple[int, tuple[str, ...], tuple[int, ...]] | None = None
    for combo in itertools.combinations(range(matrix.m), k):
        slate = slate_from_indices(matrix, combo)
        c = audit_fast(matrix, slate, k).max_coalition_size
        key = (c, tuple(sorted(matrix.question_ids[j] for j in combo)))
        if best is None or key < best[:2]:
            best = (*key, combo)
    assert best is not None
    slate = slate_from_indices(matrix, best[2], provenance="ip")
    return slate, audit_fast(matrix, slate, k).jr_value


@dataclass(frozen=True)
class IpInstance:
    """The blocking-set minimization program over a threshold grid.

    ``eligible[c, v, l]`` marks u(v, c) >= level l for the positive levels;
    x_c picks the committee (sum = k), relaxed y_{v,l} track satisfaction,
    and the integral objective J bounds every blocking count.
    """

    k: int
    levels: tuple[float, ...]  # positive levels actually constrained
    eligible: np.ndarray  # (m, n, L) bool
    question_ids: tuple[str, ...]

    @property
    def m(self) -> int:
        return self.eligible.shape[0]

    @property
    def n(self) -> int:
        return self.eligible.shape[1]


@dataclass(frozen=True)
class IpResult:
    slate: Slate
    objective_size: int  # J*: largest blocking set on the grid
    objective_jr_value: float  # J* * k / n
    jr_value: float  # re-audited on exact utilities
    solver: str
    grid_mode: str
    optimal: bool  # False when a timeout left an incumbent with a gap


def build_ip_instance(matrix: UtilityMatrix, k: int, grid: ThresholdGrid) -> IpInstance:
    if not 1 <= k <= matrix.m:
        raise ValueError(f"k={k} outside [1, {matrix.m}]")
    positive = tuple(l for l in grid.levels if l > 0.0)
    levels = np.asarray(positive, dtype=np.float64)
    # (m, n, L): candidate utility meets the level
    eligible = matrix.values.T[:, :, None] >= levels[None, None, :]
    return IpInstance(
        k=k,
        levels=positive,
        eligible=eligible,
        question_ids=matrix.question_ids,
    )


def _grid_objective(inst: IpInstance, coverage: np.ndarray) -> int:
    """Largest blocking count given a satisfaction mask (n, L)."""
    if not inst.levels:
        return 0
    counts = (inst.eligible & ~coverage[None, :, :]).sum(axis=1)
    return int(counts.max())


def grid_objective_for(inst: IpInstance, chosen: tuple[int, ...]) -> int:
    coverage = (
        inst.eligible[list(chosen)].any(axis=0)
        if chosen
        else np.zeros(inst.eligible.shape[1:], dtype=bool)
    )
    return _grid_objective(inst, coverage)


class _Timeout(Exception):
    pass


def _solve_builtin(
    inst: IpInstance, timeout: float | None
) -> tuple[tuple[int, ...], int, bool]:
    """Depth-first branch-and-bound over the candidates in id order.

    Node bound: the objective with every still-available candidate pretended
    chosen (the greedy completion of the relaxed satisfaction variables),
    which never exceeds any true completion. Include-branches are explored
    first, so with strict incumbent updates the returned optimum is the
    lexicographically smallest one.
    """
    m, k = inst.m, inst.k
    order = sorted(range(m), key=lambda j: inst.question_ids[j])
    elig = inst.eligible[order]
    empty = np.zeros(elig.shape[1:], dtype=bool)
    # suffix[i]: coverage achievable by candidates order[i:]
    suffix = [empty]
    for i in range(m - 1, -1, -1):
        suffix.append(suffix[-1] | elig[i])
    suffix.reverse()
    deadline = time.monotonic() + timeout if timeout is not None else None
    best_value: int | None = None
    best_chosen: tuple[int, ...] = ()

    def visit(chosen: tuple[int, ...], coverage: np.ndarray, idx: int) -> None:
        nonlocal best_value, best_chosen
        if len(chosen) == k:
            value = _grid_objective(inst, coverage)
            if best_value is None or value < best_value:
                best_value = value
                best_chosen = chosen
            return
        if deadline is not None and best_value is not None and time.monotonic() > deadline:
            raise _Timeout
        if m - idx < k - len(chosen):
            return
        bound = _grid_objective(inst, coverage | suffix[idx])
        if best_value is not None and bound >= best_value:
            return
        visit(chosen + (idx,), coverage | elig[idx], idx + 1)
        visit(chosen, coverage, idx + 1)

    optimal = True
    try:
        visit((), empty, 0)
    except _Timeout:
        optimal = False
    assert best_value is not None
    return tuple(order[i] for i in best_chosen), best_value, optimal


def _solve_scipy(
    inst: IpInstance, timeout: float | None
) -> tuple[tuple[int, ...], int, bool]:
    from scipy.optimize import Bounds, LinearConstraint, milp
    from scipy.sparse import coo_matrix

    m, n, L = inst.eligible.shape
    num_y = n * L
    num_vars = m + num_y + 1
    j_col = num_vars - 1

    def y_col(v: int, l: int) -> int:
        return m + v * L + l

    rows: list[int] = []
    cols: list[int] = []
    data: list[float] = []
    ubs: list[float] = []
    r = 0
    # y_{v,l} <= sum of x_c over eligible c
    for v in range(n):
        for l in range(L):
            rows.append(r)
            cols.append(y_col(v, l))
            data.append(1.0)
            for c in np.flatnonzero(inst.eligible[:, v, l]):
                rows.append(r)
                cols.append(int(c))
                data.append(-1.0)
            ubs.append(0.0)
            r += 1
    # blocking count for (c', l): sum over eligible v of (1 - y) <= J
    for c in range(m):
        for l in range(L):
            voters = np.flatnonzero(inst.eligible[c, :, l])
            if voters.size == 0:
                continue
            for v in voters:
                rows.append(r)
                cols.append(y_col(int(v), l))
                data.append(-1.0)
            rows.append(r)
            cols.append(j_col)
            data.append(-1.0)
            ubs.append(-float(voters.size))
            r += 1
    constraints = []
    if r:
        a_ub = coo_matrix((data, (rows, cols)), shape=(r, num_vars))
        constraints.append(LinearConstraint(a_ub, -np.inf, np.asarray(ubs)))
    a_eq = coo_matrix(
        (np.ones(m), (np.zeros(m, dtype=int), np.arange(m))), shape=(1, num_vars)
    )
    constraints.append(LinearConstraint(a_eq, inst.k, inst.k))
    objective = np.zeros(num_vars)
    objective[j_col] = 1.0
    integrality = np.zeros(num_vars)
    integrality[:m] = 1
    integrality[j_col] = 1
    lb = np.zeros(num_vars)
    ub = np.ones(num_vars)
    ub[j_col] = n
    options = {"time_limit": timeout} if timeout is not None else None
    res = milp(
        c=objective,
        constraints=constraints,
        integrality=integrality,
        bounds=Bounds(lb, ub),
        options=options,
    )
    if res.x is None:
        raise SolverError(f"milp failed: status={res.status} ({res.message})")
    x = res.x[:m]
    chosen = tuple(int(j) for j in np.argsort(-x)[: inst.k])
    if sum(x[j] > 0.5 for j in range(m)) != inst.k:
        raise SolverError("milp returned a non-integral committee")
    value = grid_objective_for(inst, chosen)  # recount: never trust float J
    return tuple(sorted(chosen)), value, res.status == 0


def write_lp(inst: IpInstance, path) -> None:
    """Emit the program in CPLEX LP text format for external solvers."""
    m, n, L = inst.eligible.shape
    lines = ["Minimize", " obj: J", "Subject To"]
    committee = " + ".join(f"x_{c}" for c in range(m))
    lines.append(f" committee: {committee} = {inst.k}")
    for v in range(n):
        for l in range(L):
            elig = np.flatnonzero(inst.eligible[:, v, l])
            terms = "".join(f" - x_{int(c)}" for c in elig)
            lines.append(f" cover_v{v}_s{l}: y_{v}_{l}{terms} <= 0")
    for c in range(m):
        for l in range(L):
            voters = np.flatnonzero(inst.eligible[c, :, l])
            if voters.size == 0:
                continue
            terms = " ".join(f"- y_{int(v)}_{l}" for v in voters)
            lines.append(f" block_c{c}_s{l}: {terms} - J <= -{int(voters.size)}")
    lines.append("Bounds")
    for v in range(n):
        for l in range(L):
            lines.append(f" 0 <= y_{v}_{l} <= 1")
    lines.append(f" 0 <= J <= {n}")
    lines.append("Binaries")
    lines.append(" " + " ".join(f"x_{c}" for c in range(m)))
    lines.append("Generals")
    lines.append(" J")
    lines.append("End")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def optimize_ip(
    matrix: UtilityMatrix,
    k: int,
    grid: ThresholdGrid | None = None,
    solver: str = "auto",
    timeout: float | None = None,
    export_path=None,
) -> IpResult:
    """Minimize the largest blocking set over k-subsets of the questions.

    The reported ``jr_value`` is always re-audited on the exact utilities;
    ``objective_jr_value`` is what the grid-based program saw. Both appear in
    reports because a coarse grid can understate the audited value.
    """
    if grid is None:
        grid = default_grid(matrix)
    inst = build_ip_instance(matrix, k, grid)
    if export_path is not None:
        write_lp(inst, export_path)
    if solver == "auto":
        solver = "scipy"
    if solver == "builtin":
        chosen, value, optimal = _solve_builtin(inst, timeout)
    elif solver == "scipy":
        chosen, value, optimal = _solve_scipy(inst, timeout)
    else:
        raise ValueError(f"unknown solver {solver!r}")
    slate = slate_from_indices(matrix, sorted(chosen), provenance="ip")
    audited = audit_fast(matrix, slate, k)
    return IpResult(
        slate=slate,
        objective_size=value,
        objective_jr_value=(value * k) / matrix.n,
        jr_value=audited.jr_value,
        solver=solver,
        grid_mode=grid.mode,
        optimal=optimal,
    )
