"""Topology optimization: exhaustive oracles and greedy serving-point selection.

Objectives map an assignment to a scalar. ``total`` is the mean end-to-end
SINR over present UEs, and ``maxmin`` is the minimum. By default they are
evaluated on the mean-gain budget. Passing ``draws``/``seed`` instead averages
the objective over that many seeded fading realizations.

Ties always resolve to the lowest serving-point index. Enumerations run in
lexicographic order, and the first maximum wins.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import SearchCapExceeded
from .scenario import LinkBudget
from .sinr import ABSENT, Assignment, FadingDraw, batch_per_ue_sinr

DEFAULT_CAP = 10_000_000
CHUNK = 65_536

OBJECTIVES = ("total", "maxmin")


@dataclass(frozen=True, eq=False)
class Objective:
    """Scalar objective over assignments of one budget.

    The default kind, ``total``, is the mean SINR over present UEs; ``maxmin``
    is their minimum SINR. Evaluation uses the budget's mean gains unless
    ``draws > 0``, in which case the objective is averaged over ``draws``
    fading realizations generated from ``seed``.
    """

    budget: LinkBudget
    kind: str = "total"
    draws: int = 0
    seed: int = 0
    gains: FadingDraw = field(init=False, repr=False)

    def __post_init__(self):
        if self.kind not in OBJECTIVES:
            raise ValueError(f"objective kind must be one of {OBJECTIVES}")
        if self.draws:
            g = FadingDraw.sample(self.budget, np.random.default_rng(self.seed), (self.draws,))
        else:
            g = FadingDraw.mean_of(self.budget)
        object.__setattr__(self, "gains", g)

    def batch(self, serving: np.ndarray) -> np.ndarray:
        """Objective of each row of ``serving`` (shape ``(B, N)``)."""
        serving = np.atleast_2d(np.asarray(serving, dtype=np.int64))
        sinr = batch_per_ue_sinr(self.gains, serving, self.budget.n_enb, self.budget.ap_feeder)
        present = serving >= 0
        if self.kind == "total":
            vals = np.where(present, sinr, 0.0)
            total = np.zeros(sinr.shape[:-1])
            for k in range(sinr.shape[-1]):
                total = total + vals[..., k]
            per_draw = total / np.maximum(present.sum(axis=1), 1)
        else:
            per_draw = np.where(present, sinr, np.inf).min(axis=-1)
        if self.draws:
            acc = np.zeros(per_draw.shape[1:])
            for i in range(per_draw.shape[0]):
                acc = acc + per_draw[i]
            return acc / per_draw.shape[0]
        return per_draw

    def __call__(self, a: Assignment | tuple) -> float:
        serving = a.serving if isinstance(a, Assignment) else tuple(a)
        return float(self.batch(np.array([serving]))[0])


@dataclass(frozen=True, eq=False)
class OptResult:
    """Outcome of a search; the trace lists every evaluated assignment in order."""

    assignment: Assignment
    objective_value: float
    evaluations: int
    trace_assignments: np.ndarray
    trace_values: np.ndarray
    initial_value: float | None = None
    metadata: dict = field(default_factory=dict)

    @property
    def trace(self) -> list[tuple[tuple[int, ...], float]]:
        return [(tuple(int(v) for v in row), float(val)) for row, val in zip(self.trace_assignments, self.trace_values)]


class _Tracer:
    def __init__(self, n_ue: int):
        self.rows: list[np.ndarray] = []
        self.vals: list[np.ndarray] = []
        self.n_ue = n_ue

    def add(self, serving: np.ndarray, values: np.ndarray) -> None:
        self.rows.append(np.asarray(serving, dtype=np.int64).reshape(-1, self.n_ue))
        self.vals.append(np.asarray(values, dtype=float).reshape(-1))

    def result(self, best: tuple, value: float, n_enb: int, n_ap: int, **kw) -> OptResult:
        rows = np.concatenate(self.rows) if self.rows else np.zeros((0, self.n_ue), dtype=np.int64)
        vals = np.concatenate(self.vals) if self.vals else np.zeros(0)
        return OptResult(Assignment(best, n_enb, n_ap), float(value), len(vals), rows, vals, **kw)


def _as_objective(budget: LinkBudget, objective) -> Objective:
    if isinstance(objective, Objective):
        if objective.budget is not budget:
            raise ValueError("objective was built for a different budget")
        return objective
    return Objective(budget, objective)


def _enumerate(n_choices: int, n_pos: int):
    """All ``n_choices ** n_pos`` tuples in lexicographic order, in chunks."""
    it = itertools.product(range(n_choices), repeat=n_pos)
    while True:
        block = list(itertools.islice(it, CHUNK))
        if not block:
            return
        yield np.array(block, dtype=np.int64).reshape(len(block), n_pos)


def _search_block(obj, tracer, candidates, positions, template, best):
    """Evaluate every filling of ``positions`` with ``candidates`` over ``template``."""
    cand = np.asarray(candidates, dtype=np.int64)
    for block in _enumerate(len(cand), len(positions)):
        serving = np.repeat(np.asarray(template, dtype=np.int64)[None, :], len(block), axis=0)
        serving[:, positions] = cand[block]
        vals = obj.batch(serving)
        tracer.add(serving, vals)
        i = int(np.argmax(vals))
        if best is None or vals[i] > best[1]:
            best = (tuple(int(v) for v in serving[i]), float(vals[i]))
    return best


def exhaustive(
    budget: LinkBudget,
    objective="total",
    cap: int = DEFAULT_CAP,
    candidates=None,
) -> OptResult:
    """Global optimum over every assignment of UEs to ``candidates`` (default: all eNBs and APs)."""
    obj = _as_objective(budget, objective)
    E, M, N = budget.n_enb, budget.n_ap, budget.n_ue
    cand = list(range(E + M)) if candidates is None else list(candidates)
    required = len(cand) ** N
    if required > cap:
        raise SearchCapExceeded(required, cap)
    tracer = _Tracer(N)
    best = _search_block(obj, tracer, cand, list(range(N)), [ABSENT] * N, None)
    meta = {"multi_cell_factorial_count": math.factorial(N + M)} if E > 1 else {}
    return tracer.result(best[0], best[1], E, M, metadata=meta)


def exhaustive_single_cell(budget: LinkBudget, objective="total", cap: int = DEFAULT_CAP) -> OptResult:
    """Exhaustive search over ``(M+1)^N`` assignments of a one-eNB budget."""
    if budget.n_enb != 1:
        raise ValueError("single-cell search needs exactly one eNB")
    return exhaustive(budget, objective, cap)


def best_cellular(budget: LinkBudget, objective="total", cap: int = DEFAULT_CAP) -> OptResult:
    """Conventional baseline: the eNB-only assignment maximizing the objective."""
    return exhaustive(budget, objective, cap, candidates=range(budget.n_enb))


def _ue_order(N: int, shuffle_seed: int | None) -> list[int]:
    order = list(range(N))
    if shuffle_seed is not None:
        np.random.default_rng(shuffle_seed).shuffle(order)
    return order


def greedy_multi_cell(
    budget: LinkBudget, objective="total", shuffle_seed: int | None = None, init=None
) -> OptResult:
    """Start from the strongest-eNB topology; per UE, move to the best AP if it strictly improves.

    Exactly ``N * M`` candidate evaluations; the initial topology's value is
    reported separately as ``initial_value``. ``init`` overrides the starting
    assignment.
    """
    obj = _as_objective(budget, objective)
    E, M, N = budget.n_enb, budget.n_ap, budget.n_ue
    if init is None:
        current = np.array(budget.nearest_enb, dtype=np.int64)
    else:
        current = np.array(init.serving if isinstance(init, Assignment) else init, dtype=np.int64)
    value = obj(tuple(current))
    initial = value
    tracer = _Tracer(N)
    for k in _ue_order(N, shuffle_seed):
        if M == 0:
            break
        cands = np.repeat(current[None, :], M, axis=0)
        cands[:, k] = E + np.arange(M)
        vals = obj.batch(cands)
        tracer.add(cands, vals)
        i = int(np.argmax(vals))
        if vals[i] > value:
            current = cands[i].copy()
            value = float(vals[i])
    return tracer.result(tuple(int(v) for v in current), value, E, M, initial_value=initial)


def greedy_single_cell(
    budget: LinkBudget,
    objective="total",
    Q: int = 1,
    cap: int = DEFAULT_CAP,
    shuffle_seed: int | None = None,
) -> OptResult:
    """Two-stage greedy: exhaustive over the first ``Q`` UEs, then one UE at a time.

    Stage 1 evaluates all ``(E+M)^Q`` serving choices of the first ``Q`` UEs,
    with the rest absent. Stage 2 adds each remaining UE at its best serving
    point, keeping earlier UEs fixed: ``(N-Q)(E+M)`` evaluations.
    ``metadata['reported_count']`` gives ``(M+1)^Q + (N-Q) M``.
    """
    obj = _as_objective(budget, objective)
    E, M, N = budget.n_enb, budget.n_ap, budget.n_ue
    if not 0 <= Q <= N:
        raise ValueError(f"Q must lie in [0, N], got {Q}")
    if (E + M) ** Q > cap:
        raise SearchCapExceeded((E + M) ** Q, cap)
    order = _ue_order(N, shuffle_seed)
    tracer = _Tracer(N)
    template = np.full(N, ABSENT, dtype=np.int64)
    value = -np.inf
    if Q:
        best = _search_block(obj, tracer, range(E + M), order[:Q], template, None)
        template = np.array(best[0], dtype=np.int64)
        value = best[1]
    stage1 = sum(len(v) for v in tracer.vals)
    for k in order[Q:]:
        cands = np.repeat(template[None, :], E + M, axis=0)
        cands[:, k] = np.arange(E + M)
        vals = obj.batch(cands)
        tracer.add(cands, vals)
        i = int(np.argmax(vals))
        template = cands[i].copy()
        value = float(vals[i])
    meta = {"stage1_evaluations": stage1, "reported_count": (M + 1) ** Q + (N - Q) * M}
    return tracer.result(tuple(int(v) for v in template), value, E, M, metadata=meta)


def greedy_single_cell_total(
    budget: LinkBudget, Q: int = 1, cap: int = DEFAULT_CAP, shuffle_seed: int | None = None, draws: int = 0, seed: int = 0
) -> OptResult:
    """Two-stage greedy maximizing the mean SINR over UEs."""
    return greedy_single_cell(budget, Objective(budget, "total", draws, seed), Q, cap, shuffle_seed)


def greedy_single_cell_maxmin(
    budget: LinkBudget, Q: int = 1, cap: int = DEFAULT_CAP, shuffle_seed: int | None = None, draws: int = 0, seed: int = 0
) -> OptResult:
    """Two-stage greedy maximizing the minimum UE SINR."""
    return greedy_single_cell(budget, Objective(budget, "maxmin", draws, seed), Q, cap, shuffle_seed)


def min_ue_sinr(budget: LinkBudget, a: Assignment) -> float:
    """Minimum end-to-end SINR over present UEs on the mean-gain budget."""
    return Objective(budget, "maxmin")(a)


# ---------------------------------------------------------------------------
# Gain curves
# ---------------------------------------------------------------------------

SCHEMES = ("greedy", "exhaustive")
GAIN_COLUMNS = ("N", "M", "scheme", "gain_mean", "gain_ci_low", "gain_ci_high", "evaluations")


@dataclass(frozen=True)
class GainExperiment:
    """Hybrid-over-cellular gain study over random scenarios.

    ``layout`` is ``single`` (one eNB at the origin) or ``multi`` (``sites``
    eNBs on a hexagonal ring at ``inter_site_distance``). The cellular baseline
    is the best eNB-only assignment. Multi-cell greedy starts from that
    baseline, so its gain is at least one.
    """

    Ns: tuple[int, ...]
    Ms: tuple[int, ...]
    replications: int = 200
    seed: int = 0
    Q: int = 2
    schemes: tuple[str, ...] = ("greedy",)
    objective: str = "total"
    layout: str = "single"
    sites: int = 7
    inter_site_distance: float = 1000.0
    cell_radius: float = 500.0
    cap: int = DEFAULT_CAP
    scenario_params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.layout not in ("single", "multi"):
            raise ValueError("layout must be 'single' or 'multi'")
        bad = set(self.schemes) - set(SCHEMES)
        if bad:
            raise ValueError(f"unknown schemes {sorted(bad)}")
        if self.replications < 1:
            raise ValueError("replications must be positive")


def scenario_seed(seed: int, *key: int) -> int:
    """Independent per-replication scenario seed derived from the base seed and a key."""
    return int(np.random.SeedSequence([seed, *key]).generate_state(1, np.uint32)[0])


def _experiment_budget(exp: GainExperiment, N: int, M: int, r: int) -> LinkBudget:
    from .scenario import build_link_budget, generate_uniform, hexagonal_sites

    enbs = ((0.0, 0.0),) if exp.layout == "single" else hexagonal_sites(exp.sites, exp.inter_site_distance)
    sc = generate_uniform(N, M, exp.cell_radius, scenario_seed(exp.seed, N, M, r), enbs, **exp.scenario_params)
    return build_link_budget(sc)


def _ci(values: list[float]) -> tuple[float, float, float]:
    v = np.asarray(values, dtype=float)
    mean = float(np.mean(v))
    half = 1.96 * float(np.std(v, ddof=1)) / math.sqrt(len(v)) if len(v) > 1 else 0.0
    return mean, mean - half, mean + half


def gain_curve(exp: GainExperiment) -> list[dict]:
    """Rows with the mean hybrid/cellular objective ratio and its 95% normal CI per (N, M, scheme)."""
    rows = []
    for N in exp.Ns:
        for M in exp.Ms:
            gains: dict[str, list[float]] = {s: [] for s in exp.schemes}
            evals: dict[str, list[int]] = {s: [] for s in exp.schemes}
            for r in range(exp.replications):
                budget = _experiment_budget(exp, N, M, r)
                obj = Objective(budget, exp.objective)
                base = best_cellular(budget, obj, exp.cap)
                for scheme in exp.schemes:
                    if scheme == "exhaustive":
                        res = exhaustive(budget, obj, exp.cap)
                    elif exp.layout == "single":
                        res = greedy_single_cell(budget, obj, min(exp.Q, N), exp.cap)
                    else:
                        res = greedy_multi_cell(budget, obj, init=base.assignment)
                    gains[scheme].append(res.objective_value / base.objective_value)
                    evals[scheme].append(res.evaluations)
            for scheme in exp.schemes:
                mean, lo, hi = _ci(gains[scheme])
                rows.append(
                    dict(
                        N=N,
                        M=M,
                        scheme=scheme,
                        gain_mean=mean,
                        gain_ci_low=lo,
                        gain_ci_high=hi,
                        evaluations=int(round(float(np.mean(evals[scheme])))),
                    )
                )
    return rows
