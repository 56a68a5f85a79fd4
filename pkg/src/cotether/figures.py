"""Scaled-down reproductions of the published figure trends.

Each ``figure_N`` returns a :class:`FigureResult`. It holds the underlying
curve rows and a list of named trend checks.

Abstract link setup for the single-link figures (3-5), used when only the
total interferer count ``T`` and the average INR are given:

* every desired link has mean SNR ``desired`` (40 dB by default);
* conventional: ``T`` cellular interferers, each of mean INR ``inr``;
* hybrid: the interferers split evenly. The direct link and the AP feeder
  see ``T/2`` eNB->UE interferers at ``inr`` and ``T/2`` eNB->AP interferers
  at ``inr/2``; the WLAN phase sees ``T/2`` AP->UE interferers at ``inr``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dist import SinrDistribution, end_to_end_distribution, from_interference_config
from .metrics import MODULATIONS, CapacityParams, abep, ergodic_capacity, mean_sinr
from .montecarlo import McConfig, simulate_link
from .optimize import GainExperiment, Objective, best_cellular, exhaustive, gain_curve, greedy_single_cell, scenario_seed
from .scenario import LinkConfig, build_link_budget, generate_uniform

FIGURES = (3, 4, 5, 6, 8, 10, 11)
DESIRED_40DB = 1e4
FEEDER_INR_FACTOR = 0.5
INRS = (1.0, 10.0, 100.0)
TOTALS = (6, 12, 18, 24, 30)


@dataclass
class FigureResult:
    columns: tuple[str, ...]
    rows: list[dict]
    checks: list[tuple[str, bool, str]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(ok for _, ok, _ in self.checks)

    def check(self, name: str, ok: bool, detail: str = "") -> None:
        self.checks.append((name, bool(ok), detail))


def abstract_link_configs(total: int, inr: float, desired: float = DESIRED_40DB) -> dict[str, LinkConfig]:
    """Per-link interference configuration for ``total`` interferers at mean INR ``inr``."""
    if total < 2 or total % 2:
        raise ValueError("the total interferer count must be even and at least 2")
    h = total // 2
    feeder = inr * FEEDER_INR_FACTOR
    return {
        "conventional": LinkConfig(desired, cell_ue=[inr] * total),
        "hybrid_direct": LinkConfig(desired, cell_ue=[inr] * h, cell_ap=[feeder] * h),
        "ap_phase1": LinkConfig(desired, cell_ue=[inr] * h, cell_ap=[feeder] * h),
        "ue_phase2": LinkConfig(desired, wlan=[inr] * h),
    }


HYBRID_PARTS = ("hybrid_direct", "ap_phase1", "ue_phase2")


def path_distributions(cfgs: dict[str, LinkConfig]) -> dict[str, SinrDistribution]:
    """One distribution per configured link kind, plus ``hybrid`` (end-to-end) when all parts exist."""
    out = {kind: from_interference_config(kind, **cfg.as_kwargs()) for kind, cfg in cfgs.items()}
    if all(k in out for k in HYBRID_PARTS):
        out["hybrid"] = end_to_end_distribution(out["ap_phase1"], out["ue_phase2"], out["hybrid_direct"])
    return out


def _db(x: float) -> float:
    return 10.0 * math.log10(x)


def figure_3(seed: int = 0, samples: int = 0, n_workers: int = 1, inrs=INRS, grid=None) -> FigureResult:
    """Outage probability versus threshold: 24 conventional vs 12/12/12 hybrid interferers."""
    grid = np.logspace(-1, 3, 20) if grid is None else np.asarray(grid, dtype=float)
    cols = ("inr_db", "gamma_th", "op_conventional", "op_hybrid")
    if samples:
        cols += ("mc_conventional", "mc_hybrid", "mc_se_conventional", "mc_se_hybrid")
    res = FigureResult(cols, [])
    for i, inr in enumerate(inrs):
        d = path_distributions(abstract_link_configs(24, inr))
        conv, hyb = np.asarray(d["conventional"].cdf(grid)), np.asarray(d["hybrid"].cdf(grid))
        res.check(f"analytic hybrid OP <= conventional OP (INR {_db(inr):g} dB)", np.all(hyb <= conv), "")
        if samples:
            e_c = simulate_link(McConfig(samples, scenario_seed(seed, 3, i, 0), n_workers), d["conventional"])
            e_h = simulate_link(McConfig(samples, scenario_seed(seed, 3, i, 1), n_workers), d["hybrid"])
            mc_c, mc_h = e_c.cdf(grid), e_h.cdf(grid)
            se_c = np.sqrt(mc_c * (1 - mc_c) / samples)
            se_h = np.sqrt(mc_h * (1 - mc_h) / samples)
            slack = 3.0 * np.sqrt(se_c**2 + se_h**2)
            res.check(f"MC hybrid OP <= conventional OP within 3 sigma (INR {_db(inr):g} dB)", np.all(mc_h <= mc_c + slack), "")
        for j, g in enumerate(grid):
            row = dict(inr_db=_db(inr), gamma_th=float(g), op_conventional=float(conv[j]), op_hybrid=float(hyb[j]))
            if samples:
                row.update(mc_conventional=float(mc_c[j]), mc_hybrid=float(mc_h[j]),
                           mc_se_conventional=float(se_c[j]), mc_se_hybrid=float(se_h[j]))
            res.rows.append(row)
    return res


def figure_4(inrs=INRS, totals=TOTALS) -> FigureResult:
    """Average output SINR versus total interferer count."""
    res = FigureResult(("inr_db", "interferers", "mean_conventional", "mean_hybrid"), [])
    for inr in inrs:
        prev = math.inf
        for t in totals:
            d = path_distributions(abstract_link_configs(t, inr))
            mc, mh = mean_sinr(d["conventional"]), mean_sinr(d["hybrid"])
            res.rows.append(dict(inr_db=_db(inr), interferers=t, mean_conventional=mc, mean_hybrid=mh))
            res.check(f"hybrid mean SINR > conventional (INR {_db(inr):g} dB, T={t})", mh > mc, f"{mh:.6g} vs {mc:.6g}")
            res.check(f"conventional mean SINR decreases with T (INR {_db(inr):g} dB, T={t})", mc < prev, "")
            prev = mc
    return res


def figure_5(inrs=INRS, totals=TOTALS, modulation: str = "dbpsk") -> FigureResult:
    """ABEP and ergodic capacity versus total interferer count (hybrid with one and two hops)."""
    m = MODULATIONS[modulation]
    cols = ("inr_db", "interferers", "abep_conventional", "abep_hybrid",
            "capacity_conventional", "capacity_hybrid_nh1", "capacity_hybrid_nh2")
    res = FigureResult(cols, [])
    for inr in inrs:
        for t in totals:
            d = path_distributions(abstract_link_configs(t, inr))
            ac, ah = abep(d["conventional"], m), abep(d["hybrid"], m)
            cc = ergodic_capacity(d["conventional"])
            c1 = ergodic_capacity(d["hybrid"], CapacityParams(1))
            c2 = c1 / 2
            res.rows.append(dict(inr_db=_db(inr), interferers=t, abep_conventional=ac, abep_hybrid=ah,
                                 capacity_conventional=cc, capacity_hybrid_nh1=c1, capacity_hybrid_nh2=c2))
            tag = f"(INR {_db(inr):g} dB, T={t})"
            res.check(f"hybrid ABEP < conventional {tag}", ah < ac, "")
            res.check(f"hybrid NH=2 capacity < conventional {tag}", c2 < cc, f"{c2:.4f} vs {cc:.4f}")
            res.check(f"hybrid NH=1 capacity > conventional {tag}", c1 > cc, f"{c1:.4f} vs {cc:.4f}")
    return res


def _gain_figure(exp: GainExperiment) -> FigureResult:
    rows = gain_curve(exp)
    return FigureResult(("N", "M", "scheme", "gain_mean", "gain_ci_low", "gain_ci_high", "evaluations"), rows)


def figure_6(seed: int = 0, replications: int = 30, Ns=(2, 3, 4), Ms=(0, 1, 2, 3)) -> FigureResult:
    """Multi-cell gain of greedy AP offloading over the best eNB-only topology."""
    res = _gain_figure(GainExperiment(tuple(Ns), tuple(Ms), replications, seed, layout="multi"))
    for r in res.rows:
        res.check(f"multi-cell gain >= 1 (N={r['N']}, M={r['M']})", r["gain_mean"] >= 1.0, f"{r['gain_mean']:.4f}")
        if r["M"] == 0:
            res.check(f"no APs gives unit gain (N={r['N']})", r["gain_mean"] == 1.0, "")
    return res


def figure_8(seed: int = 0, replications: int = 200, Ns=(2, 3, 4, 5, 6, 7), Ms=(1, 3, 5), Q: int = 2) -> FigureResult:
    """Single-cell greedy gain over the all-eNB topology."""
    res = _gain_figure(GainExperiment(tuple(Ns), tuple(Ms), replications, seed, Q))
    by = {(r["N"], r["M"]): r["gain_mean"] for r in res.rows}
    for (n, m), g in by.items():
        res.check(f"gain > 1 (N={n}, M={m})", g > 1.0, f"{g:.6f}")
    for m in Ms:
        if (5, m) in by and (7, m) in by:
            ratio = by[(7, m)] / by[(5, m)]
            res.check(f"gain at N=7 within 2x of N=5 (M={m})", 0.5 <= ratio <= 2.0, f"ratio {ratio:.3f}")
    return res


def figure_10(seed: int = 0, replications: int = 30, Ns=(2, 3, 4, 5), Ms=(1, 2, 3), Q: int = 2) -> FigureResult:
    """Greedy versus exhaustive single-cell gain."""
    res = _gain_figure(GainExperiment(tuple(Ns), tuple(Ms), replications, seed, Q, ("greedy", "exhaustive")))
    by = {(r["N"], r["M"], r["scheme"]): r["gain_mean"] for r in res.rows}
    for n in Ns:
        for m in Ms:
            g, e = by[(n, m, "greedy")], by[(n, m, "exhaustive")]
            res.check(f"exhaustive gain >= greedy gain (N={n}, M={m})", e >= g, f"{e:.4f} vs {g:.4f}")
    return res


def figure_11(seed: int = 0, replications: int = 20, Ns=(2, 3, 4), Ms=(1, 2, 3), Q: int = 2) -> FigureResult:
    """Minimum-UE SINR under total-SINR and max-min optimization, per instance."""
    cols = ("N", "M", "instance", "min_sinr_cellular", "min_sinr_total_opt", "min_sinr_maxmin_opt",
            "min_sinr_total_greedy", "min_sinr_maxmin_greedy")
    res = FigureResult(cols, [])
    ok = True
    for n in Ns:
        for m in Ms:
            for r in range(replications):
                b = build_link_budget(generate_uniform(n, m, seed=scenario_seed(seed, n, m, r)))
                mm = Objective(b, "maxmin")
                tot = Objective(b, "total")
                t_opt = exhaustive(b, tot).assignment
                m_opt = exhaustive(b, mm)
                t_gr = greedy_single_cell(b, tot, min(Q, n)).assignment
                m_gr = greedy_single_cell(b, mm, min(Q, n)).assignment
                row = dict(N=n, M=m, instance=r, min_sinr_cellular=best_cellular(b, mm).objective_value,
                           min_sinr_total_opt=mm(t_opt), min_sinr_maxmin_opt=m_opt.objective_value,
                           min_sinr_total_greedy=mm(t_gr), min_sinr_maxmin_greedy=mm(m_gr))
                ok &= row["min_sinr_maxmin_opt"] >= row["min_sinr_total_opt"]
                res.rows.append(row)
    res.check("max-min optimum's minimum SINR >= total optimum's minimum SINR on every instance", ok, "")
    return res


def run_figure(number: int, seed: int = 0, samples: int = 0, n_workers: int = 1, replications: int | None = None) -> FigureResult:
    if number not in FIGURES:
        raise ValueError(f"figure must be one of {FIGURES}")
    reps = {} if replications is None else {"replications": replications}
    if number == 3:
        return figure_3(seed, samples, n_workers)
    if number == 4:
        return figure_4()
    if number == 5:
        return figure_5()
    return {6: figure_6, 8: figure_8, 10: figure_10, 11: figure_11}[number](seed, **reps)
