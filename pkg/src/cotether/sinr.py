"""Instantaneous SINR for every link type, derived from a serving assignment.

Serving points are indexed eNBs first (``0 .. E-1``), then APs
(``E .. E+M-1``); ``-1`` marks a UE that is not (yet) part of the topology.

Transmission model (one shared cellular channel, one shared WLAN channel):

* every eNB-served UE receives one cellular transmission from its eNB;
* every AP serving at least one UE receives one cellular feeder transmission
  from its backhaul eNB;
* every AP-served UE receives one WLAN transmission from its AP.

A receiver's interferers are all other transmissions in its band. The mean
INR of an interferer is the budget entry of (transmitting node, receiving
node). SINR is ``desired / (1 + sum of INRs)``. An AP-served UE gets the
minimum of its two phases (decode-and-forward).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dist import MinOf, SinrDistribution, from_interference_config
from .scenario import LinkBudget

ABSENT = -1


@dataclass(frozen=True)
class Assignment:
    """Per-UE serving point (0-based, eNBs before APs, ``-1`` for absent UEs)."""

    serving: tuple[int, ...]
    n_enb: int
    n_ap: int

    def __post_init__(self):
        object.__setattr__(self, "serving", tuple(int(s) for s in self.serving))
        for s in self.serving:
            if not (s == ABSENT or 0 <= s < self.n_enb + self.n_ap):
                raise ValueError(f"serving index {s} out of range for {self.n_enb} eNBs and {self.n_ap} APs")

    @classmethod
    def from_topology_vector(cls, vec, n_enb: int, n_ap: int) -> "Assignment":
        """Build from a 1-based topology vector (eNBs ``1..E``, then APs ``E+1..E+M``)."""
        return cls(tuple(int(v) - 1 if v > 0 else ABSENT for v in vec), n_enb, n_ap)

    def to_topology_vector(self) -> tuple[int, ...]:
        return tuple(s + 1 if s != ABSENT else 0 for s in self.serving)

    @property
    def n_ue(self) -> int:
        return len(self.serving)

    def is_direct(self, k: int) -> bool:
        return 0 <= self.serving[k] < self.n_enb

    def is_ap(self, k: int) -> bool:
        return self.serving[k] >= self.n_enb

    def ap_of(self, k: int) -> int:
        return self.serving[k] - self.n_enb

    def active_aps(self) -> tuple[int, ...]:
        return tuple(sorted({self.ap_of(k) for k in range(self.n_ue) if self.is_ap(k)}))

    def check_budget(self, budget: LinkBudget) -> None:
        if (budget.n_enb, budget.n_ap, budget.n_ue) != (self.n_enb, self.n_ap, self.n_ue):
            raise ValueError("assignment dimensions do not match the budget")


@dataclass(frozen=True)
class InterferenceSets:
    """Transmitter indices of the interferers seen by each receiver.

    ``ue_cell_ue[k]`` / ``ue_cell_ap[k]``: eNBs of the other eNB->UE / eNB->AP
    transmissions heard by an eNB-served UE ``k``. ``ap_cell_ue[m]`` /
    ``ap_cell_ap[m]``: the same for the feeder receiver of active AP ``m``.
    ``wlan_ue[k]``: APs of the other AP->UE transmissions heard by an
    AP-served UE ``k``. Repeated indices denote several transmissions from one node.
    """

    ue_cell_ue: dict[int, tuple[int, ...]]
    ue_cell_ap: dict[int, tuple[int, ...]]
    ap_cell_ue: dict[int, tuple[int, ...]]
    ap_cell_ap: dict[int, tuple[int, ...]]
    wlan_ue: dict[int, tuple[int, ...]]
    feeder: tuple[int, ...]


def derive_interference_sets(a: Assignment, feeder=None) -> InterferenceSets:
    """Enumerate transmissions of the topology and collect each receiver's interferers.

    ``feeder[m]`` is the backhaul eNB of AP ``m`` (defaults to eNB 0).
    """
    feeder = tuple(int(f) for f in (feeder if feeder is not None else [0] * a.n_ap))
    direct = [(k, a.serving[k]) for k in range(a.n_ue) if a.is_direct(k)]
    relayed = [(k, a.ap_of(k)) for k in range(a.n_ue) if a.is_ap(k)]
    active = a.active_aps()
    ue_cell_ue = {k: tuple(e for k2, e in direct if k2 != k) for k, _ in direct}
    ue_cell_ap = {k: tuple(feeder[m] for m in active) for k, _ in direct}
    ap_cell_ue = {m: tuple(e for _, e in direct) for m in active}
    ap_cell_ap = {m: tuple(feeder[m2] for m2 in active if m2 != m) for m in active}
    wlan_ue = {k: tuple(m for k2, m in relayed if k2 != k) for k, _ in relayed}
    return InterferenceSets(ue_cell_ue, ue_cell_ap, ap_cell_ue, ap_cell_ap, wlan_ue, feeder)


@dataclass(frozen=True, eq=False)
class FadingDraw:
    """One realization of all squared channel envelopes scaled to SNR units."""

    enb_ue: np.ndarray
    enb_ap: np.ndarray
    ap_ue: np.ndarray

    @classmethod
    def mean_of(cls, budget: LinkBudget) -> "FadingDraw":
        """The deterministic draw equal to the budget means."""
        return cls(budget.enb_ue, budget.enb_ap, budget.ap_ue)

    @classmethod
    def sample(cls, budget: LinkBudget, rng: np.random.Generator, size: tuple[int, ...] = ()) -> "FadingDraw":
        """Exponential gains with the budget means; ``size`` adds leading batch axes."""

        def draw(mean):
            return -mean * np.log1p(-rng.random(tuple(size) + mean.shape))

        return cls(draw(budget.enb_ue), draw(budget.enb_ap), draw(budget.ap_ue))


def _ratio(desired, interferers):
    total = 1.0
    for v in interferers:
        total = total + v
    return desired / total


def sinr_conventional(draw: FadingDraw, a: Assignment, sets: InterferenceSets, k: int) -> float:
    """eNB-served UE in an all-cellular topology: interferers are other eNB->UE links."""
    if a.active_aps():
        raise ValueError("conventional SINR applies to topologies without AP service")
    return sinr_hybrid_direct(draw, a, sets, k)


def sinr_hybrid_direct(draw: FadingDraw, a: Assignment, sets: InterferenceSets, k: int) -> float:
    """eNB-served UE: interferers are other eNB->UE and all eNB->AP transmissions."""
    e = a.serving[k]
    inr = [draw.enb_ue[..., t, k] for t in sets.ue_cell_ue[k] + sets.ue_cell_ap[k]]
    return _ratio(draw.enb_ue[..., e, k], inr)


def sinr_ap_phase1(draw: FadingDraw, a: Assignment, sets: InterferenceSets, m: int) -> float:
    """Feeder link into AP ``m``: interferers are all other cellular transmissions."""
    e = sets.feeder[m]
    inr = [draw.enb_ap[..., t, m] for t in sets.ap_cell_ue[m] + sets.ap_cell_ap[m]]
    return _ratio(draw.enb_ap[..., e, m], inr)


def sinr_ue_phase2(draw: FadingDraw, a: Assignment, sets: InterferenceSets, k: int) -> float:
    """WLAN link into UE ``k``: interferers are the other AP->UE transmissions."""
    m = a.ap_of(k)
    inr = [draw.ap_ue[..., t, k] for t in sets.wlan_ue[k]]
    return _ratio(draw.ap_ue[..., m, k], inr)


def sinr_selection(direct, relayed):
    """Selection combining; ties go to the direct link."""
    return np.where(relayed > direct, relayed, direct)[()]


def sinr_min_phases(phase1, phase2):
    """Decode-and-forward; ties go to the first phase."""
    return np.where(phase2 < phase1, phase2, phase1)[()]


def sinr_end_to_end(draw: FadingDraw, a: Assignment, k: int, sets: InterferenceSets | None = None):
    """Direct SINR for eNB-served UEs, min of the two phases for AP-served UEs."""
    if a.serving[k] == ABSENT:
        raise ValueError(f"UE {k} is not part of the topology")
    sets = sets or derive_interference_sets(a)
    if a.is_direct(k):
        return sinr_hybrid_direct(draw, a, sets, k)
    return sinr_min_phases(sinr_ap_phase1(draw, a, sets, a.ap_of(k)), sinr_ue_phase2(draw, a, sets, k))


def per_ue_sinr(draw: FadingDraw, a: Assignment, feeder=None) -> dict[int, float]:
    sets = derive_interference_sets(a, feeder)
    return {k: sinr_end_to_end(draw, a, k, sets) for k in range(a.n_ue) if a.serving[k] != ABSENT}


def overall_sinr(draw: FadingDraw, a: Assignment, feeder=None) -> float:
    """Arithmetic mean of the present UEs' end-to-end SINRs."""
    vals = list(per_ue_sinr(draw, a, feeder).values())
    if not vals:
        raise ValueError("no UE is present in the topology")
    total = vals[0]
    for v in vals[1:]:
        total = total + v
    return total / len(vals)


def link_distribution(budget: LinkBudget, a: Assignment, k: int) -> SinrDistribution:
    """Closed-form distribution of UE ``k``'s end-to-end SINR under ``a``.

    Raises :class:`IllConditionedError` when interferer means are partially
    equal (e.g. several transmissions from one eNB mixed with others).
    """
    a.check_budget(budget)
    feeder = budget.ap_feeder
    sets = derive_interference_sets(a, feeder)
    if a.is_direct(k):
        e = a.serving[k]
        return from_interference_config(
            "hybrid_direct",
            budget.enb_ue[e, k],
            cell_ue=[budget.enb_ue[t, k] for t in sets.ue_cell_ue[k]],
            cell_ap=[budget.enb_ue[t, k] for t in sets.ue_cell_ap[k]],
        )
    m = a.ap_of(k)
    ea = from_interference_config(
        "ap_phase1",
        budget.enb_ap[feeder[m], m],
        cell_ue=[budget.enb_ap[t, m] for t in sets.ap_cell_ue[m]],
        cell_ap=[budget.enb_ap[t, m] for t in sets.ap_cell_ap[m]],
    )
    au = from_interference_config(
        "ue_phase2", budget.ap_ue[m, k], wlan=[budget.ap_ue[t, k] for t in sets.wlan_ue[k]]
    )
    return MinOf(ea, au)


# ---------------------------------------------------------------------------
# Vectorized evaluation over batches of assignments
# ---------------------------------------------------------------------------


def _gather(G: np.ndarray, rows: np.ndarray, col: int) -> np.ndarray:
    """G[..., rows[b], col] with the assignment batch as the last axis.

    Out-of-range rows (entries masked out by the caller) are clipped.
    """
    return G[..., np.clip(rows, 0, G.shape[-2] - 1), col]


def batch_per_ue_sinr(gains: FadingDraw, serving: np.ndarray, n_enb: int, feeder) -> np.ndarray:
    """End-to-end SINR of every UE for a batch of assignments.

    ``serving`` has shape ``(B, N)``; gain arrays may carry leading draw axes
    ``D``. Returns shape ``(*D, B, N)`` with NaN for absent UEs. Sums run in a
    fixed index order, so each row's result does not depend on the batch.
    """
    S = np.asarray(serving, dtype=np.int64)
    B, N = S.shape
    eu, ea, au = gains.enb_ue, gains.enb_ap, gains.ap_ue
    M = ea.shape[-1]
    feeder = np.asarray(feeder, dtype=np.int64)
    direct = (S >= 0) & (S < n_enb)
    relayed = S >= n_enb
    ap_idx = np.where(relayed, S - n_enb, 0)
    active = np.zeros((B, M), dtype=bool)
    for m in range(M):
        active[:, m] = np.any(relayed & (ap_idx == m), axis=1)
    lead = eu.shape[:-2]
    out = np.full(lead + (B, N), np.nan)

    # feeder-link SINR for every AP (meaningful only where active)
    phase1 = np.empty(lead + (B, M))
    for m in range(M):
        interf = np.ones(lead + (B,))
        for j in range(N):
            interf = interf + np.where(direct[:, j], _gather(ea, S[:, j], m), 0.0)
        for m2 in range(M):
            if m2 != m:
                interf = interf + np.where(active[:, m2], ea[..., feeder[m2], m][..., None], 0.0)
        phase1[..., m] = ea[..., feeder[m], m][..., None] / interf

    for k in range(N):
        # direct branch
        interf = np.ones(lead + (B,))
        for j in range(N):
            if j != k:
                interf = interf + np.where(direct[:, j], _gather(eu, S[:, j], k), 0.0)
        for m in range(M):
            interf = interf + np.where(active[:, m], eu[..., feeder[m], k][..., None], 0.0)
        d_val = _gather(eu, S[:, k], k) / interf
        # relayed branch
        if M:
            interf = np.ones(lead + (B,))
            for j in range(N):
                if j != k:
                    interf = interf + np.where(relayed[:, j], _gather(au, ap_idx[:, j], k), 0.0)
            p2 = _gather(au, ap_idx[:, k], k) / interf
            p1 = np.take_along_axis(phase1, np.broadcast_to(ap_idx[:, k][..., None], lead + (B, 1)), axis=-1)[..., 0]
            r_val = sinr_min_phases(p1, p2)
        else:
            r_val = np.full(lead + (B,), np.nan)
        val = np.where(direct[:, k], d_val, np.where(relayed[:, k], r_val, np.nan))
        out[..., k] = val
    return out
