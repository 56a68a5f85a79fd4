"""Network scenarios and the mean link budgets derived from them.

A :class:`Scenario` holds node positions and radio parameters. The mean SNR or
INR of every transmitter->receiver pair follows from the Friis free-space
model with unity antenna gains: ``P_tx * (lambda / (4 pi d))^2 / N0``.

Abstract link configurations bypass geometry altogether. They list the mean
desired SNR and interferer INRs for each link type, and are loaded from CSV.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

SPEED_OF_LIGHT = 299_792_458.0

DEFAULTS = dict(
    cell_radius=500.0,
    p_enb=10.0,
    p_ap=0.1,
    f_cell=800e6,
    f_wlan=2.4e9,
    noise_power=1e-10,
)


def friis_mean_gain(d, f):
    """Mean channel power gain (lambda / (4 pi d))^2 with lambda = c / f."""
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distance must be positive (coincident nodes are not allowed)")
    if np.any(np.asarray(f) <= 0):
        raise ValueError("frequency must be positive")
    out = (SPEED_OF_LIGHT / f / (4.0 * math.pi * d)) ** 2
    return out[()] if isinstance(out, np.ndarray) else out


def _points(a) -> np.ndarray:
    arr = np.asarray(a, dtype=float).reshape(-1, 2)
    return arr


@dataclass(frozen=True, eq=False)
class Scenario:
    """Node geometry (meters) and radio parameters of one network realization."""

    enb_positions: np.ndarray
    ap_positions: np.ndarray
    ue_positions: np.ndarray
    cell_radius: float = DEFAULTS["cell_radius"]
    p_enb: float = DEFAULTS["p_enb"]
    p_ap: float = DEFAULTS["p_ap"]
    f_cell: float = DEFAULTS["f_cell"]
    f_wlan: float = DEFAULTS["f_wlan"]
    noise_power: float = DEFAULTS["noise_power"]
    rng_seed: int | None = None

    def __post_init__(self):
        for name in ("enb_positions", "ap_positions", "ue_positions"):
            object.__setattr__(self, name, _points(getattr(self, name)))
        if self.p_enb <= 0 or self.p_ap <= 0 or self.noise_power <= 0:
            raise ValueError("powers and noise power must be positive")
        if self.cell_radius <= 0:
            raise ValueError("cell radius must be positive")
        if self.f_cell == self.f_wlan:
            raise ValueError("cellular and WLAN carriers must differ")
        if len(self.enb_positions) == 0 and (len(self.ue_positions) or len(self.ap_positions)):
            raise ValueError("a scenario with UEs or APs needs at least one eNB")
        if len(self.enb_positions):
            for pts in (self.ap_positions, self.ue_positions):
                if len(pts):
                    nearest = np.min(np.linalg.norm(pts[:, None, :] - self.enb_positions[None], axis=-1), axis=1)
                    if np.any(nearest > self.cell_radius * (1 + 1e-12)):
                        raise ValueError("every node must lie within cell_radius of some eNB")

    @property
    def n_enb(self) -> int:
        return len(self.enb_positions)

    @property
    def n_ap(self) -> int:
        return len(self.ap_positions)

    @property
    def n_ue(self) -> int:
        return len(self.ue_positions)

    def to_dict(self) -> dict:
        return {
            "enb_positions": self.enb_positions.tolist(),
            "ap_positions": self.ap_positions.tolist(),
            "ue_positions": self.ue_positions.tolist(),
            "cell_radius": self.cell_radius,
            "p_enb": self.p_enb,
            "p_ap": self.p_ap,
            "f_cell": self.f_cell,
            "f_wlan": self.f_wlan,
            "noise_power": self.noise_power,
            "rng_seed": self.rng_seed,
        }


def _uniform_disk(rng: np.random.Generator, n: int, radius: float, centers: np.ndarray) -> np.ndarray:
    """Uniform by area in a disk around a randomly chosen center (sqrt-radius sampling)."""
    if n == 0:
        return np.zeros((0, 2))
    which = rng.integers(len(centers), size=n) if len(centers) > 1 else np.zeros(n, dtype=int)
    r = radius * np.sqrt(rng.random(n))
    theta = 2.0 * math.pi * rng.random(n)
    return centers[which] + np.column_stack([r * np.cos(theta), r * np.sin(theta)])


def generate_uniform(
    n_ue: int,
    m_ap: int,
    cell_radius: float = DEFAULTS["cell_radius"],
    seed: int = 0,
    enb_positions=((0.0, 0.0),),
    **params,
) -> Scenario:
    """Place UEs and APs uniformly (by area) in the cell(s), deterministically per seed.

    With several eNBs, each node first picks a cell uniformly at random.
    """
    if n_ue < 0 or m_ap < 0:
        raise ValueError("node counts must be non-negative")
    if cell_radius <= 0:
        raise ValueError("cell radius must be positive")
    centers = _points(enb_positions)
    rng = np.random.default_rng(seed)
    aps = _uniform_disk(rng, m_ap, cell_radius, centers)
    ues = _uniform_disk(rng, n_ue, cell_radius, centers)
    return Scenario(centers, aps, ues, cell_radius=cell_radius, rng_seed=seed, **params)


def hexagonal_sites(n_sites: int, inter_site_distance: float) -> np.ndarray:
    """Centre site plus up to six neighbours on a hexagonal ring."""
    if not 1 <= n_sites <= 7:
        raise ValueError("hexagonal layout supports 1 to 7 sites")
    pts = [(0.0, 0.0)] + [
        (inter_site_distance * math.cos(math.pi / 3 * i), inter_site_distance * math.sin(math.pi / 3 * i))
        for i in range(6)
    ]
    return np.array(pts[:n_sites])


# ---------------------------------------------------------------------------
# Link budgets
# ---------------------------------------------------------------------------

CELL = "cell"
WLAN = "wlan"


@dataclass(frozen=True, eq=False)
class LinkBudget:
    """Mean SNR/INR (dimensionless) for every transmitter->receiver pair.

    ``enb_ue[e, k]`` and ``enb_ap[e, m]`` are in the cellular band and
    ``ap_ue[m, k]`` is in the WLAN band. A receiver sees a transmitter with the
    same mean whether the transmission is desired or interfering.
    """

    enb_ue: np.ndarray
    enb_ap: np.ndarray
    ap_ue: np.ndarray

    def __post_init__(self):
        eu = np.asarray(self.enb_ue, dtype=float)
        E = eu.shape[0] if eu.ndim == 2 else 0
        N = eu.shape[1] if eu.ndim == 2 else 0
        ea = np.asarray(self.enb_ap, dtype=float).reshape(E, -1) if E else np.zeros((0, 0))
        M = ea.shape[1]
        au = np.asarray(self.ap_ue, dtype=float).reshape(M, N)
        eu = eu.reshape(E, N)
        for arr in (eu, ea, au):
            if np.any(~np.isfinite(arr)) or np.any(arr < 0):
                raise ValueError("budget entries must be finite and non-negative")
        for name, arr in (("enb_ue", eu), ("enb_ap", ea), ("ap_ue", au)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_enb(self) -> int:
        return self.enb_ue.shape[0]

    @property
    def n_ue(self) -> int:
        return self.enb_ue.shape[1]

    @property
    def n_ap(self) -> int:
        return self.enb_ap.shape[1]

    @property
    def ap_feeder(self) -> np.ndarray:
        """Index of the eNB that backhauls each AP (strongest mean SNR, lowest index on ties)."""
        if self.n_ap == 0:
            return np.zeros(0, dtype=int)
        return np.argmax(self.enb_ap, axis=0)

    @property
    def nearest_enb(self) -> np.ndarray:
        """Strongest-mean-SNR eNB for each UE (the nearest one under equal powers)."""
        return np.argmax(self.enb_ue, axis=0)

    def mean_snr(self, tx: str, rx: str, band: str | None = None) -> float:
        """Look up by node names ``enb<i>``, ``ap<i>``, ``ue<i>``."""
        kind_tx, i = _parse_node(tx)
        kind_rx, j = _parse_node(rx)
        key = (kind_tx, kind_rx)
        table = {("enb", "ue"): (self.enb_ue, CELL), ("enb", "ap"): (self.enb_ap, CELL), ("ap", "ue"): (self.ap_ue, WLAN)}
        if key not in table:
            raise KeyError(f"no link {tx}->{rx} in the budget")
        arr, b = table[key]
        if band is not None and band != b:
            raise KeyError(f"link {tx}->{rx} is in band {b!r}, not {band!r}")
        return float(arr[i, j])

    def rows(self):
        """(tx, rx, band, mean_snr) for every pair, in a fixed order."""
        for e in range(self.n_enb):
            for k in range(self.n_ue):
                yield f"enb{e}", f"ue{k}", CELL, self.enb_ue[e, k]
            for m in range(self.n_ap):
                yield f"enb{e}", f"ap{m}", CELL, self.enb_ap[e, m]
        for m in range(self.n_ap):
            for k in range(self.n_ue):
                yield f"ap{m}", f"ue{k}", WLAN, self.ap_ue[m, k]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["tx", "rx", "band", "mean_snr"])
            for tx, rx, band, v in self.rows():
                w.writerow([tx, rx, band, repr(float(v))])

    @classmethod
    def from_csv(cls, path) -> "LinkBudget":
        entries = {}
        with open(path, newline="") as fh:
            for row in csv.DictReader(line for line in fh if not line.startswith("#")):
                entries[(_parse_node(row["tx"]), _parse_node(row["rx"]))] = float(row["mean_snr"])
        count = {"enb": 0, "ap": 0, "ue": 0}
        for (t, r) in entries:
            for kind, idx in (t, r):
                count[kind] = max(count[kind], idx + 1)
        E, M, N = count["enb"], count["ap"], count["ue"]
        eu, ea, au = np.zeros((E, N)), np.zeros((E, M)), np.zeros((M, N))
        for ((tk, ti), (rk, ri)), v in entries.items():
            target = {("enb", "ue"): eu, ("enb", "ap"): ea, ("ap", "ue"): au}.get((tk, rk))
            if target is None:
                raise ValueError(f"unsupported link {tk}{ti}->{rk}{ri}")
            target[ti, ri] = v
        return cls(eu, ea, au)


def _parse_node(name: str) -> tuple[str, int]:
    for kind in ("enb", "ap", "ue"):
        if name.startswith(kind) and name[len(kind):].isdigit():
            return kind, int(name[len(kind):])
    raise ValueError(f"bad node name {name!r}; expected enb<i>, ap<i> or ue<i>")


def _distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.linalg.norm(a[:, None, :] - b[None, :, :], axis=-1)


def build_link_budget(s: Scenario) -> LinkBudget:
    """Mean SNR P_tx * friis(d, f_band) / N0 for every eNB->UE, eNB->AP and AP->UE pair."""
    E, M, N = s.n_enb, s.n_ap, s.n_ue

    def snr(p, d, f):
        if d.size == 0:
            return d
        return p * friis_mean_gain(d, f) / s.noise_power

    eu = snr(s.p_enb, _distances(s.enb_positions, s.ue_positions), s.f_cell).reshape(E, N)
    ea = snr(s.p_enb, _distances(s.enb_positions, s.ap_positions), s.f_cell).reshape(E, M)
    au = snr(s.p_ap, _distances(s.ap_positions, s.ue_positions), s.f_wlan).reshape(M, N)
    return LinkBudget(eu, ea, au)


# ---------------------------------------------------------------------------
# Scenario files
# ---------------------------------------------------------------------------


def load_scenario(path) -> tuple[Scenario, dict]:
    """Read a YAML scenario file.

    Either explicit ``enb_positions``/``ap_positions``/``ue_positions`` lists are
    given, or a ``generate`` block (``n_ue``, ``m_ap`` and optionally
    ``sites``/``inter_site_distance``) is expanded with ``rng_seed``. Any other
    top-level keys (e.g. ``experiment``) are returned untouched as the second
    element.
    """
    data = yaml.safe_load(Path(path).read_text()) or {}
    return scenario_from_dict(data)


def scenario_from_dict(data: dict) -> tuple[Scenario, dict]:
    data = dict(data)
    params = {k: float(data.pop(k)) for k in DEFAULTS if k in data}
    seed = int(data.pop("rng_seed", 0))
    gen = data.pop("generate", None)
    extra = {k: data.pop(k) for k in list(data) if not k.endswith("_positions")}
    if gen is not None:
        gen = dict(gen)
        sites = gen.pop("sites", None)
        isd = gen.pop("inter_site_distance", None)
        enbs = data.get("enb_positions") or (hexagonal_sites(int(sites), float(isd)) if sites else [(0.0, 0.0)])
        radius = params.pop("cell_radius", DEFAULTS["cell_radius"])
        sc = generate_uniform(int(gen.pop("n_ue")), int(gen.pop("m_ap")), radius, seed, enbs, **params)
        return sc, extra
    return (
        Scenario(
            data.get("enb_positions", []),
            data.get("ap_positions", []),
            data.get("ue_positions", []),
            rng_seed=seed,
            **params,
        ),
        extra,
    )


def save_scenario(s: Scenario, path) -> None:
    Path(path).write_text(yaml.safe_dump(s.to_dict(), sort_keys=False))


# ---------------------------------------------------------------------------
# Abstract per-link configurations
# ---------------------------------------------------------------------------

LINK_KINDS = ("conventional", "hybrid_direct", "ap_phase1", "ue_phase2")
ROLES = ("desired", "cell_ue", "cell_ap", "wlan")


@dataclass
class LinkConfig:
    """Mean desired SNR and interferer INR lists of one link type."""

    desired: float = 0.0
    cell_ue: list = field(default_factory=list)
    cell_ap: list = field(default_factory=list)
    wlan: list = field(default_factory=list)

    def as_kwargs(self) -> dict:
        return dict(desired=self.desired, cell_ue=self.cell_ue, cell_ap=self.cell_ap, wlan=self.wlan)


def load_link_configs(path) -> dict[str, LinkConfig]:
    """Read an abstract budget CSV with columns ``path, role, count, mean``.

    ``path`` is a link kind, ``role`` one of desired/cell_ue/cell_ap/wlan; a
    row contributes ``count`` interferers of the given mean INR (``count`` is
    ignored for the desired row). Lines starting with ``#`` are comments.
    """
    out: dict[str, LinkConfig] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(line for line in fh if not line.startswith("#"))
        missing = {"path", "role", "count", "mean"} - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"budget file lacks columns {sorted(missing)}")
        for row in reader:
            kind, role = row["path"].strip(), row["role"].strip()
            if kind not in LINK_KINDS:
                raise ValueError(f"unknown path {kind!r}")
            if role not in ROLES:
                raise ValueError(f"unknown role {role!r}")
            mean = float(row["mean"])
            if not mean > 0:
                raise ValueError("means must be positive")
            cfg = out.setdefault(kind, LinkConfig())
            if role == "desired":
                cfg.desired = mean
            else:
                getattr(cfg, role).extend([mean] * int(row["count"]))
    for kind, cfg in out.items():
        if not cfg.desired > 0:
            raise ValueError(f"path {kind!r} has no desired row")
    return out
