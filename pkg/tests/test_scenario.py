import math

import numpy as np
import pytest

from cotether.scenario import (
    LinkBudget,
    Scenario,
    build_link_budget,
    friis_mean_gain,
    generate_uniform,
    hexagonal_sites,
    load_link_configs,
    load_scenario,
    save_scenario,
    scenario_from_dict,
)

CONFIGS = __import__("pathlib").Path(__file__).resolve().parents[1] / "configs"


def test_friis_oracle():
    assert friis_mean_gain(100.0, 800e6) == pytest.approx(8.89286508928664e-08, rel=1e-12)


def test_friis_inverse_square():
    assert friis_mean_gain(200.0, 2.4e9) == pytest.approx(friis_mean_gain(100.0, 2.4e9) / 4, rel=1e-14)
    np.testing.assert_allclose(friis_mean_gain(np.array([1.0, 2.0]), 1e9), [friis_mean_gain(1.0, 1e9), friis_mean_gain(2.0, 1e9)])


@pytest.mark.parametrize("d,f", [(0.0, 1e9), (-1.0, 1e9), (1.0, 0.0)])
def test_friis_rejects_bad_inputs(d, f):
    with pytest.raises(ValueError):
        friis_mean_gain(d, f)


def test_generation_is_deterministic():
    a = generate_uniform(5, 3, seed=42)
    b = generate_uniform(5, 3, seed=42)
    c = generate_uniform(5, 3, seed=43)
    np.testing.assert_array_equal(a.ue_positions, b.ue_positions)
    np.testing.assert_array_equal(a.ap_positions, b.ap_positions)
    assert not np.array_equal(a.ue_positions, c.ue_positions)
    assert (a.n_enb, a.n_ap, a.n_ue) == (1, 3, 5)


def test_generation_is_uniform_by_area():
    s = generate_uniform(40_000, 0, cell_radius=1.0, seed=3)
    r = np.linalg.norm(s.ue_positions, axis=1)
    assert r.max() <= 1.0
    # P(r <= 1/2) = 1/4 under area-uniform placement
    assert abs(np.mean(r <= 0.5) - 0.25) < 4 * math.sqrt(0.25 * 0.75 / 40_000)


def test_multi_cell_generation_stays_in_cells():
    sites = hexagonal_sites(7, 1000.0)
    s = generate_uniform(200, 50, 500.0, 1, sites)
    d = np.linalg.norm(s.ue_positions[:, None] - sites[None], axis=-1).min(axis=1)
    assert np.all(d <= 500.0)
    assert len({tuple(p) for p in sites}) == 7
    np.testing.assert_allclose(np.linalg.norm(sites[1:], axis=1), 1000.0)


def test_scenario_validation():
    with pytest.raises(ValueError):
        Scenario([[0, 0]], [], [[600.0, 0.0]], cell_radius=500.0)
    with pytest.raises(ValueError):
        Scenario([[0, 0]], [], [[1.0, 0.0]], p_enb=0.0)
    with pytest.raises(ValueError):
        Scenario([[0, 0]], [], [[1.0, 0.0]], f_cell=1e9, f_wlan=1e9)
    with pytest.raises(ValueError):
        Scenario([], [], [[1.0, 0.0]])
    with pytest.raises(ValueError):
        generate_uniform(-1, 0)
    with pytest.raises(ValueError):
        hexagonal_sites(8, 1000.0)


def test_budget_from_geometry():
    s = Scenario([[0.0, 0.0]], [[100.0, 0.0]], [[0.0, 200.0], [100.0, 50.0]])
    b = build_link_budget(s)
    assert (b.n_enb, b.n_ap, b.n_ue) == (1, 1, 2)
    assert b.enb_ue[0, 0] == pytest.approx(10.0 * friis_mean_gain(200.0, 800e6) / 1e-10, rel=1e-14)
    assert b.enb_ap[0, 0] == pytest.approx(10.0 * friis_mean_gain(100.0, 800e6) / 1e-10, rel=1e-14)
    assert b.ap_ue[0, 1] == pytest.approx(0.1 * friis_mean_gain(50.0, 2.4e9) / 1e-10, rel=1e-14)
    assert b.mean_snr("ap0", "ue1", "wlan") == b.ap_ue[0, 1]
    with pytest.raises(KeyError):
        b.mean_snr("ue0", "ap0")
    with pytest.raises(KeyError):
        b.mean_snr("ap0", "ue1", "cell")


def test_coincident_nodes_rejected():
    s = Scenario([[0.0, 0.0]], [], [[0.0, 0.0]])
    with pytest.raises(ValueError):
        build_link_budget(s)


def test_budget_csv_round_trip(tmp_path):
    b = build_link_budget(generate_uniform(4, 2, seed=9, enb_positions=hexagonal_sites(3, 1000.0)))
    path = tmp_path / "budget.csv"
    b.to_csv(path)
    back = LinkBudget.from_csv(path)
    for name in ("enb_ue", "enb_ap", "ap_ue"):
        np.testing.assert_array_equal(getattr(back, name), getattr(b, name))


def test_budget_helpers():
    b = LinkBudget([[5.0, 1.0], [2.0, 3.0]], [[1.0], [4.0]], [[7.0, 8.0]])
    np.testing.assert_array_equal(b.nearest_enb, [0, 1])
    np.testing.assert_array_equal(b.ap_feeder, [1])
    with pytest.raises(ValueError):
        LinkBudget([[-1.0]], [[1.0]], [[1.0]])


def test_scenario_yaml_round_trip(tmp_path):
    s = generate_uniform(3, 2, seed=5)
    path = tmp_path / "s.yaml"
    save_scenario(s, path)
    back, extra = load_scenario(path)
    np.testing.assert_array_equal(back.ue_positions, s.ue_positions)
    assert back.p_ap == s.p_ap and extra == {}


def test_shipped_scenarios_load():
    s, extra = load_scenario(CONFIGS / "single_cell.yaml")
    assert (s.n_enb, s.n_ap, s.n_ue) == (1, 5, 7)
    assert extra["experiment"]["replications"] == 2000
    m, _ = load_scenario(CONFIGS / "multi_cell.yaml")
    assert m.n_enb == 7


def test_generate_block_matches_direct_generation():
    s, _ = scenario_from_dict({"rng_seed": 4, "generate": {"n_ue": 3, "m_ap": 2}})
    np.testing.assert_array_equal(s.ue_positions, generate_uniform(3, 2, seed=4).ue_positions)


def test_link_config_file():
    cfgs = load_link_configs(CONFIGS / "fig3_budget.csv")
    assert cfgs["conventional"].cell_ue == [10.0] * 24
    assert cfgs["hybrid_direct"].cell_ap == [5.0] * 12
    assert cfgs["ue_phase2"].wlan == [10.0] * 12
    assert cfgs["ap_phase1"].desired == 1e4


@pytest.mark.parametrize(
    "body",
    [
        "path,role,count\nconventional,desired,1\n",
        "path,role,count,mean\nrelay,desired,1,1.0\n",
        "path,role,count,mean\nconventional,jammer,1,1.0\n",
        "path,role,count,mean\nconventional,cell_ue,1,-1.0\n",
    ],
)
def test_link_config_errors(tmp_path, body):
    p = tmp_path / "bad.csv"
    p.write_text(body)
    with pytest.raises(ValueError):
        load_link_configs(p)
