import math

import numpy as np
import pytest

from cotether.dist import FormAIID, FormAIND, FormBIID, FormBIND, MaxOf, MinOf
from cotether.metrics import (
    MODULATIONS,
    CapacityParams,
    ModulationParams,
    abep,
    capacity_upper_bound,
    ergodic_capacity,
    mean_sinr,
    moment,
    outage_probability,
)
from cotether.montecarlo import EmpiricalDist, estimate_metrics

DBPSK = MODULATIONS["dbpsk"]


# -- frozen oracles ------------------------------------------------------------

def test_mean_single_interferer_oracle():
    # E[Y E1 / (1 + E2)] = e E1(1) for unit means
    assert mean_sinr(FormAIID(1, 1.0, 1.0)) == pytest.approx(0.596347362323194074, rel=1e-12)


def test_form_a_iid_oracles():
    d = FormAIID(2, 10.0, 1.0)
    assert abep(d, DBPSK) == pytest.approx(0.111297837319027279, rel=1e-12)
    assert mean_sinr(d) == pytest.approx(4.036526376768059257, rel=1e-12)
    assert ergodic_capacity(d) == pytest.approx(1.879079670848949781, rel=1e-8)


def test_no_interference_closed_forms():
    d = FormAIID(0, 7.0, 1.0)
    assert abep(d, DBPSK) == pytest.approx(0.5 / 8.0, rel=1e-15)
    assert mean_sinr(d) == 7.0


# -- closed form / T-solver assembly versus quadrature of the definition --------

RANDOM_SUITE = [
    FormAIID(int(x), float(y), float(z))
    for x, y, z in zip([1, 2, 4, 12, 24, 3], [0.5, 10, 300, 1e3, 1e4, 2.0], [0.1, 1.0, 10.0, 3.0, 50.0, 0.4])
]


@pytest.mark.parametrize("d", RANDOM_SUITE, ids=lambda d: f"X{d.X}")
@pytest.mark.parametrize("modulation", sorted(MODULATIONS))
def test_closed_abep_matches_quadrature(d, modulation):
    m = MODULATIONS[modulation]
    assert abep(d, m, "closed") == pytest.approx(abep(d, m, "quad"), rel=1e-6)


@pytest.mark.parametrize("d", RANDOM_SUITE, ids=lambda d: f"X{d.X}")
def test_closed_mean_matches_quadrature(d):
    assert mean_sinr(d, "closed") == pytest.approx(mean_sinr(d, "quad"), rel=1e-6)


TERM_SUITE = [
    FormAIID(3, 20.0, 1.5),
    FormAIND(20.0, (0.5, 1.2, 3.0)),
    FormBIID(2, 3, 50.0, 0.8, 2.5),
    FormBIND(50.0, (0.7, 2.0), (1.1, 4.0)),
    MinOf(FormAIID(2, 30.0, 1.0), FormAIND(10.0, (0.4, 0.9))),
    MaxOf(FormBIID(1, 2, 5.0, 0.5, 1.5), FormAIID(4, 8.0, 0.6)),
]


@pytest.mark.parametrize("d", TERM_SUITE, ids=lambda d: type(d).__name__)
def test_term_assembly_matches_quadrature(d):
    assert abep(d, DBPSK, "terms") == pytest.approx(abep(d, DBPSK, "quad"), rel=1e-6)
    assert moment(d, 1, "terms") == pytest.approx(moment(d, 1, "quad"), rel=1e-6)
    assert moment(d, 2, "terms") == pytest.approx(moment(d, 2, "quad"), rel=1e-6)


# -- structural properties -------------------------------------------------------

@pytest.mark.parametrize("d", RANDOM_SUITE + TERM_SUITE)
def test_jensen_bound(d):
    assert capacity_upper_bound(d) >= ergodic_capacity(d)


def test_capacity_hop_scaling():
    d = FormAIID(3, 100.0, 1.0)
    one = ergodic_capacity(d, CapacityParams(NH=1))
    assert ergodic_capacity(d, CapacityParams(NH=2)) == pytest.approx(one / 2, rel=1e-14)
    assert capacity_upper_bound(d, CapacityParams(NH=2)) == pytest.approx(capacity_upper_bound(d) / 2, rel=1e-14)


def test_outage_monotone_in_threshold():
    d = FormBIID(4, 2, 100.0, 2.0, 5.0)
    op = outage_probability(d, np.logspace(-3, 3, 100))
    assert np.all(np.diff(op) >= 0)


def test_abep_monotone_in_signal():
    vals = [abep(FormAIID(3, y, 1.0), DBPSK) for y in np.logspace(-1, 4, 20)]
    assert np.all(np.diff(vals) < 0)


def test_metrics_match_monte_carlo():
    d = FormBIND(30.0, (0.7, 2.0), (1.1, 4.0))
    e = EmpiricalDist(d.sample(400_000, np.random.default_rng(11)))
    est = estimate_metrics(e, DBPSK, CapacityParams(), 1.0)
    assert abs(est.abep - abep(d, DBPSK)) < 4 * est.abep_se
    assert abs(est.mean_sinr - mean_sinr(d)) < 4 * est.mean_sinr_se
    assert abs(est.capacity - ergodic_capacity(d)) < 4 * est.capacity_se
    assert abs(est.op - float(outage_probability(d, 1.0))) < 4 * est.op_se


# -- validation --------------------------------------------------------------------

def test_parameter_validation():
    with pytest.raises(ValueError):
        ModulationParams(0.0, 1.0)
    with pytest.raises(ValueError):
        ModulationParams(0.5, -1.0)
    with pytest.raises(ValueError):
        CapacityParams(NH=0)
    with pytest.raises(ValueError):
        outage_probability(FormAIID(1, 1.0, 1.0), -1.0)


def test_closed_form_restricted_to_form_a_iid():
    d = FormAIND(1.0, (1.0, 2.0))
    with pytest.raises(ValueError):
        abep(d, DBPSK, "closed")
    with pytest.raises(ValueError):
        mean_sinr(d, "closed")
    with pytest.raises(ValueError):
        abep(d, DBPSK, "series")


def test_modulation_presets():
    assert MODULATIONS["dbpsk"] == ModulationParams(0.5, 1.0)
    assert MODULATIONS["ncfsk"] == ModulationParams(0.5, 0.5)
    assert math.isclose(abep(FormAIID(0, 1.0, 1.0), MODULATIONS["ncfsk"]), 0.5 / 1.5)


def test_term_assembly_without_partial_fraction_cancellation():
    # weak signal under many interferers with close means; 30-digit references
    d = FormBIID(12, 1, 0.12576324774667158, 0.7225785669228689, 0.8054361745130276)
    assert abep(d, DBPSK, "terms") == pytest.approx(0.4936869785073108, rel=1e-12)
    assert moment(d, 1, "terms") == pytest.approx(0.012798699797223175, rel=1e-12)
