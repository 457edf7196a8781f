"""Mass-pipeline tests.

Frozen numbers come from oracle runs of the lseries routes at two central
cutoffs (10x and 40x the squared half-weight): the assembled value moved by
~1e-12 between them, so the digits asserted here are route-stable.  The
structural zeros at weights 18 and 26 need no oracle: the companion space
is empty and the sum collapses exactly.
"""

import math

import pytest

from heckemass.mass import (
    AverageMassReport,
    average_mass,
    mass,
    mass_basis,
    mass_cached,
    required_precision,
)
from heckemass.qseries import hecke_eigenbasis

BASES = {}


def basis(weight, precision=600):
    got = BASES.get(weight)
    if got is None or got.precision < precision:
        BASES[weight] = hecke_eigenbasis(weight, precision)
    return BASES[weight]


def test_required_precision_floor_and_growth():
    assert required_precision(22) == 6001
    assert required_precision(42) == 2 * 10 * 21 * 21 + 1
    assert required_precision(42) == 8821


def test_weight_22_report_frozen():
    report = mass_cached(mass_basis(22).forms[0])
    assert report.label == "22.0"
    assert report.weight == 22
    assert report.l_three_halves == pytest.approx(0.641764737779, abs=1e-9)
    assert report.l_sym_square == pytest.approx(0.940990211917, abs=1e-9)
    assert set(report.central_values) == {"12.0"}
    assert report.central_values["12.0"] == pytest.approx(0.701523730507, abs=1e-9)
    assert report.mass_value == pytest.approx(0.833831805986, abs=1e-9)
    assert report.scaled_mass == pytest.approx(0.535123850320, abs=1e-9)
    assert 0.0 < report.error_estimate < 1e-10
    assert report.scaled_mass == report.l_three_halves * report.mass_value


def test_cutoff_routes_agree_at_weight_22():
    g = basis(22, 9700).forms[0]
    via_default = mass(g)
    via_wide = mass(g, cutoff_mult=40.0)
    assert via_wide.mass_value == pytest.approx(via_default.mass_value, abs=1e-9)
    # identical sources for the global factors, so those match exactly
    assert via_wide.l_three_halves == via_default.l_three_halves


def test_empty_companion_space_vanishes_exactly():
    for weight in (18, 26):
        report = mass_cached(mass_basis(weight).forms[0])
        assert report.mass_value == 0.0
        assert report.scaled_mass == 0.0
        assert report.central_values == {}
        assert report.error_estimate == 0.0
        # the global factors are still real data for the report
        assert report.l_three_halves > 0
        assert report.l_sym_square > 0


def test_weight_18_global_factor_frozen():
    report = mass_cached(mass_basis(18).forms[0])
    assert report.l_three_halves == pytest.approx(0.4840964607, abs=1e-8)


def test_weight_30_masses_frozen():
    values = {
        r.label: r.mass_value
        for r in (mass_cached(g) for g in mass_basis(30).forms)
    }
    assert values["30.0"] == pytest.approx(0.639977169032, abs=1e-8)
    assert values["30.1"] == pytest.approx(0.487674254719, abs=1e-8)


def test_weight_34_masses_frozen():
    values = {
        r.label: r.mass_value
        for r in (mass_cached(g) for g in mass_basis(34).forms)
    }
    assert values["34.0"] == pytest.approx(0.043781590005, abs=1e-8)
    assert values["34.1"] == pytest.approx(1.210617227268, abs=1e-8)


def test_centrals_nonnegative_and_sign_matches():
    for weight in (22, 30, 34):
        for g in mass_basis(weight).forms:
            report = mass_cached(g)
            for value in report.central_values.values():
                assert value >= -1e-6
            assert report.scaled_mass * report.mass_value >= 0.0


def test_trivial_bound_against_own_factors():
    for weight in (22, 30):
        for g in mass_basis(weight).forms:
            r = mass_cached(g)
            k = weight // 2
            prefactor = (math.pi ** 2 / 15.0) * (12.0 / k) / (
                r.l_three_halves * r.l_sym_square
            )
            ceiling = prefactor * len(r.central_values) * max(
                r.central_values.values()
            )
            assert r.mass_value <= ceiling + 1e-12


def test_average_weight_22_frozen():
    avg = average_mass(22)
    assert isinstance(avg, AverageMassReport)
    assert avg.value == pytest.approx(0.476475317706, abs=1e-9)
    assert float(avg) == avg.value
    assert len(avg.masses) == 1
    assert avg.distance_to_limit == pytest.approx(2.0 - avg.value)
    assert avg.value == pytest.approx(12.0 / 21.0 * avg.masses[0].mass_value)


def test_average_weight_26_is_zero():
    avg = average_mass(26)
    assert avg.value == 0.0
    assert avg.distance_to_limit == 2.0
    assert len(avg.masses) == 1


def test_even_half_weight_rejected_and_override():
    g = hecke_eigenbasis(24, 6001).forms[0]
    with pytest.raises(ValueError, match="2 mod 4"):
        mass(g)
    report = mass(g, allow_even_weight=True)
    # odd companion weight has no level-1 forms: the override yields 0
    assert report.mass_value == 0.0
    assert report.central_values == {}


def test_short_table_rejected():
    g = hecke_eigenbasis(22, 600).forms[0]
    with pytest.raises(ValueError):
        mass(g)
