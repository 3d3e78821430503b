import math

import numpy as np
import pytest
from scipy import stats

from sarbias import (DurationModelParams, EstimationError, SourceKind,
                     SymptomModelParams, TransmissionMode, UnitConfig,
                     sample_primary, simulate_unit, true_ve_sar)
from sarbias.estimands import invert_target_to_nu, symptom_prompted_target_mu


def rng_for(seed):
    return np.random.default_rng(seed)


def simulate_many(cfg, n, seed):
    rng = rng_for(seed)
    return [simulate_unit(cfg, rng) for _ in range(n)]


class TestSamplePrimary:
    def test_never_vaccinated_when_p_zero(self):
        cfg = UnitConfig(p_primary_vaccinated=0.0)
        rng = rng_for(1)
        assert not any(sample_primary(cfg, rng)[0].vaccinated for _ in range(200))

    def test_vaccinated_symptomatic_fraction(self):
        # Defaults: lambda * rho = 0.1 among vaccinated primaries.
        cfg = UnitConfig(p_primary_vaccinated=1.0)
        rng = rng_for(2)
        n = 30_000
        sympt = sum(sample_primary(cfg, rng)[1].symptomatic for _ in range(n))
        p_hat = sympt / n
        se = math.sqrt(0.1 * 0.9 / n)
        assert abs(p_hat - 0.1) <= 3 * se

    def test_lambda_one_equalizes_arms(self):
        cfg = UnitConfig(symptom=SymptomModelParams(lambda_symptom=1.0))
        rng = rng_for(3)
        table = np.zeros((2, 2), dtype=int)
        for _ in range(100_000):
            person, infection = sample_primary(cfg, rng)
            table[int(person.vaccinated), int(infection.symptomatic)] += 1
        _, p_value, _, _ = stats.chi2_contingency(table)
        assert p_value > 0.001

    def test_duration_within_support(self):
        cfg = UnitConfig(p_primary_vaccinated=1.0)
        rng = rng_for(4)
        d = cfg.duration
        for _ in range(500):
            _, inf = sample_primary(cfg, rng)
            assert d.rho1 - d.c <= inf.duration_days <= d.rho1 + d.c

    def test_onset_only_when_symptomatic(self):
        cfg = UnitConfig()
        rng = rng_for(5)
        for _ in range(500):
            _, inf = sample_primary(cfg, rng)
            assert (inf.symptom_onset_time is not None) == inf.symptomatic


class TestSimulateUnit:
    def test_no_transmission_leaves_only_primary(self):
        # nu = 0 with a vaccinated primary shuts transmission off entirely.
        cfg = UnitConfig(p_primary_vaccinated=1.0,
                         symptom=SymptomModelParams(nu=0.0))
        for unit in simulate_many(cfg, 300, 6):
            assert len(unit.infections) == 1
            assert unit.infections[0].source_kind is SourceKind.PRIMARY

    def test_bernoulli_mean_infected_contacts(self):
        # delta = nu = lambda = 1, tau = 0.3, 3 contacts: Binomial(3, 0.3).
        cfg = UnitConfig(symptom=SymptomModelParams(lambda_symptom=1.0,
                                                    delta=1.0, nu=1.0, tau=0.3))
        units = simulate_many(cfg, 20_000, 7)
        mean = np.mean([u.primary_sourced_transmissions() for u in units])
        se = math.sqrt(3 * 0.3 * 0.7 / len(units))
        assert abs(mean - 0.9) <= 3 * se

    @pytest.mark.parametrize("vaccinated", [False, True])
    def test_per_day_hazard_marginal(self, vaccinated):
        # P(T per contact) = tau_v * rho_v under the linear hazard model.
        cfg = UnitConfig(unit_size=2, p_primary_vaccinated=float(vaccinated),
                         transmission_mode=TransmissionMode.PER_DAY_HAZARD)
        units = simulate_many(cfg, 40_000, 8 + int(vaccinated))
        d = cfg.duration
        expect = d.daily_hazard(vaccinated) * d.mean_duration(vaccinated)
        p_hat = np.mean([u.primary_sourced_transmissions() for u in units])
        se = math.sqrt(expect * (1 - expect) / len(units))
        assert abs(p_hat - expect) <= 3 * se

    def test_acquisition_inside_source_window(self):
        cfg = UnitConfig(symptom=SymptomModelParams(tau=0.9, delta=1.0, nu=1.0),
                         contact_to_contact=True, community_daily_hazard=0.01)
        for unit in simulate_many(cfg, 400, 9):
            by_person = {inf.person_id: inf for inf in unit.infections}
            for inf in unit.infections:
                if inf.source_kind is SourceKind.CONTACT:
                    src = by_person[inf.source_id]
                    assert src.acquisition_time <= inf.acquisition_time
                    assert inf.acquisition_time < (src.acquisition_time
                                                   + src.duration_days)

    def test_no_person_infected_twice_and_conservation(self):
        cfg = UnitConfig(symptom=SymptomModelParams(tau=0.8),
                         contact_to_contact=True, community_daily_hazard=0.05)
        for unit in simulate_many(cfg, 400, 10):
            ids = [inf.person_id for inf in unit.infections]
            assert len(ids) == len(set(ids))
            assert len(unit.infections) <= len(unit.persons)

    def test_sources_form_forest_rooted_at_primary_or_community(self):
        cfg = UnitConfig(symptom=SymptomModelParams(tau=0.8),
                         contact_to_contact=True, community_daily_hazard=0.05)
        for unit in simulate_many(cfg, 300, 11):
            by_person = {inf.person_id: inf for inf in unit.infections}
            for inf in unit.infections:
                hops = 0
                node = inf
                while node.source_kind is SourceKind.CONTACT:
                    node = by_person[node.source_id]
                    hops += 1
                    assert hops <= len(unit.persons)
                assert node.source_kind in (SourceKind.PRIMARY, SourceKind.COMMUNITY)
            assert sum(1 for i in unit.infections
                       if i.source_kind is SourceKind.PRIMARY) == 1

    def test_all_sources_primary_without_chains_or_community(self):
        cfg = UnitConfig(symptom=SymptomModelParams(tau=0.9))
        for unit in simulate_many(cfg, 300, 12):
            for inf in unit.infections:
                if inf.source_kind is not SourceKind.PRIMARY:
                    assert inf.source_kind is SourceKind.CONTACT
                    assert inf.source_id == unit.primary_id

    def test_contact_chains_reach_second_generation(self):
        cfg = UnitConfig(unit_size=6, contact_to_contact=True,
                         symptom=SymptomModelParams(tau=0.9, delta=1.0, nu=1.0))
        units = simulate_many(cfg, 300, 13)
        second_gen = any(
            inf.source_kind is SourceKind.CONTACT and inf.source_id != u.primary_id
            for u in units for inf in u.infections)
        assert second_gen

    def test_community_infections_within_followup(self):
        cfg = UnitConfig(community_daily_hazard=0.03, followup_days=30.0,
                         symptom=SymptomModelParams(nu=0.0),
                         p_primary_vaccinated=1.0)
        units = simulate_many(cfg, 600, 14)
        community = [inf for u in units for inf in u.infections
                     if inf.source_kind is SourceKind.COMMUNITY]
        assert community
        assert all(0.0 < inf.acquisition_time < 30.0 for inf in community)

    def test_contact_slots_exchangeable(self):
        cfg = UnitConfig(symptom=SymptomModelParams(tau=0.4))
        units = simulate_many(cfg, 20_000, 15)
        counts = np.zeros(3)
        for unit in units:
            for inf in unit.infections:
                if inf.person_id > 0:
                    counts[inf.person_id - 1] += 1
        _, p_value = stats.chisquare(counts)
        assert p_value > 0.001

    def test_same_seed_reproduces_unit(self):
        cfg = UnitConfig(contact_to_contact=True, community_daily_hazard=0.02)
        a = simulate_unit(cfg, rng_for(99))
        b = simulate_unit(cfg, rng_for(99))
        assert a == b


class TestTrueVeSar:
    def test_inert_vaccine_ve_near_zero(self):
        cfg = UnitConfig(symptom=SymptomModelParams(lambda_symptom=1.0,
                                                    delta=1.0, nu=1.0, tau=0.3))
        ve = true_ve_sar(simulate_many(cfg, 20_000, 16))
        assert abs(ve) < 0.04

    def test_nu_zero_gives_ve_one(self):
        cfg = UnitConfig(symptom=SymptomModelParams(lambda_symptom=1.0, nu=0.0))
        ve = true_ve_sar(simulate_many(cfg, 3_000, 17))
        assert ve == 1.0

    def test_closes_loop_with_inverted_target(self):
        nu = invert_target_to_nu(0.5, 0.2, 0.5, 0.5)
        s = SymptomModelParams(nu=nu)
        assert 1.0 - symptom_prompted_target_mu(s) == pytest.approx(0.5, abs=1e-12)
        cfg = UnitConfig(symptom=s)
        ve = true_ve_sar(simulate_many(cfg, 40_000, 18))
        assert abs(ve - 0.5) < 0.03

    def test_errors(self):
        cfg = UnitConfig(p_primary_vaccinated=1.0)
        units = simulate_many(cfg, 50, 19)
        with pytest.raises(EstimationError, match="insufficient data"):
            true_ve_sar(units)
        quiet = UnitConfig(p_primary_vaccinated=0.5,
                           symptom=SymptomModelParams(nu=1.0, tau=0.01,
                                                      delta=0.0, rho_symptom=0.0))
        # rho=0 and delta=0: nobody transmits, so the unvaccinated SAR is 0.
        units = simulate_many(quiet, 200, 20)
        with pytest.raises(EstimationError, match="undefined VE"):
            true_ve_sar(units)


class TestTransmissionModes:
    def test_exact_mode_probability_below_linear(self):
        # 1 - exp(-x) < x: the exact mode must infect slightly less often.
        base = dict(unit_size=2, p_primary_vaccinated=0.0,
                    duration=DurationModelParams(tau0=0.04, rho0=14.0,
                                                 rho1=8.0, c=7.0))
        linear = UnitConfig(transmission_mode=TransmissionMode.PER_DAY_HAZARD, **base)
        exact = UnitConfig(transmission_mode=TransmissionMode.PER_DAY_HAZARD_EXACT,
                           **base)
        p_lin = np.mean([u.primary_sourced_transmissions()
                         for u in simulate_many(linear, 30_000, 21)])
        p_exa = np.mean([u.primary_sourced_transmissions()
                         for u in simulate_many(exact, 30_000, 22)])
        assert p_lin == pytest.approx(0.04 * 14.0, abs=0.01)
        assert p_exa < p_lin

    def test_bad_config_rejected(self):
        with pytest.raises(ValueError):
            UnitConfig(unit_size=1)
        with pytest.raises(ValueError):
            UnitConfig(p_primary_vaccinated=1.5)
        with pytest.raises(ValueError):
            UnitConfig(community_daily_hazard=-0.1)
