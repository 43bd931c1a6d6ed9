import logging

import numpy as np
import pytest

from qstoch.exceptions import ValidationError
from qstoch.povm_catalog import (
    PovmFamily, computational_basis_povm, trivial_quasi_povm,
)
from qstoch.quantum import identity_channel
from qstoch.representation import transition_matrix
from qstoch.utils import report_from_json
from qstoch.verify import (
    LawReport, Verdict, check_commutant, check_convexity, check_dagger, check_faithfulness,
    check_functoriality, check_monoidal, check_naturality, dagger_residual, dichotomy_report,
    orbit_span_rank, run_trials,
)


class TestFunctoriality:
    @pytest.mark.parametrize("dims", [(2, 2, 2), (2, 3, 2)])
    def test_sic_family(self, sic_family, dims):
        report = check_functoriality(sic_family, dims, trials=100, seed=1)
        assert report.passed
        assert report.trials == 100
        assert report.max_residual < 1e-9

    def test_random_family(self, random_family):
        assert check_functoriality(random_family, (3, 2, 3), trials=20, seed=2).passed

    def test_nonminimal_family_rejected(self, six_state):
        with pytest.raises(ValidationError):
            check_functoriality(six_state, (2, 2, 2), trials=1)

    def test_trivial_family_is_constant_functor(self):
        povm = trivial_quasi_povm(2, [0.25] * 4)
        report = check_functoriality(povm, (2, 2, 2), trials=5, seed=3)
        assert report.passed
        assert report.max_residual < 1e-12

    def test_reports_are_reproducible(self, sic_family):
        first = check_functoriality(sic_family, trials=10, seed=9)
        second = check_functoriality(sic_family, trials=10, seed=9)
        assert first.details == second.details


class TestMonoidal:
    def test_pair(self, sic_family):
        report = check_monoidal(sic_family, (2, 2), trials=10, seed=3)
        assert report.passed
        assert report.tolerance == 1e-9
        assert set(report.components) == {'state', 'naturality'}

    def test_mixed_dimensions(self, random_family):
        assert check_monoidal(random_family, (2, 3), trials=5, seed=4).passed

    def test_triple_includes_coherence(self, sic_family):
        report = check_monoidal(sic_family, (2, 2, 2), trials=3, seed=5)
        assert report.passed
        assert report.tolerance == 1e-8
        assert report.components['coherence'] < 1e-8

    def test_missing_product_dimension(self, tetra):
        with pytest.raises(ValidationError):
            check_monoidal({2: tetra}, (2, 2), trials=1)

    def test_bad_arity(self, sic_family):
        with pytest.raises(ValidationError):
            check_monoidal(sic_family, (2,), trials=1)


class TestNaturality:
    def test_between_families(self, sic_family, random_family):
        report = check_naturality(sic_family, random_family, (2, 3), trials=20, seed=6)
        assert report.passed
        assert report.components['inverse'] < 1e-9

    def test_same_family(self, tetra):
        assert check_naturality(tetra, tetra, (2, 2), trials=5, seed=6).max_residual < 1e-12


class TestDagger:
    def test_tetrahedron_preserves_dagger(self, tetra):
        report = check_dagger(tetra, 2, trials=50, seed=7, tol=1e-9)
        assert report.passed
        assert report.extra['sic_form'] == pytest.approx([1 / 3, 1 / 6])
        assert report.components['functor_q'] < 1e-9

    def test_qutrit_sic_preserves_dagger(self, qutrit_sic):
        assert check_dagger(qutrit_sic, 3, trials=10, seed=7).passed

    def test_random_family_breaks_dagger(self, random_ic2):
        report = check_dagger(random_ic2, 2, trials=10, seed=7)
        assert not report.passed
        assert report.extra['sic_form'] is None

    def test_identity_channel(self, random_ic2):
        phi = identity_channel(2)
        assert dagger_residual(random_ic2, phi, composite=True) < 1e-12
        # T 对称当且仅当迹相等
        assert dagger_residual(random_ic2, phi, composite=False) > 1e-9


class TestCommutant:
    def test_sic_form_commutes(self, tetra):
        assert check_commutant(transition_matrix(tetra), trials=20, seed=1).passed

    def test_random_does_not_commute(self, random_ic2):
        assert not check_commutant(transition_matrix(random_ic2), trials=20, seed=1).passed


class TestFaithfulness:
    def test_minimal_family_is_faithful(self, tetra):
        report = check_faithfulness(tetra, 2, trials=100, seed=2)
        assert report.passed
        assert report.components['min_separation'] > 1e-6

    def test_trivial_family_is_not(self):
        povm = trivial_quasi_povm(2, [0.25] * 4)
        report = check_faithfulness(povm, 2, trials=10, seed=2)
        assert not report.passed
        assert report.components['min_separation'] < 1e-12


class TestConvexity:
    def test_four_weights(self, sic_family):
        report = check_convexity(sic_family, (2, 3), seed=3)
        assert report.trials == 4
        assert report.passed


class TestDichotomy:
    def test_orbit_of_identity(self):
        assert orbit_span_rank(2, [np.eye(2)], 10, seed=0) == 1

    def test_orbit_of_projector_spans_everything(self):
        assert orbit_span_rank(2, [np.eye(2), np.diag([1.0, 0.0])], 10, seed=0) == 4

    def test_orbit_rank_is_monotone(self):
        seeds = [np.eye(3), np.diag([1.0, 0.0, 0.0])]
        ranks = [orbit_span_rank(3, seeds, samples, seed=4) for samples in (1, 2, 4, 8)]
        assert ranks == sorted(ranks)
        assert ranks[-1] == 9

    def test_sic_is_faithful(self, tetra):
        report = dichotomy_report(tetra)
        assert report.verdict is Verdict.FAITHFUL
        assert report.strong_monoidal is True
        assert report.dagger_preserving is True

    def test_random_ic_is_not_dagger(self, random_ic2):
        report = dichotomy_report(random_ic2)
        assert report.verdict is Verdict.FAITHFUL
        assert report.dagger_preserving is False

    def test_nonminimal_is_not_strong_monoidal(self, six_state):
        assert dichotomy_report(six_state).strong_monoidal is False

    def test_trivial(self):
        report = dichotomy_report(trivial_quasi_povm(2, [0.1, 0.9]))
        assert report.verdict is Verdict.TRIVIAL
        assert report.strong_monoidal is None

    def test_violates_premises(self):
        report = dichotomy_report(computational_basis_povm(2))
        assert report.verdict is Verdict.VIOLATES_PREMISES
        assert report.to_dict()['verdict'] == 'violates dichotomy premises'


class TestReports:
    def test_passed_is_strict(self):
        report = LawReport.from_residuals('law', [0.1, 0.2], tolerance=0.2, seed=0)
        assert not report.passed
        assert report.mean_residual == pytest.approx(0.15)

    def test_json_round_trip(self, tetra):
        report = check_dagger(tetra, 2, trials=3, seed=1)
        assert report_from_json(report.to_dict()) == report

    def test_parallel_matches_serial(self, sic_family):
        serial = check_functoriality(sic_family, trials=8, seed=4, workers=1)
        parallel = check_functoriality(sic_family, trials=8, seed=4, workers=3)
        assert serial.details == parallel.details

    def test_run_trials_order(self):
        results = run_trials(lambda rng: float(rng.random()), 6, seed=1, workers=2)
        assert results == run_trials(lambda rng: float(rng.random()), 6, seed=1, workers=1)

    def test_logs_one_line_per_law(self, tetra, caplog, monkeypatch):
        monkeypatch.setattr(logging.getLogger('qstoch'), 'propagate', True)
        with caplog.at_level(logging.INFO, logger='qstoch'):
            check_dagger(tetra, 2, trials=2, seed=1)
        lines = [r for r in caplog.records if r.name == 'qstoch.verify']
        assert len(lines) == 1
        assert 'dagger(2)' in lines[0].getMessage()


def test_sic_family_fixture_is_lazy():
    family = PovmFamily('sic')
    assert family(2).label == "tetrahedron"
