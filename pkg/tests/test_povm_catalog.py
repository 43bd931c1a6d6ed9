import numpy as np
import pytest
from numpy.testing import assert_allclose

from qstoch.exceptions import ConstructionError, DimensionError, GenerationError, ValidationError
from qstoch.matrix_core import eig_hermitian
from qstoch.povm_catalog import (
    PovmFamily, QuasiPovm, as_family, build_povm, computational_basis_povm,
    fit_scaled_identity_plus_ones, hermitian_basis_quasi_povm, product_povm,
    povm_family, random_minimal_ic, tensor_ids, trivial_quasi_povm, unit_povm, wh_sic,
)
from qstoch.representation import transition_matrix
from qstoch.settings import configure


def test_tetrahedron_flags(tetra):
    flags = tetra.flags
    assert flags.positive
    assert flags.informationally_complete
    assert flags.minimal
    assert flags.equal_trace
    assert flags.generalized_sic
    assert flags.sic_alpha == pytest.approx(1 / 6)
    assert flags.sic_beta == pytest.approx(1 / 12)


def test_tetrahedron_gram(tetra):
    expected = np.full((4, 4), 1 / 12) + np.eye(4) / 6
    assert_allclose(tetra.gram, expected, atol=1e-12)


def test_qutrit_sic_overlaps(qutrit_sic):
    assert len(qutrit_sic) == 9
    projectors = [3 * e for e in qutrit_sic.effects]
    for i, a in enumerate(projectors):
        for j, b in enumerate(projectors):
            if i != j:
                assert np.trace(a @ b).real == pytest.approx(1 / 4, abs=1e-10)
    assert qutrit_sic.flags.generalized_sic


def test_wh_sic_qubit_shares_tetrahedron_transition(tetra):
    expected = np.eye(4) / 3 + np.full((4, 4), 1 / 6)
    assert_allclose(transition_matrix(wh_sic(2)).matrix, expected, atol=1e-12)
    assert_allclose(transition_matrix(tetra).matrix, expected, atol=1e-12)


def test_wh_sic_rejects_bad_fiducial():
    with pytest.raises(ConstructionError):
        wh_sic(3, [1, 0, 0])
    with pytest.raises(DimensionError):
        wh_sic(3, [1, 0])


def test_wh_sic_has_no_builtin_fiducial_above_three():
    with pytest.raises(ConstructionError):
        wh_sic(5)


def test_random_minimal_ic_is_seeded(random_ic2):
    again = random_minimal_ic(2, seed=11)
    assert again == random_ic2
    assert again.povm_id == random_ic2.povm_id
    assert random_ic2.flags.minimal
    assert random_ic2.flags.positive
    assert_allclose(sum(random_ic2.effects), np.eye(2), atol=1e-10)


@pytest.mark.parametrize("dim", [2, 3, 4])
def test_random_minimal_ic_dimensions(dim):
    povm = random_minimal_ic(dim, seed=dim)
    assert len(povm) == dim ** 2
    assert povm.flags.minimal


def test_random_minimal_ic_rejects_dim_one():
    with pytest.raises(DimensionError):
        random_minimal_ic(1, seed=0)


def test_random_minimal_ic_exhausts_retries():
    configure(MAX_RETRIES=2, GRAM_TOL=10.0)
    with pytest.raises(GenerationError):
        random_minimal_ic(2, seed=0)


def test_six_state_is_ic_not_minimal(six_state):
    assert six_state.flags.informationally_complete
    assert not six_state.flags.minimal


def test_trivial_family():
    povm = trivial_quasi_povm(2, [0.25, 0.25, 0.5])
    assert not povm.flags.informationally_complete
    assert povm.flags.positive
    with pytest.raises(ValidationError):
        trivial_quasi_povm(2, [0.5, 0.6])


def test_hermitian_basis_is_quasi():
    povm = hermitian_basis_quasi_povm(2)
    assert len(povm) == 4
    assert_allclose(sum(povm.effects), np.eye(2), atol=1e-12)
    assert povm.flags.minimal
    assert not povm.flags.positive
    assert min(eig_hermitian(e).eigenvalues[0] for e in povm.effects) < 0


def test_quasi_povm_rejects_bad_sum():
    with pytest.raises(ValidationError):
        QuasiPovm(2, (np.eye(2), np.eye(2)))


def test_product_povm_identifier(tetra):
    product = product_povm(tetra, tetra)
    assert product.dim == 4
    assert len(product) == 16
    assert product.povm_id == tensor_ids(tetra.povm_id, tetra.povm_id)
    assert_allclose(product.effects[1 * 4 + 2], np.kron(tetra.effects[1], tetra.effects[2]))


def test_unit_and_basis():
    assert unit_povm().flags.minimal
    assert not computational_basis_povm(2).flags.informationally_complete


def test_fit_scaled_identity_plus_ones():
    matrix = 0.3 * np.eye(3) + 0.1 * np.ones((3, 3))
    alpha, beta = fit_scaled_identity_plus_ones(matrix, 1e-12)
    assert alpha == pytest.approx(0.3)
    assert beta == pytest.approx(0.1)
    matrix[0, 1] += 1e-3
    assert fit_scaled_identity_plus_ones(matrix, 1e-9) is None


def test_build_povm_dispatch():
    assert build_povm('sic', 2).label == "tetrahedron"
    assert build_povm('sic', 3).label == "wh-sic-3"
    assert len(build_povm('trivial', 2)) == 4
    with pytest.raises(ValidationError):
        build_povm('nope', 2)


def test_family_caches_and_uses_members(tetra):
    family = PovmFamily('random', seed=3, members={2: tetra})
    assert family(2) is tetra
    assert family(1) == unit_povm()
    assert family(3) is family(3)
    assert family(3).flags.minimal


def test_povm_family_prefers_members(tetra):
    family = povm_family('sic', seed=0, members={2: tetra})
    assert isinstance(family, PovmFamily)
    assert family(2) is tetra
    assert family(3).flags.generalized_sic


def test_strict_family_from_single_povm(tetra):
    family = as_family(tetra)
    assert family(2) is tetra
    with pytest.raises(ValidationError):
        family(3)
