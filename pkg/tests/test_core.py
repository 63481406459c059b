import numpy as np
import pytest

from quadiag.core import (
    BosonForm,
    CoordForm,
    FermionForm,
    Metric,
    PairingForm,
    QuadiagError,
    SizeMismatch,
    StructuralViolation,
    Tolerances,
    assemble_coefficient_matrix,
    form_kind,
    metric_for,
    metric_matrix,
)


def test_boson_single_squeeze_coefficient_matrix():
    cm = assemble_coefficient_matrix(BosonForm([[5]], [[3]]))
    np.testing.assert_array_equal(cm.m, [[5, 3], [3, 5]])
    assert cm.offset == -2.5


def test_fermion_single_mode_coefficient_matrix():
    a = 1.7
    cm = assemble_coefficient_matrix(FermionForm([[a]], [[0]]))
    np.testing.assert_array_equal(cm.m, [[a, 0], [0, -a]])
    assert cm.offset == pytest.approx(a / 2)


def test_oscillator_coefficient_matrix():
    m, w = 2.0, 3.0
    cm = assemble_coefficient_matrix(CoordForm([[1 / m]], [[m * w ** 2]]))
    np.testing.assert_allclose(cm.m, np.diag([1 / m, m * w ** 2]))
    assert cm.offset == 0


def test_pairing_layouts_and_offsets():
    bose = assemble_coefficient_matrix(PairingForm([[3]], [[1]], [[2]], "boson"))
    np.testing.assert_array_equal(bose.m, [[3, 2], [2, 1]])
    assert bose.offset == -1
    fermi = assemble_coefficient_matrix(PairingForm([[3]], [[1]], [[2]], "fermion"))
    np.testing.assert_array_equal(fermi.m, [[3, 2], [2, -1]])
    assert fermi.offset == 1


def test_pairing_uses_epsilon_transpose():
    eps = np.array([[1, 2j], [-2j, 3]])
    cm = assemble_coefficient_matrix(PairingForm(np.eye(2), eps, np.zeros((2, 2))))
    np.testing.assert_array_equal(cm.m[2:, 2:], eps.T)


def test_assembled_matrices_are_hermitian():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    a = a + a.conj().T
    g = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    for form in (BosonForm(a, g + g.T), FermionForm(a, g - g.T), PairingForm(a, a, g)):
        m = assemble_coefficient_matrix(form).m
        assert np.array_equal(m, m.conj().T)


@pytest.mark.parametrize("alpha, gamma, cls", [
    ([[1, 2], [3, 1]], np.zeros((2, 2)), BosonForm),
    ([[1, 0], [0, 1]], [[0, 1], [2, 0]], BosonForm),
    ([[1, 0], [0, 1]], [[0, 1], [1, 0]], FermionForm),
])
def test_structural_violations(alpha, gamma, cls):
    with pytest.raises(StructuralViolation):
        cls(alpha, gamma)


def test_zero_forms_rejected():
    with pytest.raises(StructuralViolation):
        BosonForm([[0]], [[0]])
    with pytest.raises(StructuralViolation):
        FermionForm(np.zeros((2, 2)), np.zeros((2, 2)))


def test_size_mismatch():
    with pytest.raises(SizeMismatch):
        BosonForm(np.eye(2), np.zeros((3, 3)))


def test_non_finite_rejected():
    with pytest.raises(QuadiagError):
        BosonForm([[np.nan]], [[0]])


def test_coord_form_must_be_real():
    with pytest.raises(StructuralViolation):
        CoordForm([[1j]], [[1]])


def test_inputs_symmetrized_and_frozen():
    eps = 1e-14
    form = BosonForm([[1, 0.5 + eps], [0.5, 2]], np.zeros((2, 2)))
    assert np.array_equal(form.alpha, form.alpha.conj().T)
    with pytest.raises(ValueError):
        form.alpha[0, 0] = 3


def test_signature_validation():
    BosonForm(np.eye(2), np.zeros((2, 2)), signature=[1, -1])
    with pytest.raises(QuadiagError):
        BosonForm(np.eye(2), np.zeros((2, 2)), signature=[1, 2])


def test_form_kind():
    assert form_kind(BosonForm([[1]], [[0]])) == "boson"
    assert form_kind(FermionForm([[1]], [[0]])) == "fermion"
    assert form_kind(PairingForm([[1]], [[1]], [[0]], "boson")) == "pairing-bose"
    assert form_kind(PairingForm([[1]], [[1]], [[0]], "fermion")) == "pairing-fermi"
    assert form_kind(CoordForm([[1]], [[1]])) == "coord"


def test_metric_examples():
    np.testing.assert_array_equal(metric_matrix(Metric("Iminus", 2)), np.diag([1, -1]))
    np.testing.assert_array_equal(metric_matrix(Metric("SigmaY", 2)), [[0, -1j], [1j, 0]])
    g = metric_matrix(Metric("DiagSignature", 6, [1, 1, -1]))
    np.testing.assert_array_equal(np.diag(g).real, [1, 1, -1, -1, -1, 1])


@pytest.mark.parametrize("metric", [
    Metric("Iplus", 4), Metric("Iminus", 4), Metric("SigmaY", 4), Metric("DiagSignature", 4, [1, -1]),
])
def test_metric_involutive_and_hermitian(metric):
    g = metric_matrix(metric)
    np.testing.assert_allclose(g @ g, np.eye(4))
    np.testing.assert_array_equal(g, g.conj().T)


def test_metric_for_forms():
    assert metric_for(BosonForm([[1]], [[0]])).kind == "Iminus"
    assert metric_for(BosonForm(np.eye(2), np.zeros((2, 2)), [1, -1])).kind == "DiagSignature"
    assert metric_for(FermionForm([[1]], [[0]])).kind == "Iplus"
    assert metric_for(CoordForm([[1]], [[1]])).kind == "SigmaY"


def test_tolerance_scale_from_env(monkeypatch):
    monkeypatch.setenv("QUADIAG_TOL_SCALE", "10")
    tol = Tolerances.from_env(real=1e-6)
    assert tol.get("real") == pytest.approx(1e-5)
    assert tol.get("rank") == pytest.approx(1e-7)
    monkeypatch.setenv("QUADIAG_TOL_SCALE", "-1")
    with pytest.raises(QuadiagError):
        Tolerances.from_env()
