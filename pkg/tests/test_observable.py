import numpy as np
import pytest

from qsot import observable as obs
from qsot.errors import BadIndex, NotHermitian


def test_spectral_projectors_pauli_z():
    (l0, p0), (l1, p1) = obs.spectral_projectors(obs.pauli(3))
    assert (l0, l1) == pytest.approx((1.0, -1.0))
    np.testing.assert_allclose(p0, np.diag([1, 0]), atol=1e-14)
    np.testing.assert_allclose(p1, np.diag([0, 1]), atol=1e-14)


def test_spectral_projectors_identity_is_one_cluster():
    proj = obs.spectral_projectors(obs.pauli(0))
    assert len(proj) == 1
    np.testing.assert_allclose(proj[0][1], np.eye(2), atol=1e-14)


def test_spectral_projectors_pauli_x():
    x = obs.pauli_matrix(1)
    (lp, pp), (lm, pm) = obs.spectral_projectors(x)
    np.testing.assert_allclose(pp, (np.eye(2) + x) / 2, atol=1e-14)
    np.testing.assert_allclose(pm, (np.eye(2) - x) / 2, atol=1e-14)


@pytest.mark.parametrize("d", [2, 3, 5, 8])
def test_projector_algebra_random(d):
    rng = np.random.default_rng(d)
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    # force a degenerate cluster
    u, _ = np.linalg.qr(a)
    w = np.round(rng.normal(size=d))
    m = u @ np.diag(w) @ u.conj().T
    proj = obs.spectral_projectors(m)
    np.testing.assert_allclose(sum(p for _, p in proj), np.eye(d), atol=1e-9)
    for i, (_, p) in enumerate(proj):
        np.testing.assert_allclose(p @ p, p, atol=1e-9)
        for _, q in proj[i + 1:]:
            np.testing.assert_allclose(p @ q, 0, atol=1e-9)
    np.testing.assert_allclose(sum(lam * p for lam, p in proj), m, atol=1e-9)
    assert len(proj) == len(set(w))


def test_light_touch_classification():
    for k in range(4):
        assert obs.is_light_touch(obs.pauli(k))
    assert not obs.is_light_touch(np.diag([1.0, -1.0, 0.0]))
    assert obs.is_light_touch(3 * obs.pauli_matrix(1))
    assert not obs.is_light_touch(np.diag([1.0, 0.0]))


def test_dichotomic_classification():
    assert obs.is_dichotomic(obs.pauli(3))
    assert not obs.is_dichotomic(obs.pauli(0))
    v = np.array([1, 1j, 0]) / np.sqrt(2)
    o = 2 * (np.outer(v, v.conj()) + np.diag([0, 0, 1])) - np.eye(3)
    assert obs.is_dichotomic(o)


def test_dichotomic_equals_two_p_minus_one():
    rng = np.random.default_rng(0)
    u, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
    o = u @ np.diag([1.0, 1.0, -1.0, -1.0]) @ u.conj().T
    (lam, p), _ = obs.spectral_projectors(o)
    assert lam == pytest.approx(1.0)
    np.testing.assert_allclose(o, 2 * p - np.eye(4), atol=1e-10)


def test_pauli_matrices():
    np.testing.assert_array_equal(obs.pauli(0).mat, np.eye(2))
    np.testing.assert_array_equal(obs.pauli(3).mat, np.diag([1, -1]))
    np.testing.assert_array_equal(obs.pauli(2).mat, np.array([[0, -1j], [1j, 0]]))
    with pytest.raises(BadIndex):
        obs.pauli(4)
    assert obs.pauli_from_label("y") == obs.pauli(2)


def test_observable_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        obs.Observable(np.array([[0, 1], [0, 0]]))


def test_light_touch_basis_qubit_is_pauli():
    basis = obs.light_touch_basis(2)
    for k, element in enumerate(basis):
        np.testing.assert_allclose(element.mat, obs.pauli_matrix(k), atol=1e-14)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_light_touch_basis_spans(d):
    basis = obs.light_touch_basis(d)
    assert len(basis) == d * d
    assert all(obs.is_light_touch(e) for e in basis)
    assert abs(np.linalg.det(basis.gram())) > 1e-9
    rng = np.random.default_rng(d)
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    h = a + a.conj().T
    coeffs = basis.coefficients(h)
    np.testing.assert_allclose(sum(c * e.mat for c, e in zip(coeffs, basis)), h, atol=1e-8)


def test_light_touch_basis_qutrit_shape():
    basis = obs.light_touch_basis(3)
    np.testing.assert_allclose(basis.elements[0].mat, np.eye(3))
    assert all(obs.is_dichotomic(e) for e in basis.elements[1:])


def test_bloch_round_trip():
    r = [0.1, -0.2, 0.3]
    np.testing.assert_allclose(obs.bloch_vector(obs.bloch_state(r)), r, atol=1e-15)


def test_observable_json():
    o = obs.observable_from_json(obs.observable_to_json(obs.pauli(2)))
    np.testing.assert_array_equal(o.mat, obs.pauli(2).mat)
    assert obs.observable_from_json("Z") == obs.pauli(3)
