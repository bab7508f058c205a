import numpy as np
import pytest

from qsot import adc, channel, linalg
from qsot import spacetime as stm
from qsot.errors import DimMismatch, NotLightTouch
from qsot.observable import light_touch_basis, pauli
from qsot.random_ops import classical_channel, random_channel, random_density, random_stochastic, random_unitary

SWAP = np.eye(4)[[0, 2, 1, 3]]


def test_star_identity_maximally_mixed_is_half_swap():
    proc = channel.Process(channel.identity_channel(2), np.eye(2) / 2)
    np.testing.assert_allclose(stm.star(proc).mat, SWAP / 2, atol=1e-15)


def test_star_adc_diagonal_matches_printed_matrix():
    r3, gamma = 0.3, 0.45
    g = np.sqrt(1 - gamma)
    expected = 0.5 * np.array([
        [1 + r3, 0, 0, 0],
        [0, 0, g, 0],
        [0, g, gamma * (1 - r3), 0],
        [0, 0, 0, (1 - gamma) * (1 - r3)],
    ])
    np.testing.assert_allclose(stm.star(adc.adc_process(r3, gamma)).mat, expected, atol=1e-14)


def test_star_adc_general_bloch_vector():
    r1, r2, r3, gamma = 0.2, -0.3, 0.4, 0.6
    rho = 0.5 * np.array([[1 + r3, r1 - 1j * r2], [r1 + 1j * r2, 1 - r3]])
    proc = channel.Process(channel.amplitude_damping(gamma), rho)
    # oracle: direct definition with an explicitly assembled Jamiolkowski matrix
    j = sum(np.kron(linalg.basis_op(2, a, b), proc.channel.apply(linalg.basis_op(2, b, a)))
            for a in range(2) for b in range(2))
    left = np.kron(rho, np.eye(2))
    np.testing.assert_allclose(stm.star(proc).mat, 0.5 * (left @ j + j @ left), atol=1e-14)


def test_star_marginals_random():
    rng = np.random.default_rng(0)
    for d_in, d_out in [(2, 2), (2, 3), (3, 2), (4, 4)]:
        ch = random_channel(d_in, d_out, 3, rng)
        rho = random_density(d_in, rng)
        s = stm.star(channel.Process(ch, rho))
        np.testing.assert_allclose(s.marginal(0), rho, atol=1e-9)
        np.testing.assert_allclose(s.marginal(1), ch.apply(rho), atol=1e-9)
        assert np.trace(s.mat).real == pytest.approx(1.0)
        assert linalg.is_hermitian(s.mat)


def test_star_ls_examples():
    proc = channel.Process(channel.identity_channel(2), np.eye(2) / 2)
    np.testing.assert_allclose(stm.star_ls(proc).mat, SWAP / 2, atol=1e-15)
    r3, gamma = 0.5, 0.5
    ls = stm.star_ls(adc.adc_process(r3, gamma))
    assert ls.expectation(pauli(1), pauli(1)) == pytest.approx(np.sqrt((1 - gamma) * (1 - r3**2)), abs=1e-12)


def test_star_ls_pure_prior():
    ch = random_channel(2, 2, 3, np.random.default_rng(1))
    p0 = np.diag([1.0, 0.0])
    ls = stm.star_ls(channel.Process(ch, p0))
    np.testing.assert_allclose(ls.mat, np.kron(p0, ch.apply(p0)), atol=1e-12)


def test_swap_properties():
    rng = np.random.default_rng(2)
    a = rng.normal(size=(2, 2))
    b = rng.normal(size=(3, 3))
    np.testing.assert_allclose(stm.swap(np.kron(b, a), (3, 2)), np.kron(a, b))
    m = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    n = rng.normal(size=(6, 6))
    np.testing.assert_allclose(stm.swap(stm.swap(m, (3, 2)), (2, 3)), m)
    assert np.trace(stm.swap(m, (3, 2))) == pytest.approx(np.trace(m))
    np.testing.assert_allclose(stm.swap(m @ n, (3, 2)), stm.swap(m, (3, 2)) @ stm.swap(n, (3, 2)), atol=1e-12)


def test_ttev_adc_entries():
    r3, gamma = 0.3, 0.4
    proc = adc.adc_process(r3, gamma)
    assert stm.ttev(proc, pauli(0), pauli(0)) == pytest.approx(1.0)
    assert stm.ttev(proc, pauli(3), pauli(0)) == pytest.approx(r3)
    assert stm.ttev(proc, pauli(0), pauli(3)) == pytest.approx(r3 + gamma * (1 - r3))
    assert stm.ttev(proc, pauli(1), pauli(1)) == pytest.approx(np.sqrt(1 - gamma))
    assert stm.ttev(proc, pauli(3), pauli(3)) == pytest.approx(1 - gamma * (1 - r3))


def test_ttev_fast_reproduces_table():
    proc = adc.adc_process(0.5, 0.5)
    fast = np.array([[stm.ttev_fast(proc, pauli(a), pauli(b)) for b in range(4)] for a in range(4)])
    np.testing.assert_allclose(fast, stm.ttev_table(proc), atol=1e-12)
    np.testing.assert_allclose(fast, stm.pauli_expectations(stm.star(proc)), atol=1e-12)
    assert stm.ttev_fast(proc, pauli(0), pauli(0)) == pytest.approx(1.0)


def test_ttev_fast_agrees_on_random_light_touch_pairs():
    rng = np.random.default_rng(3)
    for _ in range(30):
        ch = random_channel(2, 3, 2, rng)
        proc = channel.Process(ch, random_density(2, rng))
        ua, ub = random_unitary(2, rng), random_unitary(3, rng)
        lam, mu = rng.uniform(0.1, 3.0, size=2)
        oa = lam * ua @ np.diag([1.0, -1.0]) @ ua.conj().T
        ob = mu * ub @ np.diag([1.0, 1.0, -1.0]) @ ub.conj().T
        assert stm.ttev_fast(proc, oa, ob) == pytest.approx(stm.ttev(proc, oa, ob), abs=1e-9)


def test_ttev_fast_refuses_non_light_touch():
    proc = channel.Process(channel.identity_channel(3), np.eye(3) / 3)
    with pytest.raises(NotLightTouch):
        stm.ttev_fast(proc, np.diag([1.0, 0.0, -1.0]), np.eye(3))


def test_non_light_touch_pair_can_disagree():
    # documented counterexample: the state-over-time shortcut is not the operational value here
    rng = np.random.default_rng(4)
    u = random_unitary(2, rng)
    proc = channel.Process(channel.identity_channel(2), u @ np.diag([0.8, 0.2]) @ u.conj().T)
    oa = np.diag([1.0, 0.0])
    ob = u @ np.diag([0.7, -0.1]) @ u.conj().T + 0.3 * pauli(1).mat
    shortcut = stm.star(proc).expectation(oa, ob)
    assert abs(shortcut - stm.ttev(proc, oa, ob)) > 1e-3


def test_ttev_scaling():
    rng = np.random.default_rng(5)
    proc = channel.Process(random_channel(2, 2, 3, rng), random_density(2, rng))
    a = pauli(1).mat + 0.5 * pauli(3).mat
    b = pauli(2).mat - 0.2 * pauli(0).mat
    assert stm.ttev(proc, 2.5 * a, -1.5 * b) == pytest.approx(2.5 * -1.5 * stm.ttev(proc, a, b), abs=1e-10)


def test_ttev_dimension_check():
    with pytest.raises(DimMismatch):
        stm.ttev(adc.adc_process(0.1, 0.1), np.eye(3), np.eye(2))
    with pytest.raises(DimMismatch):
        stm.ttev_table(channel.Process(channel.identity_channel(3), np.eye(3) / 3))


def test_ttev_invariant_under_cluster_basis():
    rng = np.random.default_rng(6)
    proc = channel.Process(random_channel(3, 3, 2, rng), random_density(3, rng))
    u = random_unitary(2, rng)
    basis_change = np.eye(3, dtype=complex)
    basis_change[:2, :2] = u
    oa = np.diag([1.0, 1.0, -2.0])
    rotated = basis_change @ oa @ basis_change.conj().T
    ob = light_touch_basis(3).elements[3].mat
    assert stm.ttev(proc, rotated, ob) == pytest.approx(stm.ttev(proc, oa, ob), abs=1e-12)


def _classical_oracle(px, p_yx, xs, ys):
    return sum(xs[x] * ys[y] * p_yx[y, x] * px[x] for x in range(len(px)) for y in range(len(ys)))


def test_classical_embedding_and_bayes_reversal():
    rng = np.random.default_rng(7)
    for _ in range(20):
        nx, ny = rng.integers(2, 5, size=2)
        px = rng.dirichlet(np.ones(nx))
        p_yx = random_stochastic(ny, nx, rng)
        xs = rng.choice([-1.0, 1.0], size=nx)
        ys = rng.choice([-1.0, 1.0], size=ny)
        proc = channel.Process(classical_channel(p_yx), np.diag(px))
        forward = stm.ttev(proc, np.diag(xs), np.diag(ys))
        assert forward == pytest.approx(_classical_oracle(px, p_yx, xs, ys), abs=1e-10)
        qy = p_yx @ px
        p_xy = (p_yx * px).T / qy
        reverse = stm.ttev(channel.Process(classical_channel(p_xy), np.diag(qy)), np.diag(ys), np.diag(xs))
        assert reverse == pytest.approx(forward, abs=1e-10)


def test_state_over_time_may_be_negative():
    s = stm.star(adc.adc_process(0.2, 0.6))
    assert s.min_eigenvalue() < 0
