import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qbret import errors
from qbret.hilbert import (
    KET0,
    KET1,
    KET_MINUS,
    KET_PLUS,
    AdjointChannel,
    KrausChannel,
    builtin_channel,
    builtin_gates,
    channel_from_dilation,
    petz_hilbert,
    projector,
    qubit_state,
    random_density,
    random_unitary,
)
from qbret.matcore import dagger, max_abs

angles = st.floats(min_value=-2 * np.pi, max_value=2 * np.pi,
                   allow_nan=False, allow_infinity=False)


class TestQubitState:
    def test_north_pole(self):
        np.testing.assert_allclose(qubit_state(np.pi / 2, 0, 0),
                                   projector(KET0), atol=1e-15)

    def test_south_pole(self):
        np.testing.assert_allclose(qubit_state(0, 0, 0),
                                   projector(KET1), atol=1e-15)

    def test_generic_spectrum(self):
        omega = np.pi / 16
        beta = qubit_state(omega, np.pi / 5, np.pi / 3)
        assert max_abs(beta - dagger(beta)) < 1e-15
        assert abs(np.trace(beta) - 1) < 1e-15
        w = np.linalg.eigvalsh(beta)
        np.testing.assert_allclose(
            w, sorted([np.sin(omega) ** 2, np.cos(omega) ** 2]), atol=1e-14)

    @given(omega=angles, theta=angles, phi=angles)
    @settings(max_examples=50, deadline=None)
    def test_always_a_state(self, omega, theta, phi):
        beta = qubit_state(omega, theta, phi)
        assert abs(np.trace(beta) - 1) < 1e-12
        assert np.linalg.eigvalsh(beta)[0] > -1e-12


class TestDilation:
    def test_full_swap_is_replacement(self):
        rng = np.random.default_rng(0)
        ch = builtin_channel("full_swap", ancilla=projector(KET1))
        for _ in range(5):
            rho = random_density(rng, 2)
            np.testing.assert_allclose(ch.apply(rho), projector(KET1),
                                       atol=1e-12)

    def test_trivial_dilation_is_identity(self):
        rng = np.random.default_rng(1)
        beta = random_density(rng, 2)
        ch = channel_from_dilation(np.eye(4, dtype=complex), beta)
        rho = random_density(rng, 2)
        np.testing.assert_allclose(ch.apply(rho), rho, atol=1e-12)

    def test_half_swap_computational_inputs(self):
        ch = builtin_channel("half_swap")  # ancilla defaults to |1><1|
        np.testing.assert_allclose(ch.apply(projector(KET1)), projector(KET1),
                                   atol=1e-12)
        np.testing.assert_allclose(ch.apply(projector(KET0)), np.eye(2) / 2,
                                   atol=1e-12)

    def test_matches_partial_trace_on_random_states(self):
        from qbret.matcore import partial_trace_b
        rng = np.random.default_rng(2)
        u = random_unitary(rng, 4)
        beta = random_density(rng, 2)
        ch = channel_from_dilation(u, beta)
        for _ in range(20):
            rho = random_density(rng, 2)
            direct = partial_trace_b(u @ np.kron(rho, beta) @ dagger(u), 2, 2)
            np.testing.assert_allclose(ch.apply(rho), direct, atol=1e-12)

    def test_completeness(self):
        rng = np.random.default_rng(3)
        ch = channel_from_dilation(random_unitary(rng, 4),
                                   random_density(rng, 2))
        total = sum(dagger(k) @ k for k in ch.kraus)
        np.testing.assert_allclose(total, np.eye(2), atol=1e-12)

    def test_rejects_non_unitary(self):
        with pytest.raises(errors.NotUnitary):
            channel_from_dilation(np.ones((4, 4), dtype=complex),
                                  projector(KET0))

    def test_rejects_bad_ancilla(self):
        with pytest.raises(errors.BadAncilla):
            channel_from_dilation(np.eye(4, dtype=complex),
                                  np.diag([2.0, -1.0]).astype(complex))


class TestApplyAdjoint:
    def test_half_swap_plus_input(self):
        ch = builtin_channel("half_swap")
        out = ch.apply(projector(KET_PLUS))
        expected = np.array([[0.25, 1 / (2 * np.sqrt(2))],
                             [1 / (2 * np.sqrt(2)), 0.75]])
        np.testing.assert_allclose(out, expected, atol=1e-12)

    def test_pauli_z_on_plus(self):
        ch = builtin_channel("pauli_z")
        np.testing.assert_allclose(ch.apply(projector(KET_PLUS)),
                                   projector(KET_MINUS), atol=1e-12)

    def test_adjoint_unital(self):
        rng = np.random.default_rng(4)
        ch = channel_from_dilation(random_unitary(rng, 4),
                                   random_density(rng, 2))
        np.testing.assert_allclose(ch.adjoint(np.eye(2)), np.eye(2), atol=1e-12)

    def test_unitary_adjoint_is_inverse_conjugation(self):
        rng = np.random.default_rng(5)
        u = random_unitary(rng, 2)
        ch = KrausChannel.from_unitary(u)
        sigma = random_density(rng, 2)
        np.testing.assert_allclose(ch.adjoint(sigma), dagger(u) @ sigma @ u,
                                   atol=1e-12)

    def test_defining_relation(self):
        # Tr[E[rho] sigma] = Tr[E^dag[sigma] rho] on random pairs
        rng = np.random.default_rng(6)
        for _ in range(5):
            ch = channel_from_dilation(random_unitary(rng, 4),
                                       random_density(rng, 2))
            for _ in range(10):
                rho = random_density(rng, 2)
                sigma = random_density(rng, 2)
                lhs = np.trace(ch.apply(rho) @ sigma)
                rhs = np.trace(ch.adjoint(sigma) @ rho)
                assert abs(lhs - rhs) < 1e-12

    def test_half_swap_adjoint_brute_force(self):
        ch = builtin_channel("half_swap")
        t = ch.adjoint(projector(KET1))
        assert max_abs(t - dagger(t)) < 1e-12
        rng = np.random.default_rng(7)
        for _ in range(10):
            rho = random_density(rng, 2)
            lhs = np.trace(ch.apply(rho) @ projector(KET1))
            rhs = np.trace(t @ rho)
            assert abs(lhs - rhs) < 1e-12

    def test_dimension_mismatch(self):
        ch = builtin_channel("hadamard")
        with pytest.raises(errors.DimensionMismatch):
            ch.apply(np.eye(3, dtype=complex))


class TestPetzHilbert:
    def test_unitary_inverts(self):
        rng = np.random.default_rng(8)
        u = random_unitary(rng, 2)
        ch = KrausChannel.from_unitary(u)
        recovery = petz_hilbert(ch, random_density(rng, 2, min_eig=0.1))
        for _ in range(5):
            sigma = random_density(rng, 2)
            np.testing.assert_allclose(recovery.apply(sigma),
                                       dagger(u) @ sigma @ u, atol=1e-10)

    def test_unitary_recovery_is_prior_independent(self):
        rng = np.random.default_rng(14)
        u = random_unitary(rng, 2)
        ch = KrausChannel.from_unitary(u)
        probes = [random_density(rng, 2) for _ in range(3)]
        reference = None
        for _ in range(5):
            recovery = petz_hilbert(ch, random_density(rng, 2, min_eig=0.05))
            images = [recovery.apply(p) for p in probes]
            if reference is None:
                reference = images
            else:
                for got, want in zip(images, reference):
                    assert max_abs(got - want) < 1e-8

    def test_erasure_recovers_prior(self):
        rng = np.random.default_rng(9)
        gamma = qubit_state(np.pi / 16, np.pi / 5, np.pi / 8)
        ch = builtin_channel("full_swap",
                             ancilla=qubit_state(7 * np.pi / 16, 3 * np.pi / 5,
                                                 np.pi / 6))
        recovery = petz_hilbert(ch, gamma)
        for _ in range(5):
            sigma = random_density(rng, 2)
            np.testing.assert_allclose(recovery.apply(sigma), gamma, atol=1e-10)

    def test_half_swap_pure_plus_prior_erases_back(self):
        ch = builtin_channel("half_swap")
        gamma = projector(KET_PLUS)
        recovery = petz_hilbert(ch, gamma)
        assert recovery.eps_used == 0.0  # the posterior is full rank here
        rng = np.random.default_rng(10)
        for _ in range(5):
            sigma = random_density(rng, 2)
            np.testing.assert_allclose(recovery.apply(sigma), gamma, atol=1e-10)

    def test_prior_is_fixed_point(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            ch = channel_from_dilation(random_unitary(rng, 4),
                                       random_density(rng, 2))
            gamma = random_density(rng, 2, min_eig=0.05)
            recovery = petz_hilbert(ch, gamma)
            np.testing.assert_allclose(recovery.apply(ch.apply(gamma)), gamma,
                                       atol=1e-8)

    def test_singular_posterior_requires_regularization(self):
        ch = builtin_channel("full_swap", ancilla=projector(KET1))
        with pytest.raises(errors.SingularPosterior):
            petz_hilbert(ch, projector(KET0), eps=0.0)
        recovery = petz_hilbert(ch, projector(KET0), eps=1e-8)
        assert recovery.eps_used == 1e-8

    def test_trace_preserving_on_states(self):
        rng = np.random.default_rng(12)
        ch = channel_from_dilation(random_unitary(rng, 4),
                                   random_density(rng, 2))
        recovery = petz_hilbert(ch, random_density(rng, 2, min_eig=0.1))
        for _ in range(10):
            sigma = random_density(rng, 2)
            assert abs(np.trace(recovery.apply(sigma)) - 1.0) < 1e-9


class TestBuiltins:
    def test_hadamard_involution(self):
        u = builtin_gates()["hadamard"]
        np.testing.assert_allclose(u @ u, np.eye(2), atol=1e-15)

    def test_half_swap_fixes_11(self):
        u = builtin_gates()["half_swap"]
        ket11 = np.kron(KET1, KET1)
        np.testing.assert_allclose(u @ ket11, ket11, atol=1e-15)

    def test_example_gate_unitary(self):
        u = builtin_gates()["u_eg"]
        assert max_abs(u @ dagger(u) - np.eye(4)) < 1e-12

    def test_catalog_names(self):
        assert set(builtin_gates()) == {"identity", "pauli_x", "pauli_y",
                                        "pauli_z", "hadamard", "half_swap",
                                        "full_swap", "u_eg"}

    def test_adjoint_channel_wrapper(self):
        ch = builtin_channel("half_swap")
        adj = AdjointChannel(ch)
        sigma = projector(KET0)
        np.testing.assert_allclose(adj.apply(sigma), ch.adjoint(sigma),
                                   atol=1e-15)

    def test_unknown_builtin(self):
        with pytest.raises(KeyError):
            builtin_channel("nope")


class TestPovmCheck:
    def test_projective_pair(self):
        from qbret.hilbert import assert_povm
        assert_povm([projector(KET0), projector(KET1)])

    def test_incomplete_set_rejected(self):
        from qbret.hilbert import assert_povm
        with pytest.raises(errors.NotPSD):
            assert_povm([projector(KET0)])

    def test_negative_effect_rejected(self):
        from qbret.hilbert import assert_povm
        with pytest.raises(errors.NotPSD):
            assert_povm([1.5 * projector(KET0), np.eye(2) - 1.5 * projector(KET0)])
