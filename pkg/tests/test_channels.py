import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qsep import linalg as la
from qsep.channels import (
    CollisionModel,
    Povm,
    QuantumChannel,
    adjoint_apply,
    apply,
    bloch_state,
    channel_rank_flags,
    choi_from_kraus,
    collision_channel,
    collision_channel_iterated,
    complementary_apply,
    compose,
    depolarizing_channel,
    identity_channel,
    measurement_channel,
    stinespring,
    unitary_channel,
)
from qsep.errors import DimensionMismatch, InvalidParameter, NotCPTP
from qsep.sampling import haar_unitary, random_channel, random_povm, random_state
from qsep.states import q_forward

seeds = st.integers(0, 2**32 - 1)


def kraus_action(kraus, x):
    return sum(k @ x @ k.conj().T for k in kraus)


class TestChoiFromKraus:
    def test_identity(self):
        c = choi_from_kraus([np.eye(2)]).choi
        phi = la.max_entangled(2)
        np.testing.assert_allclose(c, np.outer(phi, phi.conj()), atol=1e-15)

    def test_completely_depolarizing(self):
        paulis = [np.eye(2), la.as_matrix([[0, 1], [1, 0]]), la.as_matrix([[0, -1j], [1j, 0]]), np.diag([1, -1])]
        chan = choi_from_kraus([p / 2 for p in paulis])
        np.testing.assert_allclose(chan.choi, np.eye(4) / 2, atol=1e-15)
        np.testing.assert_allclose(depolarizing_channel(2).choi, np.eye(4) / 2, atol=1e-15)

    def test_collision_choi_full_rank(self):
        chan = choi_from_kraus(CollisionModel(0.9, 0.3).kraus())
        assert la.eig_hermitian(chan.choi).eigenvalues[0] > 1e-6

    def test_incomplete_kraus_rejected(self):
        with pytest.raises(NotCPTP):
            choi_from_kraus([np.diag([1.0, 0.5])])

    def test_non_positive_choi_rejected(self):
        with pytest.raises(NotCPTP):
            QuantumChannel(np.diag([1.0, -0.5, 0.5, 1.0]), 2, 2)

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            QuantumChannel(np.eye(6), 2, 2)

    def test_choi_is_read_only(self):
        chan = identity_channel(2)
        with pytest.raises(ValueError):
            chan.choi[0, 0] = 3

    @given(seeds, st.integers(1, 3), st.integers(1, 3), st.integers(1, 4))
    @settings(max_examples=30, deadline=None)
    def test_round_trip_on_matrix_units(self, seed, d_in, d_out, r):
        rng = np.random.default_rng(seed)
        r = max(r, -(-d_in // d_out))
        u = haar_unitary(d_out * r, rng)[:, :d_in]
        kraus = [u[k * d_out:(k + 1) * d_out] for k in range(r)]
        chan = choi_from_kraus(kraus)
        for i in range(d_in):
            for j in range(d_in):
                e = la.unit(i, j, d_in)
                np.testing.assert_allclose(apply(chan, e), kraus_action(kraus, e), atol=1e-10)
        np.testing.assert_allclose(la.partial_trace(chan.choi, (d_out, d_in), keep=1), np.eye(d_in), atol=1e-9)


class TestApply:
    def test_identity(self, rng):
        rho = random_state(3, rng)
        np.testing.assert_allclose(apply(identity_channel(3), rho), rho, atol=1e-15)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            apply(identity_channel(2), np.eye(3) / 3)

    def test_collision_half_pi_outputs_xi(self, rng):
        model = CollisionModel(0.8, np.pi / 2)
        np.testing.assert_allclose(apply(collision_channel(model), random_state(2, rng)), model.xi, atol=1e-12)

    def test_collision_n1_matches_closed_form(self, rng):
        model = CollisionModel(0.9, 0.2)
        rho = random_state(2, rng)
        out = apply(choi_from_kraus(model.kraus()), rho)
        c2, k = np.cos(0.2) ** 2, model.k
        assert abs(out[0, 0] - (c2 * rho[0, 0] + (1 - c2) * 0.9)) < 1e-10
        assert abs(out[0, 1] - k * rho[0, 1]) < 1e-10

    @given(seeds, st.integers(2, 3), st.floats(-2, 2))
    @settings(max_examples=25, deadline=None)
    def test_linear_and_trace_preserving(self, seed, d, alpha):
        rng = np.random.default_rng(seed)
        chan = random_channel(d, d, rng)
        h1 = random_state(d, rng) - np.eye(d) / d
        h2 = random_state(d, rng)
        lhs = apply(chan, h1 + alpha * h2)
        np.testing.assert_allclose(lhs, apply(chan, h1) + alpha * apply(chan, h2), atol=1e-11)
        assert abs(np.trace(apply(chan, h2)) - 1) < 1e-11


class TestAdjoint:
    def test_unital_dual(self, rng):
        chan = random_channel(2, 3, rng)
        np.testing.assert_allclose(adjoint_apply(chan, np.eye(3)), np.eye(2), atol=1e-10)

    def test_measurement_dual_gives_effects(self, rng):
        effects = random_povm(2, 3, rng)
        chan = measurement_channel(Povm(tuple(effects)))
        for i, e in enumerate(effects):
            np.testing.assert_allclose(adjoint_apply(chan, la.unit(i, i, 3)), e, atol=1e-12)

    def test_unitary_dual(self, rng):
        u = haar_unitary(3, rng)
        s = random_state(3, rng)
        np.testing.assert_allclose(adjoint_apply(unitary_channel(u), s), u.conj().T @ s @ u, atol=1e-12)

    def test_duality_pairing(self, rng):
        chan = random_channel(2, 3, rng)
        rho, s = random_state(2, rng), random_state(3, rng)
        assert abs(np.trace(apply(chan, rho) @ s) - np.trace(rho @ adjoint_apply(chan, s))) < 1e-12


class TestCompose:
    def test_with_identity(self, rng):
        chan = random_channel(2, 3, rng)
        np.testing.assert_allclose(compose(chan, identity_channel(2)).choi, chan.choi, atol=1e-12)

    def test_collision_squared_is_two_collisions(self):
        one = collision_channel(CollisionModel(0.9, 0.2))
        two = collision_channel(CollisionModel(0.9, 0.2, 2))
        np.testing.assert_allclose(compose(one, one).choi, two.choi, atol=1e-12)

    def test_sequential_application_on_basis(self, rng):
        e1, e2 = random_channel(2, 3, rng), random_channel(3, 2, rng)
        both = compose(e2, e1)
        for i in range(2):
            for j in range(2):
                x = la.unit(i, j, 2)
                np.testing.assert_allclose(apply(both, x), apply(e2, apply(e1, x)), atol=1e-10)

    def test_dimension_mismatch(self, rng):
        with pytest.raises(DimensionMismatch):
            compose(random_channel(2, 2, rng), random_channel(2, 3, rng))


class TestStinespring:
    def test_identity_dilation(self, rng):
        rho = random_state(2, rng)
        v = stinespring(identity_channel(2))
        np.testing.assert_allclose(la.partial_trace(v @ rho @ v.conj().T, (2, 4), keep=0), rho, atol=1e-12)

    def test_isometry_and_dilation(self, rng):
        chan = random_channel(3, 2, rng)
        v = stinespring(chan)
        np.testing.assert_allclose(v.conj().T @ v, np.eye(3), atol=1e-10)
        rho = random_state(3, rng)
        out = la.partial_trace(v @ rho @ v.conj().T, (2, 6), keep=0)
        np.testing.assert_allclose(out, apply(chan, rho), atol=1e-10)

    def test_environment_marginal_is_transposed_forward_state(self, rng):
        chan = random_channel(2, 2, rng)
        rho = random_state(2, rng)
        np.testing.assert_allclose(complementary_apply(chan, rho), q_forward(chan, rho).matrix.T, atol=1e-10)


class TestComplementary:
    def test_unitary_environment_is_fixed_pure_state(self, rng):
        chan = unitary_channel(haar_unitary(2, rng))
        a = complementary_apply(chan, random_state(2, rng))
        b = complementary_apply(chan, random_state(2, rng))
        np.testing.assert_allclose(a, b, atol=1e-12)
        assert abs(np.trace(a @ a) - 1) < 1e-12

    def test_identity_maximally_mixed(self):
        chan = identity_channel(2)
        expected = (chan.sqrt_choi @ np.kron(np.eye(2), np.eye(2) / 2) @ chan.sqrt_choi).T
        np.testing.assert_allclose(complementary_apply(chan, np.eye(2) / 2), expected, atol=1e-12)

    def test_unit_trace(self, rng):
        chan = random_channel(2, 3, rng)
        assert abs(np.trace(complementary_apply(chan, random_state(2, rng))) - 1) < 1e-12

    def test_consistency_with_forward_state_50_pairs(self, rng):
        worst = 0.0
        for k in range(50):
            d = 2 + k % 2
            chan, rho = random_channel(d, d, rng), random_state(d, rng)
            worst = max(worst, np.max(np.abs(complementary_apply(chan, rho) - q_forward(chan, rho).matrix.T)))
        assert worst < 1e-9


class TestMeasurement:
    def test_born_rule_plus_state(self):
        chan = measurement_channel([np.diag([1.0, 0]), np.diag([0, 1.0])])
        np.testing.assert_allclose(apply(chan, bloch_state(1, 0, 0)), np.eye(2) / 2, atol=1e-15)

    def test_trivial_povm(self, rng):
        chan = measurement_channel([np.eye(2) / 2, np.eye(2) / 2])
        np.testing.assert_allclose(apply(chan, random_state(2, rng)), np.eye(2) / 2, atol=1e-15)

    def test_random_povm_diagonal_born(self, rng):
        effects = random_povm(2, 3, rng)
        rho = random_state(2, rng)
        out = apply(measurement_channel(effects), rho)
        np.testing.assert_allclose(out, np.diag([np.trace(e @ rho).real for e in effects]), atol=1e-12)

    def test_effects_must_sum_to_identity(self):
        with pytest.raises(NotCPTP):
            measurement_channel([np.diag([1.0, 0]), np.diag([0, 0.5])])


class TestCollision:
    def test_phi_zero_is_identity(self):
        np.testing.assert_allclose(collision_channel(CollisionModel(0.7, 0.0, 3)).choi, identity_channel(2).choi, atol=1e-14)

    def test_k_at_quarter_pi(self):
        assert abs(CollisionModel(1.0, np.pi / 4).k - (1 + 1j) / 2) < 1e-15

    def test_half_pi_is_constant(self, rng):
        chan = collision_channel(CollisionModel(0.3, np.pi / 2))
        for _ in range(3):
            np.testing.assert_allclose(apply(chan, random_state(2, rng)), np.diag([0.3, 0.7]), atol=1e-14)

    @pytest.mark.parametrize("n", [1, 2, 5, 12])
    def test_closed_form_matches_iteration(self, n):
        model = CollisionModel(0.9, 0.2, n)
        np.testing.assert_allclose(collision_channel(model).choi, collision_channel_iterated(model).choi, atol=1e-10)

    def test_fixed_point(self):
        model = CollisionModel(0.9, 0.2)
        np.testing.assert_allclose(apply(collision_channel(model), model.xi), model.xi, atol=1e-10)

    def test_convergence_400_collisions(self, rng):
        chan = collision_channel(CollisionModel(0.9, 0.2, 400))
        xi = np.diag([0.9, 0.1])
        for _ in range(20):
            diff = apply(chan, random_state(2, rng)) - xi
            assert 0.5 * np.abs(np.linalg.eigvalsh(diff)).sum() < 1e-6

    def test_coherence_decays_as_k_to_the_n(self):
        # populations relax as c^(2n), coherences only as |k|^n
        model = CollisionModel(0.9, 0.2, 400)
        rho = bloch_state(0.6, 0.0, 0.0)
        diff = apply(collision_channel(model), rho) - model.xi
        assert abs(diff[0, 1] - model.k**400 * 0.3) < 1e-15
        assert abs(diff[0, 0]) < 1e-7

    def test_coherent_xi_rejected(self):
        with pytest.raises(InvalidParameter):
            CollisionModel(0.9, 0.2, xi_coherence=0.1)

    @pytest.mark.parametrize("kwargs", [dict(xi_population=1.2, phi=0.1), dict(xi_population=0.5, phi=0.1, n=0)])
    def test_invalid_parameters(self, kwargs):
        with pytest.raises(InvalidParameter):
            CollisionModel(**kwargs)


class TestRankFlags:
    def test_unitary(self, rng):
        assert channel_rank_flags(unitary_channel(haar_unitary(2, rng))) == (False, True, True)

    def test_depolarizing(self):
        assert channel_rank_flags(depolarizing_channel(2)) == (True, True, False)

    def test_collision(self):
        assert channel_rank_flags(collision_channel(CollisionModel(0.9, 0.2))) == (True, False, False)
