import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qsep import linalg as la
from qsep.channels import Povm, identity_channel
from qsep.classical import (
    ClassicalProcess,
    classical_average,
    classical_reverse,
    classical_sigma,
    embed_as_quantum,
    kl,
    measure_prepare_channel,
    tpm_process,
    trajectory_average,
    trajectory_probabilities,
)
from qsep.entropy import avg_def2, crooks, sigma_operator
from qsep.errors import DimensionMismatch, InvalidParameter, SingularPrior, SupportMismatch
from qsep.sampling import random_povm, random_probability, random_state, random_stochastic
from qsep.states import q_forward, q_reverse

PHI = np.array([[0.9, 0.2], [0.1, 0.8]])


def random_process(rng, n_in, n_out, floor=0.02):
    return ClassicalProcess(
        random_probability(n_in, rng, floor),
        random_stochastic(n_out, n_in, rng, floor),
        random_probability(n_in, rng, floor),
        random_probability(n_out, rng, floor),
    )


def quantum_pair(proc):
    chan, rho, gamma, tau = embed_as_quantum(proc)
    return q_forward(chan, rho), q_reverse(chan, gamma, tau)


class TestValidation:
    def test_column_stochastic_required(self):
        with pytest.raises(InvalidParameter):
            ClassicalProcess([0.5, 0.5], PHI.T)

    def test_probability_vector_required(self):
        with pytest.raises(InvalidParameter):
            ClassicalProcess([0.6, 0.6], PHI)

    def test_sizes(self):
        with pytest.raises(DimensionMismatch):
            ClassicalProcess([0.2, 0.3, 0.5], PHI)

    def test_reference_needed(self):
        with pytest.raises(InvalidParameter):
            classical_average(ClassicalProcess([0.5, 0.5], PHI))


class TestReverse:
    def test_identity_permutation(self):
        proc = ClassicalProcess([0.3, 0.7], np.eye(2), [0.4, 0.6])
        np.testing.assert_array_equal(classical_reverse(proc), np.eye(2))

    def test_doubly_stochastic_uniform_prior(self):
        phi = np.array([[0.5, 0.3, 0.2], [0.2, 0.5, 0.3], [0.3, 0.2, 0.5]])
        proc = ClassicalProcess(np.ones(3) / 3, phi, np.ones(3) / 3)
        np.testing.assert_allclose(classical_reverse(proc), phi.T, atol=1e-15)

    def test_two_state_bayes(self):
        proc = ClassicalProcess([0.7, 0.3], PHI, [0.5, 0.5])
        np.testing.assert_allclose(classical_reverse(proc), [[9 / 11, 1 / 9], [2 / 11, 8 / 9]], atol=1e-15)

    def test_columns_sum_to_one(self, rng):
        rev = classical_reverse(random_process(rng, 3, 4))
        np.testing.assert_allclose(rev.sum(axis=0), 1, atol=1e-14)

    def test_unreachable_output_visited_by_q(self):
        proc = ClassicalProcess([0.5, 0.5], np.array([[1.0, 1.0], [0.0, 0.0]]), [0.5, 0.5], [0.5, 0.5])
        with pytest.raises(SingularPrior):
            classical_reverse(proc)


class TestSigma:
    def test_zero_at_reference(self, rng):
        phi = random_stochastic(3, 3, rng, 0.02)
        pi = random_probability(3, rng, 0.02)
        proc = ClassicalProcess(pi, phi, pi, phi @ pi)
        np.testing.assert_allclose(classical_sigma(proc), 0, atol=1e-14)

    def test_two_state_values(self):
        proc = ClassicalProcess([0.7, 0.3], PHI, [0.5, 0.5], PHI @ [0.7, 0.3])
        # log(P_F / P_R) over the four trajectories, exact fractions
        expected = [[0.10969891725642453, 0.7091475219063864], [-0.7375989431307791, -0.13815033848081718]]
        np.testing.assert_allclose(classical_sigma(proc), expected, atol=1e-14)

    def test_jarzynski(self, rng):
        proc = random_process(rng, 3, 2)
        p_f, _ = trajectory_probabilities(proc)
        assert abs(np.sum(p_f * np.exp(-classical_sigma(proc))) - 1) < 1e-14

    def test_zero_forward_cells_are_nan(self):
        proc = ClassicalProcess([1.0, 0.0], PHI, [0.5, 0.5], [0.5, 0.5])
        sig = classical_sigma(proc)
        assert np.all(np.isnan(sig[1])) and np.all(np.isfinite(sig[0]))

    def test_infinite_entropy_is_an_error(self):
        proc = ClassicalProcess([0.5, 0.5], PHI, [1.0, 0.0], [0.5, 0.5])
        with pytest.raises(SupportMismatch):
            classical_sigma(proc)

    @given(st.integers(0, 2**32 - 1), st.integers(2, 4), st.integers(2, 4))
    @settings(max_examples=40, deadline=None)
    def test_crooks_per_cell(self, seed, n_in, n_out):
        proc = random_process(np.random.default_rng(seed), n_in, n_out)
        p_f, p_r = trajectory_probabilities(proc)
        np.testing.assert_allclose(p_r.T, np.exp(-classical_sigma(proc)) * p_f, atol=1e-14)

    @given(st.integers(0, 2**32 - 1), st.integers(2, 4), st.integers(2, 4))
    @settings(max_examples=40, deadline=None)
    def test_locality_split(self, seed, n_in, n_out):
        proc = random_process(np.random.default_rng(seed), n_in, n_out)
        f = np.log(proc.p / proc.pi)
        g = -np.log(proc.q / (proc.phi @ proc.pi))
        np.testing.assert_allclose(classical_sigma(proc), f[:, None] + g[None, :], atol=1e-13)


class TestAverage:
    def test_prior_equal_initial(self, rng):
        proc = random_process(rng, 3, 3)
        proc = proc.with_reference(pi=proc.p)
        assert abs(classical_average(proc).avg - kl(proc.phi @ proc.p, proc.q)) < 1e-14

    def test_permutation_with_matched_q(self, rng):
        perm = np.eye(3)[[2, 0, 1]]
        p = random_probability(3, rng, 0.02)
        proc = ClassicalProcess(p, perm, random_probability(3, rng, 0.02), perm @ p)
        assert abs(classical_average(proc).avg) < 1e-14

    def test_two_state_matches_trajectory_sum(self):
        proc = ClassicalProcess([0.7, 0.3], PHI, [0.5, 0.5], [0.4, 0.6])
        assert abs(classical_average(proc).avg - trajectory_average(proc)) < 1e-12

    def test_decomposition(self, rng):
        proc = random_process(rng, 2, 3)
        res = classical_average(proc)
        d_in, d_out1, d_out2 = res.decomposition
        assert abs(res.avg - (d_in - d_out1 + d_out2)) < 1e-15
        assert abs(res.avg - trajectory_average(proc)) < 1e-12


class TestTwoPointMeasurement:
    def test_sharp_case(self):
        effects = [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]
        proc = tpm_process([0.4, 0.6], effects, effects)
        np.testing.assert_allclose(proc.phi, np.eye(2), atol=1e-15)
        assert proc.pi is None and proc.q is None

    def test_maximally_mixed_inputs(self):
        effects = [la.unit(i, i, 3) for i in range(3)]
        proc = tpm_process(np.ones(3) / 3, [np.eye(3) / 3] * 3, effects)
        np.testing.assert_allclose(proc.phi, np.full((3, 3), 1 / 3), atol=1e-15)

    def test_born_rule(self, rng):
        effects = random_povm(2, 3, rng)
        states = [random_state(2, rng) for _ in range(2)]
        proc = tpm_process([0.5, 0.5], states, Povm(tuple(effects)))
        for i, s in enumerate(states):
            for j, e in enumerate(effects):
                assert abs(proc.phi[j, i] - np.trace(s @ e).real) < 1e-14

    def test_mismatched_states(self, rng):
        with pytest.raises(DimensionMismatch):
            tpm_process([1.0], [np.eye(3) / 3], [np.eye(2)])


class TestEmbedding:
    def test_channel_action(self):
        chan = measure_prepare_channel(PHI)
        from qsep.channels import apply

        out = apply(chan, np.array([[0.7, 0.3], [0.3, 0.3]]))
        np.testing.assert_allclose(out, np.diag(PHI @ [0.7, 0.3]), atol=1e-15)

    def test_reference_point_zero(self, rng):
        phi = random_stochastic(3, 3, rng, 0.02)
        pi = random_probability(3, rng, 0.02)
        proc = ClassicalProcess(pi, phi, pi, phi @ pi)
        assert abs(avg_def2(*quantum_pair(proc))) < 1e-12

    def test_two_state_spectrum(self):
        proc = ClassicalProcess([0.7, 0.3], PHI, [0.5, 0.5], PHI @ [0.7, 0.3])
        op = sigma_operator(*quantum_pair(proc))
        np.testing.assert_allclose(op.eigenvalues, np.sort(classical_sigma(proc).reshape(-1)), atol=1e-12)

    def test_identity_permutation_contrasts_quantum_identity(self):
        p, pi, q = np.array([0.6, 0.4]), np.array([0.3, 0.7]), np.array([0.2, 0.8])
        proc = ClassicalProcess(p, np.eye(2), pi, q)
        value = avg_def2(*quantum_pair(proc))
        assert abs(value - kl(p, q)) < 1e-9 and value > 0
        chan = identity_channel(2)
        rho, gamma, tau = (np.diag(v).astype(complex) for v in (p, pi, q))
        assert abs(avg_def2(q_forward(chan, rho), q_reverse(chan, gamma, tau))) < 1e-12

    @given(st.integers(0, 2**32 - 1), st.integers(2, 4), st.integers(2, 4))
    @settings(max_examples=30, deadline=None)
    def test_faithful(self, seed, n_in, n_out):
        proc = random_process(np.random.default_rng(seed), n_in, n_out)
        qf, qr = quantum_pair(proc)
        op = sigma_operator(qf, qr)
        np.testing.assert_allclose(op.eigenvalues, np.sort(classical_sigma(proc).reshape(-1)), atol=1e-9)
        assert abs(avg_def2(qf, qr, op) - classical_average(proc).avg) < 1e-9
        rep = crooks(qf, qr)
        assert abs(rep.jarzynski_value - 1) < 1e-9
        assert max(r.ratio_error for r in rep.crooks_rows) < 1e-9
