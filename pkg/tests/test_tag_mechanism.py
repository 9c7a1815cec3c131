"""
Unit tests for the TAG mechanism.

Tests cover:
- Corruption processes and initial state
- Group likelihoods, δz and the likelihood ratio, including finite-difference oracles
- Mixture cost closed forms
- Group ablation
- The unrolled forward pass: mask simplex, test-time K/T, equivariances,
  the clean-input firewall and end-to-end gradients
"""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from gradcheck import analytic_gradients, check_gradients
from packages.autodiff import Tensor, make_rng, softmax_axis, sum_
from packages.ladder import LadderConfig, TaggerParams
from packages.tag_mechanism import (
    CorruptionDomainError,
    CorruptionMode,
    CorruptionSpec,
    GroupState,
    MaskInvariantError,
    TagError,
    ablate_group,
    check_mask_simplex,
    corrupt,
    delta_z_binary,
    delta_z_continuous,
    group_likelihood_binary,
    group_likelihood_continuous,
    init_state,
    likelihood_ratio,
    mixture_cost,
    tagger_forward,
)

N = 16


def make_params(mode: str, normalization: str = "layer", seed: int = 0, class_count: int = 0):
    """Tiny model with randomized combinators so every path carries gradient."""
    config = LadderConfig(
        input_size=N, layer_sizes=(32, 16), normalization=normalization, class_count=class_count
    )
    data_mean = 0.5 if mode == "continuous" else 0.26
    params = TaggerParams.initialize(config, mode, data_mean, make_rng(seed, 1))
    rng = make_rng(seed, 2)
    for name, p in params.params.items():
        if name.startswith("comb"):
            p.data = p.data + rng.normal(scale=0.3, size=p.dims)
    return params


def random_state(batch: int, groups: int, rng: np.random.Generator) -> GroupState:
    z = rng.uniform(0.1, 0.9, size=(batch, groups, N))
    m = softmax_axis(rng.normal(size=(batch, groups, N)), 1)
    return GroupState(z=Tensor(z), m=Tensor(m.data), iteration=0)


@pytest.fixture
def rng():
    """Fixed random stream."""
    return make_rng(42)


@pytest.fixture
def continuous_params():
    return make_params("continuous")


@pytest.fixture
def binary_params():
    return make_params("binary")


class TestCorruption:
    """Corruption processes."""

    def test_gaussian_moments(self, rng):
        x = np.full((1, 200_000), 0.3)
        x_tilde = corrupt(x, CorruptionSpec.gaussian(0.2), rng).data
        assert x_tilde.mean() == pytest.approx(0.3, abs=0.002)
        assert x_tilde.var() == pytest.approx(0.04, abs=0.001)

    def test_bitflip_rate(self, rng):
        x_tilde = corrupt(np.zeros((1, 100_000)), CorruptionSpec.bitflip(0.2), rng).data
        assert x_tilde.mean() == pytest.approx(0.2, abs=0.01)
        assert set(np.unique(x_tilde)) <= {0.0, 1.0}

    def test_bitflip_needs_binary_input(self, rng):
        with pytest.raises(CorruptionDomainError):
            corrupt(np.array([[0.0, 0.5]]), CorruptionSpec.bitflip(0.2), rng)

    def test_fixed_seed_is_deterministic(self):
        x = np.zeros((3, 10))
        spec = CorruptionSpec.gaussian(0.2)
        assert np.array_equal(corrupt(x, spec, make_rng(7)).data, corrupt(x, spec, make_rng(7)).data)

    def test_spec_validation(self):
        with pytest.raises(ValidationError):
            CorruptionSpec(mode=CorruptionMode.GAUSSIAN)
        with pytest.raises(ValidationError):
            CorruptionSpec.gaussian(0.0)
        with pytest.raises(ValidationError):
            CorruptionSpec.bitflip(0.5)

    def test_spec_input_mode(self):
        assert CorruptionSpec.gaussian(0.2).input_mode == "continuous"
        assert CorruptionSpec.bitflip(0.2).input_mode == "binary"


class TestInitState:
    """Initial masks and reconstructions."""

    def test_masks_on_simplex(self, rng):
        state = init_state(4, 3, N, 0.26, rng)
        np.testing.assert_allclose(state.m.data.sum(axis=1), 1.0, atol=1e-6)
        assert np.all(state.m.data >= 0.0)

    @pytest.mark.parametrize("data_mean", [0.26, 0.5])
    def test_z_is_data_mean(self, data_mean, rng):
        state = init_state(2, 4, N, data_mean, rng)
        assert np.all(state.z.data == data_mean)
        assert state.iteration == 0

    def test_needs_a_group(self, rng):
        with pytest.raises(TagError):
            init_state(2, 0, N, 0.5, rng)


class TestGroupLikelihoods:
    """Predicted likelihoods of the corrupted input."""

    def test_continuous_reference_value(self):
        z_hat = group_likelihood_continuous(np.ones((1, 1)), np.zeros((1, 1, 1)), 0.96, 0.2)
        assert z_hat.item() == pytest.approx(0.24197072451914337, abs=1e-9)

    def test_continuous_peak_and_symmetry(self):
        peak = group_likelihood_continuous(np.full((1, 1), 0.4), np.full((1, 1, 1), 0.4), 0.21, 0.2)
        assert peak.item() == pytest.approx(1.0 / math.sqrt(2 * math.pi * 0.25))
        above = group_likelihood_continuous(np.full((1, 1), 0.7), np.full((1, 1, 1), 0.4), 0.25, 0.2)
        below = group_likelihood_continuous(np.full((1, 1), 0.1), np.full((1, 1, 1), 0.4), 0.25, 0.2)
        assert above.item() == pytest.approx(below.item(), rel=1e-12)

    def test_binary_fixed_point(self):
        xi, _ = group_likelihood_binary(np.ones((1, 1)), np.full((1, 1, 1), 0.5), 0.2)
        assert xi.item() == pytest.approx(0.5)

    def test_binary_certain_groups(self):
        xi, z_hat = group_likelihood_binary(np.ones((1, 1)), np.ones((1, 1, 1)), 0.2)
        assert xi.item() == pytest.approx(0.8)
        assert z_hat.item() == pytest.approx(0.8)
        _, z_hat = group_likelihood_binary(np.zeros((1, 1)), np.zeros((1, 1, 1)), 0.2)
        assert z_hat.item() == pytest.approx(0.8)


class TestDeltaZ:
    """The modeling-error signal."""

    def test_continuous_zero_when_reconstruction_exact(self, rng):
        x = rng.normal(size=(2, N))
        delta = delta_z_continuous(x, x[:, None, :], np.ones((2, 1, N)), np.ones((2, 1, N)))
        assert np.all(delta.data == 0.0)

    def test_continuous_single_group_value(self):
        delta = delta_z_continuous(np.ones((1, 1)), np.zeros((1, 1, 1)), np.ones((1, 1, 1)), np.full((1, 1, 1), 0.241971))
        assert delta.item() == pytest.approx(0.241971)

    @pytest.mark.parametrize(("z_prob", "x_tilde", "expected"), [(1.0, 1.0, 1.25), (0.0, 0.0, -1.25)])
    def test_binary_single_group_values(self, z_prob, x_tilde, expected):
        xi, _ = group_likelihood_binary(np.full((1, 1), x_tilde), np.full((1, 1, 1), z_prob), 0.2)
        delta = delta_z_binary(np.full((1, 1), x_tilde), np.ones((1, 1, 1)), xi)
        assert delta.item() == pytest.approx(expected)

    def test_binary_denominator_clamped_with_sign(self):
        xi = np.full((1, 1, 1), 1e-12)
        delta = delta_z_binary(np.zeros((1, 1)), np.ones((1, 1, 1)), xi + 1.0)
        assert np.isfinite(delta.item())
        assert delta.item() == pytest.approx(1e9)

    @staticmethod
    def _numeric_log_q_gradient(log_q, z, h=1e-6):
        numeric = np.zeros_like(z)
        for k in range(z.shape[1]):
            step = np.zeros_like(z)
            step[:, k, :] = h
            numeric[:, k, :] = (log_q(z + step) - log_q(z - step)) / (2 * h)
        return numeric

    @staticmethod
    def _random_dims(rng):
        return int(rng.integers(1, 5)), int(rng.integers(1, 6)), int(rng.integers(1, 9))

    def test_continuous_matches_gradient_of_log_likelihood(self):
        """δz / ((v + σ²) Σ_h ẑ_h m_h) = ∂ log Σ_h ẑ_h m_h / ∂z over 1,000 random instances."""
        rng = make_rng(2024, 1)
        for _ in range(1000):
            B, K, n = self._random_dims(rng)
            v, sigma = rng.uniform(0.1, 1.0), rng.uniform(0.05, 0.5)
            x_tilde = rng.normal(size=(B, n))
            z = rng.normal(size=(B, K, n))
            m = softmax_axis(rng.normal(size=(B, K, n)), 1).data

            def log_q(zz, x_tilde=x_tilde, m=m, v=v, sigma=sigma):
                return np.log((group_likelihood_continuous(x_tilde, zz, v, sigma).data * m).sum(axis=1))

            z_hat = group_likelihood_continuous(x_tilde, z, v, sigma).data
            delta = delta_z_continuous(x_tilde, z, m, z_hat).data
            rescaled = delta / ((v + sigma**2) * (z_hat * m).sum(axis=1, keepdims=True))
            np.testing.assert_allclose(
                rescaled, self._numeric_log_q_gradient(log_q, z), atol=1e-5, err_msg=f"B={B} K={K} N={n}"
            )

    def test_binary_matches_gradient_of_log_likelihood(self):
        """(1 − 2β) δz = ∂ log Σ_h ẑ_h m_h / ∂z_prob over 1,000 random instances."""
        rng = make_rng(2024, 2)
        for _ in range(1000):
            B, K, n = self._random_dims(rng)
            beta = rng.uniform(0.05, 0.45)
            x_tilde = (rng.random(size=(B, n)) < 0.5).astype(np.float64)
            z = rng.uniform(0.05, 0.95, size=(B, K, n))
            m = softmax_axis(rng.normal(size=(B, K, n)), 1).data

            def log_q(zz, x_tilde=x_tilde, m=m, beta=beta):
                _, z_hat = group_likelihood_binary(x_tilde, zz, beta)
                return np.log((z_hat.data * m).sum(axis=1))

            xi, _ = group_likelihood_binary(x_tilde, z, beta)
            rescaled = (1 - 2 * beta) * delta_z_binary(x_tilde, m, xi).data
            np.testing.assert_allclose(
                rescaled, self._numeric_log_q_gradient(log_q, z), atol=1e-5, err_msg=f"B={B} K={K} N={n}"
            )


class TestLikelihoodRatio:
    """L(m) normalization over groups."""

    def test_equal_groups_are_uniform(self):
        np.testing.assert_allclose(likelihood_ratio(np.full((1, 4, 3), 0.7)).data, 0.25)

    def test_already_normalized(self):
        ratio = likelihood_ratio(np.array([[[0.8], [0.2]]]))
        np.testing.assert_allclose(ratio.data[0, :, 0], [0.8, 0.2])

    def test_all_zero_column_falls_back_to_uniform(self):
        z_hat = np.zeros((1, 2, 2))
        z_hat[0, :, 1] = [0.3, 0.1]
        ratio = likelihood_ratio(z_hat).data
        np.testing.assert_allclose(ratio[0, :, 0], [0.5, 0.5])
        np.testing.assert_allclose(ratio[0, :, 1], [0.75, 0.25])

    def test_sums_to_one(self, rng):
        ratio = likelihood_ratio(rng.uniform(size=(3, 4, 5))).data
        np.testing.assert_allclose(ratio.sum(axis=1), 1.0, atol=1e-6)

    def test_negative_likelihood_rejected(self):
        with pytest.raises(TagError):
            likelihood_ratio(np.array([[[-0.1], [0.2]]]))


class TestMixtureCost:
    """Negative log-likelihood of the clean input."""

    def test_single_group_exact_reconstruction(self, rng):
        x = rng.normal(size=(2, 3))
        cost = mixture_cost(x, x[:, None, :], np.ones((2, 1, 3)), 1.0, "continuous")
        assert cost.item() == pytest.approx(0.5 * math.log(2 * math.pi), abs=1e-9)

    def test_binary_even_odds(self):
        z_logits = np.zeros((1, 1, 4))
        cost = mixture_cost(np.ones((1, 4)), 0.5 + z_logits, np.ones((1, 1, 4)), None, "binary", z_logits=z_logits)
        assert cost.item() == pytest.approx(math.log(2.0), abs=1e-12)

    def test_group_permutation_invariance(self, rng):
        x = rng.normal(size=(2, 5))
        z = rng.normal(size=(2, 3, 5))
        m = softmax_axis(rng.normal(size=(2, 3, 5)), 1).data
        perm = [2, 0, 1]
        a = mixture_cost(x, z, m, 0.4, "continuous").item()
        b = mixture_cost(x, z[:, perm], m[:, perm], 0.4, "continuous").item()
        assert a == pytest.approx(b, rel=1e-12)


class TestAblation:
    """Removing one group before the group softmax."""

    def test_ablated_group_vanishes(self, rng):
        m = ablate_group(rng.normal(size=(2, 4, 5)), 1).data
        assert np.all(m[:, 1] < 1e-30)
        np.testing.assert_allclose(m.sum(axis=1), 1.0, atol=1e-6)

    def test_two_equal_groups(self):
        m = ablate_group(np.zeros((1, 2, 3)), 0).data
        np.testing.assert_allclose(m[0, 1], 1.0)
        assert np.all(m[0, 0] < 1e-30)

    def test_survivor_proportions_preserved(self, rng):
        logits = rng.normal(size=(1, 4, 6))
        m = ablate_group(logits, 2).data
        expected = softmax_axis(logits[:, [0, 1, 3]], 1).data
        np.testing.assert_allclose(m[:, [0, 1, 3]], expected, atol=1e-12)

    def test_group_out_of_range(self):
        with pytest.raises(TagError):
            ablate_group(np.zeros((1, 2, 3)), 2)

    def test_simplex_check(self):
        check_mask_simplex(np.full((1, 4, 2), 0.25))
        with pytest.raises(MaskInvariantError):
            check_mask_simplex(np.full((1, 4, 2), 0.3))


class TestTaggerForward:
    """The T-iteration loop."""

    def test_trajectory_shape_and_simplex(self, continuous_params, rng):
        x = rng.uniform(size=(3, N))
        traj = tagger_forward(x, continuous_params, 4, 3, CorruptionSpec.gaussian(0.2), rng=rng)
        assert len(traj.states) == 4
        assert traj.iterations == 3
        assert len(traj.reconstructions) == 3
        for state in traj.states:
            np.testing.assert_allclose(state.m.data.sum(axis=1), 1.0, atol=1e-6)
        assert traj.total_cost.item() == pytest.approx(sum(traj.cost_values()))
        assert traj.mean_cost.item() == pytest.approx(sum(traj.cost_values()) / 3)

    def test_test_time_iterations_and_groups(self, binary_params, rng):
        x = (rng.random(size=(2, N)) < 0.3).astype(np.float64)
        spec = CorruptionSpec.bitflip(0.2)
        five = tagger_forward(x, binary_params, 4, 5, spec, training=False, rng=rng)
        assert five.iterations == 5
        two = tagger_forward(x, binary_params, 2, 3, spec, training=False, rng=rng)
        assert two.final.m.dims == (2, 2, N)

    def test_evaluation_feeds_clean_input(self, continuous_params, rng):
        x = rng.uniform(size=(2, N))
        traj = tagger_forward(x, continuous_params, 2, 1, CorruptionSpec.gaussian(0.2), training=False, rng=rng)
        assert np.array_equal(traj.corrupted.data, x)

    def test_evaluation_sigma_flag_changes_inference(self, continuous_params, rng):
        x = rng.uniform(size=(2, N))
        init = random_state(2, 2, rng)
        spec = CorruptionSpec.gaussian(0.2)
        kept = tagger_forward(x, continuous_params, 2, 2, spec, training=False, init=init)
        dropped = tagger_forward(x, continuous_params, 2, 2, spec, training=False, init=init, eval_keep_sigma=False)
        assert not np.allclose(kept.final.m.data, dropped.final.m.data)

    def test_evaluation_beta_flag_changes_binary_inference(self, binary_params, rng):
        x = (rng.random(size=(2, N)) < 0.4).astype(np.float64)
        init = random_state(2, 2, rng)
        spec = CorruptionSpec.bitflip(0.2)
        kept = tagger_forward(x, binary_params, 2, 2, spec, training=False, init=init)
        dropped = tagger_forward(x, binary_params, 2, 2, spec, training=False, init=init, eval_keep_sigma=False)
        assert not np.allclose(kept.final.m.data, dropped.final.m.data)
        noiseless = tagger_forward(
            x, binary_params, 2, 2, CorruptionSpec.bitflip(1e-300), training=False, init=init
        )
        np.testing.assert_allclose(dropped.final.m.data, noiseless.final.m.data, atol=1e-12)

    def test_training_ignores_evaluation_noise_flag(self, binary_params, rng):
        x = (rng.random(size=(2, N)) < 0.4).astype(np.float64)
        init = random_state(2, 2, rng)
        spec = CorruptionSpec.bitflip(0.2)
        a = tagger_forward(x, binary_params, 2, 2, spec, corrupted=x, init=init)
        b = tagger_forward(x, binary_params, 2, 2, spec, corrupted=x, init=init, eval_keep_sigma=False)
        assert np.array_equal(a.final.m.data, b.final.m.data)

    def test_mode_mismatch(self, continuous_params, rng):
        with pytest.raises(TagError):
            tagger_forward(np.zeros((1, N)), continuous_params, 2, 1, CorruptionSpec.bitflip(0.2), rng=rng)

    def test_needs_rng_without_init(self, continuous_params):
        with pytest.raises(TagError):
            tagger_forward(np.zeros((1, N)), continuous_params, 2, 1, CorruptionSpec.gaussian(0.2))

    def test_ablation_in_last_iteration(self, continuous_params, rng):
        x = rng.uniform(size=(2, N))
        traj = tagger_forward(x, continuous_params, 3, 2, CorruptionSpec.gaussian(0.2), training=False, rng=rng, ablate=1)
        assert np.all(traj.final.m.data[:, 1] < 1e-30)
        assert not np.all(traj.states[1].m.data[:, 1] < 1e-30)
        assert np.isfinite(traj.costs[-1].item())

    def test_class_outputs(self, rng):
        params = make_params("continuous", class_count=10)
        x = rng.uniform(size=(2, N))
        spec = CorruptionSpec.gaussian(0.2)
        last = tagger_forward(x, params, 3, 2, spec, rng=rng, with_class_head=True)
        assert len(last.class_outputs) == 1
        assert last.class_outputs[0].dims == (2, 3, 11)
        assert last.class_predictions.dims == (2, 10)
        np.testing.assert_allclose(last.class_predictions.data.sum(axis=1), 1.0)
        every = tagger_forward(x, params, 3, 2, spec, rng=rng, with_class_head=True, class_cost_iterations="all")
        assert len(every.class_outputs) == 2

    @pytest.mark.parametrize("mode", ["continuous", "binary"])
    def test_group_permutation_equivariance(self, mode, rng):
        params = make_params(mode)
        spec = CorruptionSpec.gaussian(0.2) if mode == "continuous" else CorruptionSpec.bitflip(0.2)
        x = (rng.random(size=(2, N)) < 0.4).astype(np.float64)
        init = random_state(2, 3, rng)
        perm = [2, 0, 1]
        permuted = GroupState(z=Tensor(init.z.data[:, perm]), m=Tensor(init.m.data[:, perm]), iteration=0)

        a = tagger_forward(x, params, 3, 3, spec, training=False, init=init)
        b = tagger_forward(x, params, 3, 3, spec, training=False, init=permuted)
        for sa, sb in zip(a.states[1:], b.states[1:], strict=True):
            np.testing.assert_allclose(sb.m.data, sa.m.data[:, perm], atol=1e-10)
            np.testing.assert_allclose(sb.z.data, sa.z.data[:, perm], atol=1e-10)
        for qa, qb in zip(a.reconstructions, b.reconstructions, strict=True):
            np.testing.assert_allclose(qa.data, qb.data, atol=1e-10)
        np.testing.assert_allclose(a.cost_values(), b.cost_values(), rtol=1e-10)

    def test_input_permutation_equivariance(self, continuous_params, rng):
        params = continuous_params
        pi = rng.permutation(N)
        arrays = params.to_arrays()
        w_h = arrays["param/W_h"]
        arrays["param/W_h"] = np.concatenate([w_h[b * N : (b + 1) * N][pi] for b in range(4)])
        w_u, b_u = arrays["param/W_u"], arrays["param/b_u"]
        columns = np.concatenate([pi, N + pi])
        arrays["param/W_u"] = w_u[:, columns]
        arrays["param/b_u"] = b_u[columns]
        permuted_params = TaggerParams.from_arrays(params.config, params.mode, params.data_mean, arrays)

        x = rng.uniform(size=(2, N))
        x_tilde = x + rng.normal(scale=0.2, size=x.shape)
        init = random_state(2, 3, rng)
        init_p = GroupState(z=Tensor(init.z.data[..., pi]), m=Tensor(init.m.data[..., pi]), iteration=0)
        spec = CorruptionSpec.gaussian(0.2)

        a = tagger_forward(x, params, 3, 2, spec, corrupted=x_tilde, init=init)
        b = tagger_forward(x[:, pi], permuted_params, 3, 2, spec, corrupted=x_tilde[:, pi], init=init_p)
        for sa, sb in zip(a.states[1:], b.states[1:], strict=True):
            np.testing.assert_allclose(sb.m.data, sa.m.data[..., pi], atol=1e-9)
            np.testing.assert_allclose(sb.z.data, sa.z.data[..., pi], atol=1e-9)
        np.testing.assert_allclose(a.cost_values(), b.cost_values(), rtol=1e-9)

    @pytest.mark.parametrize("mode", ["continuous", "binary"])
    def test_clean_input_only_reaches_the_cost(self, mode, rng):
        params = make_params(mode)
        spec = CorruptionSpec.gaussian(0.2) if mode == "continuous" else CorruptionSpec.bitflip(0.2)
        x = (rng.random(size=(2, N)) < 0.4).astype(np.float64)
        other = 1.0 - x
        x_tilde = (rng.random(size=(2, N)) < 0.4).astype(np.float64)
        init = random_state(2, 3, rng)

        a = tagger_forward(x, params, 3, 3, spec, corrupted=x_tilde, init=init)
        b = tagger_forward(other, params, 3, 3, spec, corrupted=x_tilde, init=init)
        for sa, sb in zip(a.states, b.states, strict=True):
            assert np.array_equal(sa.m.data, sb.m.data)
            assert np.array_equal(sa.z.data, sb.z.data)
        assert a.cost_values() != b.cost_values()


class TestEndToEndGradients:
    """Backpropagation through the unrolled iterations."""

    @pytest.mark.parametrize(("mode", "normalization"), [("continuous", "layer"), ("binary", "layer"), ("continuous", "batch")])
    def test_every_parameter_matches_finite_differences(self, mode, normalization, rng):
        params = make_params(mode, normalization=normalization)
        if mode == "continuous":
            spec = CorruptionSpec.gaussian(0.2)
            x = rng.uniform(size=(3, N))
            x_tilde = x + rng.normal(scale=0.2, size=x.shape)
        else:
            spec = CorruptionSpec.bitflip(0.2)
            x = (rng.random(size=(3, N)) < 0.3).astype(np.float64)
            x_tilde = np.abs(x - (rng.random(size=x.shape) < 0.2))
        init = init_state(3, 2, N, params.data_mean, rng)

        def loss():
            return tagger_forward(
                x, params, 2, 2, spec, corrupted=x_tilde, init=init, debug_invariants=False
            ).mean_cost

        errors = check_gradients(loss, params.params, rng, entries_per_parameter=16)
        worst = max(errors, key=errors.get)
        assert errors[worst] < 1e-3, f"{worst}: {errors[worst]:.2e}"

    @pytest.mark.parametrize("mode", ["continuous", "binary"])
    def test_every_parameter_receives_gradient(self, mode, rng):
        params = make_params(mode, class_count=3)
        if mode == "continuous":
            spec = CorruptionSpec.gaussian(0.2)
            x = rng.uniform(size=(4, N))
        else:
            spec = CorruptionSpec.bitflip(0.2)
            x = (rng.random(size=(4, N)) < 0.3).astype(np.float64)
        weights = Tensor(rng.normal(size=(4, 3)))

        def loss():
            traj = tagger_forward(x, params, 3, 2, spec, rng=make_rng(5), with_class_head=True)
            return traj.mean_cost + sum_(traj.class_predictions * weights)

        grads = analytic_gradients(loss, params.params)
        assert set(grads) == set(params.params)
        if mode == "continuous":
            assert "log_v" in grads
        dead = [name for name, grad in grads.items() if not np.any(grad != 0.0)]
        assert dead == []
