import math

import numpy as np
import pytest

from distest import codec, families
from distest.codec import transcript_total_bits
from distest.designs import build_designs
from distest.errors import InvalidArgumentError
from distest.families import (BoundedProductSpec, GaussianLocationSpec,
                              ProbitSpec, RegressionSpec, SampleSet,
                              UniformLocationSpec, draw_trials,
                              machine_streams, sample)
from distest.protocols import (RiskReport, centralized_baseline, estimate_risk,
                               gauss_qavg_message_bits,
                               gaussian_quantized_average, onebit_bounded_mean,
                               probit_local_average, probit_mle,
                               regression_local_average,
                               regress_avg_message_bits,
                               single_machine_quantized_mean,
                               uniform_interactive_min, uniform_min_value_bits)


def mean_sample(spec, m, n, seed):
    return sample(spec, m=m, n=n, seed=seed)


class TestSingleMachineQuantizedMean:
    def test_constant_samples(self):
        out = single_machine_quantized_mean(np.full(64, 0.5), 10)
        assert abs(out.theta_hat[0] - 0.5) <= 2**-10
        assert transcript_total_bits(out.transcript) == 10

    def test_one_bit_grid(self):
        out = single_machine_quantized_mean(np.array([0.1, 0.2]), 1)
        assert out.theta_hat[0] in (0.25, 0.75)

    def test_mse_bound_bernoulli_half(self):
        spec = BoundedProductSpec(np.array([0.0]), "two_point")  # maps to Bern(1/2)
        rep = estimate_risk("single_mean", spec, trials=2000, seed=8, m=1,
                            n=1024, budget_bits=10)
        assert rep.mse_mean <= 2 / 1024
        assert rep.bits_max == rep.bits_mean == 10

    def test_input_validation(self):
        with pytest.raises(InvalidArgumentError):
            single_machine_quantized_mean(np.array([-0.2, 0.5]), 4)
        with pytest.raises(InvalidArgumentError):
            single_machine_quantized_mean(np.array([0.2, 0.5]), 0)


class TestGaussianQuantizedAverage:
    def test_small_sigma_tracks_sample(self):
        spec = GaussianLocationSpec(np.full(3, 0.7), 1e-3)
        ss = mean_sample(spec, 1, 1, seed=0)
        out = gaussian_quantized_average(ss, 1e-3)
        cell = (2 + 2e-3) / 2 ** codec.bits_for_accuracy(
            -1 - 1e-3, 1 + 1e-3, 1e-6)
        assert np.all(np.abs(out.theta_hat - ss.blocks[0, :, 0]) <= cell)

    def test_transcript_accounting(self):
        d, sigma, m, n = 4, 1.0, 16, 64
        spec = GaussianLocationSpec(np.full(d, 0.2), sigma)
        out = gaussian_quantized_average(mean_sample(spec, m, n, 3), sigma)
        assert len(out.transcript.messages) == m
        per_machine = gauss_qavg_message_bits(d, sigma, m, n)
        assert per_machine == 48
        assert all(msg.payload.length == per_machine
                   for msg in out.transcript.messages)
        assert transcript_total_bits(out.transcript) == m * per_machine

    def test_risk_near_centralized_rate(self):
        spec = GaussianLocationSpec(np.array([0.3, -0.2, 0.1, 0.4]), 1.0)
        rep = estimate_risk("gauss_qavg", spec, trials=1500, seed=5, m=16, n=64)
        assert rep.mse_mean / (4 / 1024) == pytest.approx(1.0, abs=0.25)


class TestOnebit:
    def test_degenerate_all_ones(self):
        spec = BoundedProductSpec(np.ones(3), "two_point")
        ss = mean_sample(spec, 5, 1, seed=0)
        out = onebit_bounded_mean(ss, 12)
        assert np.array_equal(out.theta_hat, np.ones(3))
        assert transcript_total_bits(out.transcript) == 5 * 3

    def test_exact_variance_at_zero(self):
        spec = BoundedProductSpec(np.zeros(8), "two_point")
        rep = estimate_risk("onebit", spec, trials=4000, seed=2, m=100, n=1)
        assert rep.mse_mean == pytest.approx(0.08, rel=0.05)
        assert rep.bits_mean == rep.bits_max == 800

    def test_unbiased(self):
        theta = np.array([-0.6, 0.0, 0.3, 0.8])
        spec = BoundedProductSpec(theta, "two_point")
        m, trials = 40, 3000
        gens = machine_streams(31, m)
        blocks = draw_trials(spec, gens, 1, trials)
        proto = machine_streams(31, m, families.TAG_PROTOCOL)
        uniforms = np.stack([g.random((trials, 4)) for g in proto], axis=1)
        hats = np.empty((trials, 4))
        for t in range(trials):
            ss = SampleSet("mean", blocks[t], m, n=1, d=4)
            hats[t] = onebit_bounded_mean(ss, uniforms[t]).theta_hat
        stderr = hats.std(axis=0, ddof=1) / math.sqrt(trials)
        assert np.all(np.abs(hats.mean(axis=0) - theta) <= 4 * stderr)

    def test_requires_unit_range_and_single_observation(self):
        ss = SampleSet("mean", np.full((2, 1, 1), 3.0), 2, n=1, d=1)
        with pytest.raises(InvalidArgumentError):
            onebit_bounded_mean(ss, 0)
        spec = BoundedProductSpec(np.zeros(2), "two_point")
        with pytest.raises(InvalidArgumentError):
            onebit_bounded_mean(mean_sample(spec, 2, 3, 0), 0)


class TestUniformInteractiveMin:
    def test_single_machine_transcript(self):
        spec = UniformLocationSpec(np.array([0.1, -0.2, 0.5]))
        out = uniform_interactive_min(mean_sample(spec, 1, 16, 7))
        assert len(out.transcript.messages) == 1
        assert out.transcript.messages[0].payload.length == (
            3 * uniform_min_value_bits(1, 16))

    def test_state_matches_global_min_oracle(self):
        spec = UniformLocationSpec(np.array([0.2, -0.3, 0.0]))
        m, n = 8, 16
        cell = 4.0 / 2 ** uniform_min_value_bits(m, n)
        for seed in range(30):
            ss = mean_sample(spec, m, n, seed)
            gmin = ss.blocks.min(axis=(0, 2))
            s = uniform_interactive_min(ss).theta_hat - 1.0
            assert np.all(s <= gmin + 1e-15)
            assert np.all(s >= gmin - cell - 1e-15)
            exact = uniform_interactive_min(ss, quantize_state=False).theta_hat - 1.0
            assert np.array_equal(exact, gmin)

    def test_bit_accounting_matches_improvement_lists(self):
        spec = UniformLocationSpec(np.array([0.2, -0.3, 0.0]))
        m, n, d = 8, 16, 3
        vb = uniform_min_value_bits(m, n)
        for seed in range(10):
            out = uniform_interactive_min(mean_sample(spec, m, n, seed))
            improved = out.info["improved"]
            expected = d * vb + int(improved[1:].sum()) * (codec.ceil_log2(d) + vb)
            assert transcript_total_bits(out.transcript) == expected

    def test_improvement_frequency_is_one_over_i(self):
        # exchangeability oracle: coordinate j improves at machine i w.p. 1/i
        spec = UniformLocationSpec(np.array([0.2, -0.3, 0.0]))
        m, n, trials = 8, 16, 3000
        gens = machine_streams(5, m)
        blocks = draw_trials(spec, gens, n, trials)
        freq = np.zeros((m, 3))
        for t in range(trials):
            ss = SampleSet("mean", blocks[t], m, n=n, d=3)
            freq += uniform_interactive_min(ss).info["improved"]
        freq /= trials
        for i in range(1, m):
            p = 1.0 / (i + 1)
            stderr = math.sqrt(p * (1 - p) / trials)
            assert np.all(np.abs(freq[i] - p) <= 4 * stderr)


class TestRegressionLocalAverage:
    def test_noiseless_recovery(self):
        designs = build_designs("orthogonal", 4, 20, 3, seed=1)
        spec = RegressionSpec(designs, np.array([0.5, -0.5, 0.25]), 0.0)
        ss = sample(spec, seed=0)
        out = regression_local_average(spec, ss.blocks)
        cell = 2.0 / 2 ** codec.bits_for_accuracy(-1, 1, 1 / 80)
        assert float((out.theta_hat - spec.theta) @ (out.theta_hat - spec.theta)) <= 3 * cell**2

    def test_per_machine_bits(self):
        assert regress_avg_message_bits(3, 10, 30) == 30
        designs = build_designs("identity", 10, 30, 3, seed=0)
        spec = RegressionSpec(designs, np.zeros(3), 1.0)
        out = regression_local_average(spec, sample(spec, seed=1).blocks)
        assert all(msg.payload.length == 30 for msg in out.transcript.messages)
        assert out.info["nominal_bits_per_machine"] == math.ceil(3 * math.log2(300))

    def test_risk_matches_trace_oracle(self):
        designs = build_designs("orthogonal", 10, 30, 3, seed=9)
        spec = RegressionSpec(designs, np.array([0.4, -0.2, 0.7]), 1.0)
        rep = estimate_risk("regress_avg", spec, trials=1500, seed=4)
        oracle = sum(np.trace(np.linalg.inv(a.T @ a)) for a in designs) / 100
        assert rep.mse_mean == pytest.approx(oracle, rel=0.15)


class TestProbit:
    def test_mle_symmetry_at_zero(self):
        designs = build_designs("orthogonal", 8, 120, 2, seed=3)
        spec = ProbitSpec(designs, np.zeros(2))
        gens = machine_streams(6, 8)
        blocks = draw_trials(spec, gens, 120, 400)
        hats = np.empty((400, 2))
        for t in range(400):
            hats[t] = probit_local_average(spec, blocks[t]).theta_hat
        stderr = hats.std(axis=0, ddof=1) / math.sqrt(400)
        assert np.all(np.abs(hats.mean(axis=0)) <= 3 * stderr)

    def test_mle_concentrates_at_fisher_rate(self):
        # Fisher information oracle at u = 0.5: var ~ 1/(n I_F) = 1/5812
        rng = np.random.default_rng(0)
        from scipy.stats import norm
        a = np.ones((10000, 1))
        misses = 0
        for _ in range(100):
            z = (rng.random(10000) < norm.cdf(0.5)).astype(float)
            est, flag = probit_mle(a, z)
            assert not flag
            misses += int(abs(est[0] - 0.5) > 0.05)
        assert misses <= 1  # 0.05 is ~3.8 standard deviations

    def test_mse_quarters_when_n_quadruples(self):
        theta = np.array([0.3, -0.4])
        reps = {}
        for n in (200, 800):
            designs = build_designs("orthogonal", 8, n, 2, seed=11)
            spec = ProbitSpec(designs, theta)
            reps[n] = estimate_risk("probit_avg", spec, trials=600, seed=13)
        ratio = reps[200].mse_mean / reps[800].mse_mean
        assert 3.0 <= ratio <= 5.0

    def test_separation_flagging(self):
        est, flag = probit_mle(np.full((20, 1), 1e-3), np.ones(20))
        assert flag
        assert abs(est[0]) <= 1.0
        designs = (np.full((5, 1), 1e-3),) * 4
        spec = ProbitSpec(designs, np.array([0.2]))
        rep = estimate_risk("probit_avg", spec, trials=160, seed=3)
        assert rep.flagged_trials > 0
        assert math.isfinite(rep.mse_mean)


class TestCentralizedBaselines:
    def test_gaussian_matches_rate(self):
        spec = GaussianLocationSpec(np.array([0.3, -0.2, 0.1, 0.4]), 1.0)
        rep = estimate_risk("centralized", spec, trials=5000, seed=1, m=16, n=64)
        assert rep.mse_mean == pytest.approx(4 / 1024, rel=0.05)
        assert rep.bits_max == 0

    def test_uniform_matches_order_statistics(self):
        spec = UniformLocationSpec(np.array([0.2, -0.3, 0.0]))
        rep = estimate_risk("centralized", spec, trials=5000, seed=2, m=8, n=16)
        oracle = 3 * 8 / (129 * 130)
        assert rep.mse_mean == pytest.approx(oracle, rel=0.15)

    def test_regression_noiseless_exact(self):
        designs = build_designs("orthogonal", 3, 10, 2, seed=5)
        spec = RegressionSpec(designs, np.array([0.3, -0.7]), 0.0)
        ss = sample(spec, seed=0)
        est = centralized_baseline(spec, ss)
        assert np.allclose(est, spec.theta, atol=1e-10)


class TestEstimateRisk:
    def test_deterministic_protocol_zero_stderr(self):
        designs = build_designs("orthogonal", 3, 10, 2, seed=5)
        spec = RegressionSpec(designs, np.array([0.3, -0.7]), 0.0)
        rep = estimate_risk("regress_avg", spec, trials=50, seed=0)
        assert rep.mse_stderr == 0.0

    def test_same_seed_bit_identical(self):
        spec = BoundedProductSpec(np.zeros(4), "two_point")
        a = estimate_risk("onebit", spec, trials=200, seed=5, m=10, n=1)
        b = estimate_risk("onebit", spec, trials=200, seed=5, m=10, n=1)
        assert a == b
        c = estimate_risk("onebit", spec, trials=200, seed=6, m=10, n=1)
        assert a != c

    def test_csv_row_shape(self):
        rep = RiskReport(0.5, 0.1, 10, 32.0, 32, "independent", 0)
        assert RiskReport.CSV_HEADER.count(",") == rep.csv_row().count(",")
        assert rep.csv_row().split(",")[0] == "independent"

    def test_validation(self):
        spec = BoundedProductSpec(np.zeros(4), "two_point")
        with pytest.raises(InvalidArgumentError):
            estimate_risk("onebit", spec, trials=1, seed=0, m=4, n=1)
        with pytest.raises(InvalidArgumentError):
            estimate_risk("onebit", spec, trials=10, seed=0, m=4, n=2)
        with pytest.raises(InvalidArgumentError):
            estimate_risk("warp", spec, trials=10, seed=0, m=4, n=1)
        with pytest.raises(InvalidArgumentError):
            estimate_risk("single_mean", spec, trials=10, seed=0, m=2, n=4,
                          budget_bits=3)


class TestIndependenceStructure:
    def permuted(self, ss, keep):
        others = [i for i in range(ss.m) if i != keep]
        blocks = ss.blocks.copy()
        blocks[others] = blocks[others[::-1]]
        return SampleSet(ss.kind, blocks, ss.m, n=ss.n, d=ss.d)

    def test_gauss_message_depends_only_on_own_data(self):
        spec = GaussianLocationSpec(np.full(3, 0.1), 1.0)
        ss = mean_sample(spec, 6, 8, seed=3)
        out_a = gaussian_quantized_average(ss, 1.0)
        out_b = gaussian_quantized_average(self.permuted(ss, 2), 1.0)
        assert out_a.transcript.messages[2] == out_b.transcript.messages[2]

    def test_onebit_message_depends_only_on_own_data_and_stream(self):
        spec = BoundedProductSpec(np.zeros(4), "two_point")
        ss = mean_sample(spec, 6, 1, seed=4)
        out_a = onebit_bounded_mean(ss, 99)
        out_b = onebit_bounded_mean(self.permuted(ss, 3), 99)
        assert out_a.transcript.messages[3] == out_b.transcript.messages[3]

    def test_regression_message_depends_only_on_own_responses(self):
        designs = build_designs("orthogonal", 5, 12, 2, seed=6)
        spec = RegressionSpec(designs, np.array([0.2, -0.1]), 1.0)
        y = sample(spec, seed=2).blocks
        out_a = regression_local_average(spec, y)
        y_perm = y.copy()
        y_perm[[0, 1, 3, 4]] = y_perm[[4, 3, 1, 0]]
        out_b = regression_local_average(spec, y_perm)
        assert out_a.transcript.messages[2] == out_b.transcript.messages[2]


class TestMonotonicityInN:
    @pytest.mark.parametrize("protocol,make_spec", [
        ("gauss_qavg", lambda: GaussianLocationSpec(np.array([0.3, -0.2]), 1.0)),
        ("uniform_min", lambda: UniformLocationSpec(np.array([0.3, -0.2]))),
    ])
    def test_mse_improves_with_four_times_n(self, protocol, make_spec):
        spec = make_spec()
        small = estimate_risk(protocol, spec, trials=1200, seed=7, m=8, n=8)
        large = estimate_risk(protocol, spec, trials=1200, seed=7, m=8, n=32)
        slack = 3 * (small.mse_stderr + large.mse_stderr)
        assert large.mse_mean <= small.mse_mean + slack

    def test_regression_mse_improves_with_four_times_n(self):
        theta = np.array([0.2, -0.4])
        reps = {}
        for n in (8, 32):
            designs = build_designs("orthogonal", 6, n, 2, seed=8)
            spec = RegressionSpec(designs, theta, 1.0)
            reps[n] = estimate_risk("regress_avg", spec, trials=1200, seed=9)
        slack = 3 * (reps[8].mse_stderr + reps[32].mse_stderr)
        assert reps[32].mse_mean <= reps[8].mse_mean + slack


class TestBudgetCompliance:
    def test_every_protocol_matches_its_accounting_formula(self):
        gspec = GaussianLocationSpec(np.array([0.1, -0.2, 0.3]), 0.8)
        rep = estimate_risk("gauss_qavg", gspec, trials=5, seed=0, m=7, n=9)
        assert rep.bits_mean == rep.bits_max == 7 * gauss_qavg_message_bits(3, 0.8, 7, 9)

        bspec = BoundedProductSpec(np.zeros(5), "two_point")
        rep = estimate_risk("onebit", bspec, trials=5, seed=0, m=9, n=1)
        assert rep.bits_mean == rep.bits_max == 9 * 5

        designs = build_designs("orthogonal", 6, 11, 2, seed=2)
        rspec = RegressionSpec(designs, np.array([0.1, 0.2]), 1.0)
        rep = estimate_risk("regress_avg", rspec, trials=5, seed=0)
        assert rep.bits_mean == rep.bits_max == 6 * regress_avg_message_bits(2, 6, 11)

        spec = BoundedProductSpec(np.array([0.3]), "two_point")
        rep = estimate_risk("single_mean", spec, trials=5, seed=0, m=1, n=64,
                            budget_bits=9)
        assert rep.bits_mean == rep.bits_max == 9
