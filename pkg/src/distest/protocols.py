"""Executable estimation protocols with bit-accounted transcripts.

Each protocol returns a ProtocolOutput holding the estimate and the exact
Transcript it would put on the wire; estimate_risk wraps any of them in a
seeded Monte Carlo loop and reports mean-squared error plus bit statistics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import log_ndtr

from . import codec
from .codec import (INDEPENDENT, INTERACTIVE, BitString, Message, QuantizerSpec,
                    Transcript, bits_for_accuracy,
                    encode_improvement_message, pack_fields, quantize,
                    dequantize, transcript_total_bits)
from .errors import DegenerateDesignError, InvalidArgumentError
from .families import (TAG_DATA, TAG_PROTOCOL, BoundedProductSpec,
                       GaussianLocationSpec, ProbitSpec, RegressionSpec,
                       SampleSet, UniformLocationSpec, draw_trials,
                       machine_streams)

SINGLE_MEAN = "single_mean"
GAUSS_QAVG = "gauss_qavg"
ONEBIT = "onebit"
UNIFORM_MIN = "uniform_min"
REGRESS_AVG = "regress_avg"
PROBIT_AVG = "probit_avg"
CENTRALIZED = "centralized"

PROTOCOL_KINDS = {
    SINGLE_MEAN: INDEPENDENT,
    GAUSS_QAVG: INDEPENDENT,
    ONEBIT: INDEPENDENT,
    UNIFORM_MIN: INTERACTIVE,
    REGRESS_AVG: INDEPENDENT,
    PROBIT_AVG: INDEPENDENT,
    CENTRALIZED: "centralized",
}


@dataclass(eq=False)
class ProtocolOutput:
    theta_hat: np.ndarray
    transcript: Transcript
    info: dict = field(default_factory=dict)


@dataclass
class RiskReport:
    """Monte Carlo risk estimate plus communication statistics.

    CSV row order: protocol_kind, trials, mse_mean, mse_stderr, bits_mean,
    bits_max, flagged_trials.
    """

    mse_mean: float
    mse_stderr: float
    trials: int
    bits_mean: float
    bits_max: int
    protocol_kind: str
    flagged_trials: int = 0

    CSV_HEADER = "protocol_kind,trials,mse_mean,mse_stderr,bits_mean,bits_max,flagged_trials"

    def csv_row(self) -> str:
        return (f"{self.protocol_kind},{self.trials},{self.mse_mean!r},"
                f"{self.mse_stderr!r},{self.bits_mean!r},{self.bits_max},"
                f"{self.flagged_trials}")


# ---------------------------------------------------------------------------
# bit accounting formulas (shared by the protocols and the budget tests)

def gauss_qavg_message_bits(d: int, sigma: float, m: int, n: int) -> int:
    """Per-machine bits: d coordinates at cell width sigma^2/(mn) on the
    truncation interval [-1 - sigma/sqrt(n), 1 + sigma/sqrt(n)]."""
    half = 1.0 + sigma / math.sqrt(n)
    return d * bits_for_accuracy(-half, half, sigma**2 / (m * n))


def regress_avg_message_bits(d: int, m: int, n: int) -> int:
    """Per-machine bits: d coordinates at cell width 1/(mn) on [-1, 1]."""
    return d * bits_for_accuracy(-1.0, 1.0, 1.0 / (m * n))


def uniform_min_value_bits(m: int, n: int) -> int:
    """Per-coordinate bits for the interactive minimum: cell width (mn)^-2
    on [-2, 2], i.e. ceil(2 log2(2mn))."""
    return bits_for_accuracy(-2.0, 2.0, 1.0 / (m * n) ** 2)


# ---------------------------------------------------------------------------
# the achievability schemes

def single_machine_quantized_mean(x, budget_bits: int) -> ProtocolOutput:
    """Transmit the sample mean of [0, 1]-valued data on a budget_bits grid."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1 or arr.size < 1:
        raise InvalidArgumentError("need a 1-d sample vector")
    if np.any(arr < 0) or np.any(arr > 1):
        raise InvalidArgumentError("samples must lie in [0, 1]")
    if budget_bits < 1:
        raise InvalidArgumentError("budget must be at least one bit")
    spec = QuantizerSpec(0.0, 1.0, budget_bits, codec.ROUND_NEAREST)
    idx = quantize(arr.mean(), spec)
    transcript = Transcript((Message(1, 1, BitString(idx, budget_bits)),), INDEPENDENT)
    return ProtocolOutput(np.array([dequantize(idx, spec)]), transcript)


def gaussian_quantized_average(samples: SampleSet, sigma: float) -> ProtocolOutput:
    """Truncate-quantize-average for the normal location family.

    Each machine sends its local mean, truncated coordinatewise to
    [-1 - sigma/sqrt(n), 1 + sigma/sqrt(n)] and quantized to cell width
    sigma^2/(mn) (round to nearest); the fusion center averages.
    """
    m, n, d = samples.m, samples.n, samples.d
    half = 1.0 + sigma / math.sqrt(n)
    bits = bits_for_accuracy(-half, half, sigma**2 / (m * n))
    spec = QuantizerSpec(-half, half, bits, codec.ROUND_NEAREST)
    means = samples.blocks.mean(axis=2)           # (m, d)
    idx = quantize(means, spec)
    messages = tuple(Message(i + 1, 1, pack_fields(idx[i], bits)) for i in range(m))
    theta_hat = dequantize(idx, spec).mean(axis=0)
    return ProtocolOutput(theta_hat, Transcript(messages, INDEPENDENT),
                          {"bits_per_message": d * bits})


def onebit_bounded_mean(samples: SampleSet, rand) -> ProtocolOutput:
    """One bit per coordinate: machine i sends Z_ij ~ Bernoulli((1 + X_ij)/2).

    rand may be an integer master seed (per-machine protocol streams are
    derived from it), a Generator, or a precomputed (m, d) uniform array.
    The fusion estimate mean(2 Z - 1) is unbiased for theta.
    """
    if samples.n != 1:
        raise InvalidArgumentError("the one-bit scheme needs n = 1 per machine")
    m, d = samples.m, samples.d
    x = samples.blocks[:, :, 0]
    if np.any(np.abs(x) > 1 + 1e-12):
        raise InvalidArgumentError("one-bit inputs must lie in [-1, 1]")
    if isinstance(rand, np.ndarray):
        u = rand
    elif isinstance(rand, np.random.Generator):
        u = rand.random((m, d))
    else:
        gens = machine_streams(rand, m, TAG_PROTOCOL)
        u = np.stack([g.random(d) for g in gens])
    z = (u < (1.0 + x) / 2.0)
    powers = np.array([1 << k for k in range(d - 1, -1, -1)], dtype=object)
    vals = (z * powers).sum(axis=1)
    messages = tuple(Message(i + 1, 1, BitString(int(vals[i]), d)) for i in range(m))
    theta_hat = (2.0 * z - 1.0).mean(axis=0)
    return ProtocolOutput(theta_hat, Transcript(messages, INDEPENDENT))


def uniform_interactive_min(samples: SampleSet, quantize_state: bool = True) -> ProtocolOutput:
    """Interactive minimum protocol for the uniform location family.

    Machine 1 broadcasts all d local minima quantized on [-2, 2] to cell
    width (mn)^-2 rounding down; machines 2..m in index order broadcast only
    the coordinates that strictly improve the running state s, as an index
    list plus quantized values; the output is s + 1.

    quantize_state=False is a test hook: the transcript is accounted
    identically but the fusion state keeps exact local minima.
    """
    m, n, d = samples.m, samples.n, samples.d
    vbits = uniform_min_value_bits(m, n)
    spec = QuantizerSpec(-2.0, 2.0, vbits, codec.ROUND_DOWN)
    local_min = samples.blocks.min(axis=2)        # (m, d)

    idx0 = quantize(np.clip(local_min[0], -2.0, 2.0), spec)
    state = dequantize(idx0, spec) if quantize_state else local_min[0].copy()
    messages = [Message(1, 1, pack_fields(idx0, vbits))]
    improved = np.zeros((m, d), dtype=bool)
    improved[0] = True
    for i in range(1, m):
        better = np.nonzero(local_min[i] < state)[0]
        if better.size:
            idx = quantize(local_min[i, better], spec)
            state[better] = dequantize(idx, spec) if quantize_state else local_min[i, better]
            payload = encode_improvement_message(better, np.atleast_1d(idx), d, vbits)
            improved[i, better] = True
        else:
            payload = BitString()
        messages.append(Message(i + 1, i + 1, payload))
    return ProtocolOutput(np.asarray(state) + 1.0, Transcript(tuple(messages), INTERACTIVE),
                          {"improved": improved, "value_bits": vbits})


def _local_least_squares(spec: RegressionSpec):
    """Per-machine solve operators (A^T A)^-1 A^T, computed once."""
    solvers = []
    for a in spec.designs:
        gram = a.T @ a
        try:
            solvers.append(np.linalg.solve(gram, a.T))
        except np.linalg.LinAlgError as err:
            raise DegenerateDesignError(f"singular local Gram: {err}") from err
    return solvers


def regression_local_average(spec: RegressionSpec, responses,
                             _solvers=None) -> ProtocolOutput:
    """Average of truncated, quantized local least-squares solutions.

    Coordinates are quantized on [-1, 1] to cell width 1/(mn); the honest
    charge is d * ceil(log2(2mn)) bits per machine, one bit per coordinate
    more than the nominal ceil(d log2(mn)) count, which is reported in info.
    """
    m, n, d = spec.m, spec.n, spec.d
    y = np.asarray(responses, dtype=float)
    if y.shape != (m, n):
        raise InvalidArgumentError(f"responses must have shape {(m, n)}")
    solvers = _solvers if _solvers is not None else _local_least_squares(spec)
    bits = bits_for_accuracy(-1.0, 1.0, 1.0 / (m * n))
    qspec = QuantizerSpec(-1.0, 1.0, bits, codec.ROUND_NEAREST)
    local = np.stack([solvers[i] @ y[i] for i in range(m)])
    idx = quantize(np.clip(local, -1.0, 1.0), qspec)
    messages = tuple(Message(i + 1, 1, pack_fields(idx[i], bits)) for i in range(m))
    theta_hat = dequantize(idx, qspec).mean(axis=0)
    info = {"charged_bits_per_machine": d * bits,
            "nominal_bits_per_machine": math.ceil(d * math.log2(m * n))}
    return ProtocolOutput(theta_hat, Transcript(messages, INDEPENDENT), info)


def probit_mle(design, z, max_iter: int = 100, grad_tol: float = 1e-9,
               diverge_norm: float = 1e3):
    """Damped Newton ascent of the concave probit log-likelihood.

    Returns (theta, flagged); flagged marks separation, detected by the
    iterate norm exceeding diverge_norm, in which case the boundary-truncated
    iterate is returned.
    """
    a = np.asarray(design, dtype=float)
    z = np.asarray(z, dtype=float)
    d = a.shape[1]
    theta = np.zeros(d)

    def loglik(th):
        u = a @ th
        return float(z @ log_ndtr(u) + (1.0 - z) @ log_ndtr(-u))

    ll = loglik(theta)
    for _ in range(max_iter):
        u = a @ theta
        lam_p = np.exp(-u * u / 2.0 - 0.5 * math.log(2 * math.pi) - log_ndtr(u))
        lam_m = np.exp(-u * u / 2.0 - 0.5 * math.log(2 * math.pi) - log_ndtr(-u))
        score = z * lam_p - (1.0 - z) * lam_m
        grad = a.T @ score
        if np.linalg.norm(grad) < grad_tol:
            break
        weights = z * lam_p * (lam_p + u) + (1.0 - z) * lam_m * (lam_m - u)
        hess = a.T @ (weights[:, None] * a)
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError as err:
            raise DegenerateDesignError(f"singular probit Hessian: {err}") from err
        t = 1.0
        accepted = False
        while t > 2**-30:
            cand = theta + t * step
            cand_ll = loglik(cand)
            if cand_ll > ll:
                theta, ll = cand, cand_ll
                accepted = True
                break
            t *= 0.5
        if not accepted:
            break
        if np.linalg.norm(theta) > diverge_norm:
            return np.clip(theta, -1.0, 1.0), True
    return theta, False


def probit_local_average(spec: ProbitSpec, responses) -> ProtocolOutput:
    """Average of truncated, quantized local probit MLEs (same grid as the
    regression scheme). Separation at any machine flags the run in info."""
    m, n, d = spec.m, spec.n, spec.d
    z = np.asarray(responses, dtype=float)
    if z.shape != (m, n):
        raise InvalidArgumentError(f"responses must have shape {(m, n)}")
    bits = bits_for_accuracy(-1.0, 1.0, 1.0 / (m * n))
    qspec = QuantizerSpec(-1.0, 1.0, bits, codec.ROUND_NEAREST)
    local = np.empty((m, d))
    flagged = 0
    for i in range(m):
        est, flag = probit_mle(spec.designs[i], z[i])
        local[i] = est
        flagged += int(flag)
    idx = quantize(np.clip(local, -1.0, 1.0), qspec)
    messages = tuple(Message(i + 1, 1, pack_fields(idx[i], bits)) for i in range(m))
    theta_hat = dequantize(idx, qspec).mean(axis=0)
    return ProtocolOutput(theta_hat, Transcript(messages, INDEPENDENT),
                          {"flagged": flagged, "charged_bits_per_machine": d * bits})


def centralized_baseline(spec, samples) -> np.ndarray:
    """Family-appropriate estimator with access to the pooled sample.

    Gaussian / bounded: pooled mean; uniform: pooled per-coordinate minimum
    plus one; regression: pooled least squares; probit: pooled MLE.
    """
    if isinstance(spec, (GaussianLocationSpec, BoundedProductSpec)):
        return samples.blocks.mean(axis=(0, 2))
    if isinstance(spec, UniformLocationSpec):
        return samples.blocks.min(axis=(0, 2)) + 1.0
    if isinstance(spec, RegressionSpec):
        y = samples.blocks if isinstance(samples, SampleSet) else np.asarray(samples)
        a_all = np.vstack(spec.designs)
        sol, *_ = np.linalg.lstsq(a_all, np.asarray(y, dtype=float).ravel(), rcond=None)
        return sol
    if isinstance(spec, ProbitSpec):
        z = samples.blocks if isinstance(samples, SampleSet) else np.asarray(samples)
        a_all = np.vstack(spec.designs)
        est, _ = probit_mle(a_all, np.asarray(z, dtype=float).ravel())
        return est
    raise InvalidArgumentError(f"no centralized baseline for {type(spec).__name__}")


# ---------------------------------------------------------------------------
# Monte Carlo risk measurement

_EMPTY_INDEPENDENT = Transcript((), INDEPENDENT)


def _chunk_sizes(trials: int, per_trial_values: int):
    chunk = max(1, int(4_000_000 // max(1, per_trial_values)))
    out = []
    left = trials
    while left > 0:
        k = min(chunk, left)
        out.append(k)
        left -= k
    return out


def estimate_risk(protocol: str, spec, trials: int, seed: int,
                  m: int = None, n: int = None, budget_bits: int = None) -> RiskReport:
    """Run `trials` seeded protocol executions and report risk + bit stats.

    Deterministic given (protocol, spec, trials, seed): data for machine i
    comes from its TAG_DATA stream, protocol randomness from its TAG_PROTOCOL
    stream, trials consuming consecutive blocks.
    """
    if trials < 2:
        raise InvalidArgumentError("need at least 2 trials for a standard error")
    if protocol not in PROTOCOL_KINDS:
        raise InvalidArgumentError(f"unknown protocol id {protocol!r}")
    if isinstance(spec, (RegressionSpec, ProbitSpec)):
        m, n = spec.m, spec.n
    if m is None or n is None:
        raise InvalidArgumentError("mean families need explicit m and n")
    if protocol == ONEBIT and n != 1:
        raise InvalidArgumentError("the one-bit scheme needs n = 1")
    if protocol == SINGLE_MEAN:
        if m != 1:
            raise InvalidArgumentError("single_mean is a single-machine protocol")
        if budget_bits is None:
            raise InvalidArgumentError("single_mean needs budget_bits")
        if not isinstance(spec, BoundedProductSpec):
            raise InvalidArgumentError("single_mean runs on the bounded family")

    d = spec.d
    # single_mean works on [0, 1]; the bounded family maps to it affinely
    if protocol == SINGLE_MEAN:
        theta_true = (1.0 + spec.theta) / 2.0
    else:
        theta_true = spec.theta

    data_gens = machine_streams(seed, m, TAG_DATA)
    proto_gens = machine_streams(seed, m, TAG_PROTOCOL) if protocol == ONEBIT else None
    solvers = _local_least_squares(spec) if protocol == REGRESS_AVG else None

    sqerr = np.empty(trials)
    bits = np.zeros(trials, dtype=np.int64)
    flagged = 0
    pos = 0
    for k in _chunk_sizes(trials, m * d * n):
        blocks = draw_trials(spec, data_gens, n, k)
        uniforms = (np.stack([g.random((k, d)) for g in proto_gens], axis=1)
                    if proto_gens is not None else None)
        for t in range(k):
            if isinstance(spec, (RegressionSpec, ProbitSpec)):
                responses = blocks[t]
                if protocol == REGRESS_AVG:
                    out = regression_local_average(spec, responses, _solvers=solvers)
                elif protocol == PROBIT_AVG:
                    out = probit_local_average(spec, responses)
                elif protocol == CENTRALIZED:
                    kind = "regression" if isinstance(spec, RegressionSpec) else "probit"
                    ss = SampleSet(kind, responses, m, n, d)
                    out = ProtocolOutput(centralized_baseline(spec, ss), _EMPTY_INDEPENDENT)
                else:
                    raise InvalidArgumentError(
                        f"protocol {protocol!r} does not run on {type(spec).__name__}")
            else:
                ss = SampleSet("mean", blocks[t], m, d=d, n=n)
                if protocol == SINGLE_MEAN:
                    out = single_machine_quantized_mean(
                        (1.0 + ss.blocks[0].ravel()) / 2.0, budget_bits)
                elif protocol == GAUSS_QAVG:
                    out = gaussian_quantized_average(ss, spec.sigma)
                elif protocol == ONEBIT:
                    out = onebit_bounded_mean(ss, uniforms[t])
                elif protocol == UNIFORM_MIN:
                    out = uniform_interactive_min(ss)
                elif protocol == CENTRALIZED:
                    out = ProtocolOutput(centralized_baseline(spec, ss), _EMPTY_INDEPENDENT)
                else:
                    raise InvalidArgumentError(
                        f"protocol {protocol!r} does not run on {type(spec).__name__}")
            diff = out.theta_hat - theta_true
            sqerr[pos] = diff @ diff
            bits[pos] = transcript_total_bits(out.transcript)
            flagged += int(out.info.get("flagged", 0) > 0)
            pos += 1
    mse_mean = float(sqerr.mean())
    mse_stderr = float(sqerr.std(ddof=1) / math.sqrt(trials))
    return RiskReport(mse_mean=mse_mean, mse_stderr=mse_stderr, trials=trials,
                      bits_mean=float(bits.mean()), bits_max=int(bits.max()),
                      protocol_kind=PROTOCOL_KINDS[protocol], flagged_trials=flagged)
