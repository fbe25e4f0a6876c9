"""Distribution families, deterministic seeded sampling, and the two
mean-to-regression / regression-to-probit reductions.

Seeding contract
----------------
All randomness flows from one master seed. The stream for machine ``i`` under
purpose tag ``tag`` is::

    numpy.random.default_rng(numpy.random.SeedSequence(seed, spawn_key=(tag, i)))

Trial t of a Monte Carlo run consumes the t-th block of that stream, so a
machine's data never depends on how many machines participate, and repeated
runs with the same seed are bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (DegenerateDesignError, InvalidArgumentError,
                     ReductionInfeasibleError)

TAG_DATA = 0
TAG_PROTOCOL = 1

_PSD_TOL = 1e-9


def machine_stream(seed: int, machine: int, tag: int = TAG_DATA) -> np.random.Generator:
    """Derived generator for one machine; see the module seeding contract."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(tag), int(machine)))
    return np.random.default_rng(ss)


def machine_streams(seed: int, m: int, tag: int = TAG_DATA):
    return [machine_stream(seed, i, tag) for i in range(m)]


def _as_theta(theta, d=None) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(theta, dtype=float))
    if arr.ndim != 1:
        raise InvalidArgumentError("theta must be a scalar or 1-d vector")
    if d is not None and arr.size == 1 and d > 1:
        arr = np.full(d, arr[0])
    if np.any(np.abs(arr) > 1 + 1e-12):
        raise InvalidArgumentError("every |theta_j| must be <= 1")
    return arr


@dataclass(frozen=True, eq=False)
class GaussianLocationSpec:
    """N(theta, sigma^2 I) with theta in [-1, 1]^d."""

    theta: np.ndarray
    sigma: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "theta", _as_theta(self.theta))
        if not self.sigma > 0:
            raise InvalidArgumentError("sigma must be positive")

    @property
    def d(self) -> int:
        return self.theta.size


TWO_POINT = "two_point"
UNIFORM_INTERVAL = "uniform_interval"


@dataclass(frozen=True, eq=False)
class BoundedProductSpec:
    """Product distribution on [-1, 1]^d with coordinate means theta.

    two_point puts mass (1 +/- theta_j)/2 on +/-1; uniform_interval is uniform
    on [theta_j - w_j, theta_j + w_j] with w_j = 1 - |theta_j|, so the mean is
    theta_j and the support stays in [-1, 1].
    """

    theta: np.ndarray
    law: str = TWO_POINT

    def __post_init__(self):
        object.__setattr__(self, "theta", _as_theta(self.theta))
        if self.law not in (TWO_POINT, UNIFORM_INTERVAL):
            raise InvalidArgumentError(f"unknown bounded law {self.law!r}")

    @property
    def d(self) -> int:
        return self.theta.size


@dataclass(frozen=True, eq=False)
class UniformLocationSpec:
    """Coordinate j uniform on [theta_j - 1, theta_j + 1]."""

    theta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "theta", _as_theta(self.theta))

    @property
    def d(self) -> int:
        return self.theta.size


def _check_designs(designs):
    designs = tuple(np.asarray(a, dtype=float) for a in designs)
    if not designs:
        raise InvalidArgumentError("need at least one design matrix")
    n, d = designs[0].shape
    for a in designs:
        if a.ndim != 2 or a.shape != (n, d):
            raise InvalidArgumentError("all designs must share one (n, d) shape")
    if n < d:
        raise DegenerateDesignError("designs need n >= d for full column rank")
    return designs, n, d


@dataclass(frozen=True, eq=False)
class RegressionSpec:
    """Fixed-design linear model y = A theta + noise, noise ~ N(0, sigma^2 I).

    sigma = 0 is allowed and gives the noiseless (deterministic) model.
    """

    designs: tuple
    theta: np.ndarray
    sigma: float = 1.0

    def __post_init__(self):
        designs, n, d = _check_designs(self.designs)
        object.__setattr__(self, "designs", designs)
        object.__setattr__(self, "theta", _as_theta(self.theta, d))
        if self.theta.size != d:
            raise InvalidArgumentError("theta length must match design columns")
        if self.sigma < 0:
            raise InvalidArgumentError("sigma must be >= 0")
        design_eigenbounds(designs)  # raises on rank deficiency

    @property
    def m(self) -> int:
        return len(self.designs)

    @property
    def n(self) -> int:
        return self.designs[0].shape[0]

    @property
    def d(self) -> int:
        return self.designs[0].shape[1]


@dataclass(frozen=True, eq=False)
class ProbitSpec:
    """Binary responses with P(Z=1 | a, theta) = Phi(a . theta)."""

    designs: tuple
    theta: np.ndarray

    def __post_init__(self):
        designs, n, d = _check_designs(self.designs)
        object.__setattr__(self, "designs", designs)
        object.__setattr__(self, "theta", _as_theta(self.theta, d))
        if self.theta.size != d:
            raise InvalidArgumentError("theta length must match design columns")
        design_eigenbounds(designs)

    @property
    def m(self) -> int:
        return len(self.designs)

    @property
    def n(self) -> int:
        return self.designs[0].shape[0]

    @property
    def d(self) -> int:
        return self.designs[0].shape[1]


@dataclass(eq=False)
class SampleSet:
    """Per-machine data blocks plus the (m, n, d) bookkeeping.

    kind "mean": blocks has shape (m, d, n). kind "regression"/"probit":
    blocks has shape (m, n) of responses / bits.
    """

    kind: str
    blocks: np.ndarray
    m: int
    n: int
    d: int

    def __post_init__(self):
        expected = (self.m, self.d, self.n) if self.kind == "mean" else (self.m, self.n)
        if self.blocks.shape != expected:
            raise InvalidArgumentError(
                f"blocks shape {self.blocks.shape} != expected {expected}")


def _draw_mean_blocks(spec, gen, n: int, trials: int) -> np.ndarray:
    """(trials, d, n) block for one machine, consumed from gen in trial order."""
    d = spec.d
    theta = spec.theta[:, None]
    if isinstance(spec, GaussianLocationSpec):
        return theta + spec.sigma * gen.standard_normal((trials, d, n))
    if isinstance(spec, BoundedProductSpec):
        u = gen.random((trials, d, n))
        if spec.law == TWO_POINT:
            return np.where(u < (1.0 + theta) / 2.0, 1.0, -1.0)
        w = (1.0 - np.abs(spec.theta))[:, None]
        return theta + w * (2.0 * u - 1.0)
    if isinstance(spec, UniformLocationSpec):
        u = gen.random((trials, d, n))
        return theta + (2.0 * u - 1.0)
    raise InvalidArgumentError(f"not a mean-family spec: {type(spec).__name__}")


def draw_trials(spec, gens, n: int, trials: int) -> np.ndarray:
    """Batch of i.i.d. trials, one stream per machine.

    Returns shape (trials, m, d, n) for mean families and (trials, m, n) for
    regression / probit responses. Trial 0 reproduces sample() bit for bit,
    and drawing in chunks from the same generators is equivalent to drawing
    all trials at once.
    """
    m = len(gens)
    if isinstance(spec, (RegressionSpec, ProbitSpec)):
        out = np.empty((trials, m, spec.n))
        for i, gen in enumerate(gens):
            a = spec.designs[i]
            mean = a @ spec.theta
            if isinstance(spec, RegressionSpec):
                noise = spec.sigma * gen.standard_normal((trials, spec.n)) \
                    if spec.sigma > 0 else 0.0
                out[:, i, :] = mean + noise
            else:
                latent = mean + gen.standard_normal((trials, spec.n))
                out[:, i, :] = (latent >= 0).astype(float)
        return out
    blocks = np.empty((trials, m, spec.d, n))
    for i, gen in enumerate(gens):
        blocks[:, i] = _draw_mean_blocks(spec, gen, n, trials)
    return blocks


def sample(spec, m: int = None, n: int = None, seed: int = 0) -> SampleSet:
    """One i.i.d. sample draw; deterministic given (spec, m, n, seed)."""
    if isinstance(spec, (RegressionSpec, ProbitSpec)):
        if m is not None and m != spec.m:
            raise InvalidArgumentError("m must match the number of designs")
        if n is not None and n != spec.n:
            raise InvalidArgumentError("n must match the design row count")
        m, n = spec.m, spec.n
        gens = machine_streams(seed, m, TAG_DATA)
        blocks = draw_trials(spec, gens, n, 1)[0]
        kind = "regression" if isinstance(spec, RegressionSpec) else "probit"
        return SampleSet(kind, blocks, m, n, spec.d)
    if m is None or n is None:
        raise InvalidArgumentError("mean families need explicit m and n")
    if m < 1 or n < 1:
        raise InvalidArgumentError("need m >= 1 and n >= 1")
    gens = machine_streams(seed, m, TAG_DATA)
    blocks = draw_trials(spec, gens, n, 1)[0]
    return SampleSet("mean", blocks, m, n, spec.d)


def design_eigenbounds(designs):
    """(lambda_max^2, lambda_min^2) of the rescaled Grams A^T A / n."""
    designs = tuple(np.asarray(a, dtype=float) for a in designs)
    if not designs:
        raise InvalidArgumentError("need at least one design matrix")
    lmax2 = -np.inf
    lmin2 = np.inf
    for a in designs:
        n = a.shape[0]
        eig = np.linalg.eigvalsh(a.T @ a / n)
        lmax2 = max(lmax2, float(eig[-1]))
        lmin2 = min(lmin2, float(eig[0]))
    if lmin2 <= 1e-12 * max(1.0, lmax2):
        raise DegenerateDesignError(
            f"rank-deficient design: lambda_min^2 = {lmin2:.3e}")
    return lmax2, lmin2


def reduce_mean_to_regression(x_mean, design, sigma: float, lambda_max2: float, rng):
    """Responses y = A x_mean + z with z ~ N(0, sigma^2 I - sigma^2/(lmax^2 n) A A^T).

    When x_mean ~ N(theta, sigma^2/(lambda_max2 * n) I) the output is
    marginally N(A theta, sigma^2 I). x_mean may be a (d,) vector or a
    (k, d) batch; the return shape follows.
    """
    a = np.asarray(design, dtype=float)
    n = a.shape[0]
    x = np.asarray(x_mean, dtype=float)
    if not lambda_max2 > 0:
        raise InvalidArgumentError("lambda_max2 must be positive")
    cov = sigma**2 * np.eye(n) - (sigma**2 / (lambda_max2 * n)) * (a @ a.T)
    w, u = np.linalg.eigh(cov)
    if w.min() < -_PSD_TOL * max(sigma**2, 1e-300):
        raise ReductionInfeasibleError(
            f"noise covariance not PSD: min eigenvalue {w.min():.3e}")
    w = np.clip(w, 0.0, None)
    factor = (u * np.sqrt(w)) @ u.T  # symmetric square root
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    if x.ndim == 1:
        return a @ x + factor @ gen.standard_normal(n)
    return x @ a.T + gen.standard_normal((x.shape[0], n)) @ factor


def reduce_regression_to_probit(y) -> np.ndarray:
    """Bits Z_k = 1{y_k >= 0}; the boundary y = 0 lands in the 1-branch."""
    return (np.asarray(y, dtype=float) >= 0).astype(np.int64)


def sample_set_csv(ss: SampleSet) -> str:
    """Audit CSV block with columns machine,obs_index,coordinate,value."""
    lines = ["machine,obs_index,coordinate,value"]
    if ss.kind == "mean":
        for i in range(ss.m):
            for k in range(ss.n):
                for j in range(ss.d):
                    lines.append(f"{i + 1},{k},{j},{ss.blocks[i, j, k]!r}")
    else:
        for i in range(ss.m):
            for k in range(ss.n):
                lines.append(f"{i + 1},{k},0,{ss.blocks[i, k]!r}")
    return "\n".join(lines) + "\n"
