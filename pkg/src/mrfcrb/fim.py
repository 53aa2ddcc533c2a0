"""Fisher information from streamed statistic samples.

The information matrix of the exponential family equals cov[phi], so the
sample covariance of the recorded statistic series estimates it; its
inverse is the Cramer-Rao bound. Accuracy diagnostics come from the
chain's effective sample size.
"""

from dataclasses import dataclass, field

import numpy as np

DEFAULT_MAX_LAG = 10_000


class InsufficientSamplesError(ValueError):
    """Fewer than two samples: the (N-1)-denominator covariance is undefined."""


class SingularFimError(ValueError):
    """Estimated information matrix is numerically singular."""


@dataclass
class CovAccumulator:
    """Single-pass covariance state: count, mean, and the sum of centered
    outer products (comoment). Mergeable across parallel chains."""

    count: int
    mean: np.ndarray
    comoment: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.mean)


def new_accumulator(dim: int) -> CovAccumulator:
    return CovAccumulator(count=0, mean=np.zeros(dim), comoment=np.zeros((dim, dim)))


def accumulate(acc: CovAccumulator, u) -> CovAccumulator:
    """Welford update with one sample vector. Mutates and returns acc."""
    u = np.asarray(u, dtype=float)
    if u.shape != (acc.dim,):
        raise ValueError(f"sample has shape {u.shape}, accumulator dim {acc.dim}")
    acc.count += 1
    delta = u - acc.mean
    acc.mean += delta / acc.count
    delta2 = u - acc.mean
    upd = np.outer(delta, delta2)
    acc.comoment += 0.5 * (upd + upd.T)  # keep comoment exactly symmetric
    return acc


def accumulator_from_batch(samples) -> CovAccumulator:
    """Accumulator equivalent to streaming a whole (n, M) batch."""
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2:
        raise ValueError("expected an (n, M) array")
    n = len(samples)
    if n == 0:
        return new_accumulator(samples.shape[1])
    mean = samples.mean(axis=0)
    x = samples - mean
    com = x.T @ x
    return CovAccumulator(count=n, mean=mean, comoment=0.5 * (com + com.T))


def merge(a: CovAccumulator, b: CovAccumulator) -> CovAccumulator:
    """Combine two accumulators as if their streams were concatenated."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    if a.count == 0:
        return CovAccumulator(b.count, b.mean.copy(), b.comoment.copy())
    if b.count == 0:
        return CovAccumulator(a.count, a.mean.copy(), a.comoment.copy())
    count = a.count + b.count
    delta = b.mean - a.mean
    mean = a.mean + delta * (b.count / count)
    cross = np.outer(delta, delta) * (a.count * b.count / count)
    return CovAccumulator(count=count, mean=mean, comoment=a.comoment + b.comoment + cross)


@dataclass
class FimEstimate:
    """Sample-covariance estimate of the information matrix, with MC
    accuracy diagnostics."""

    matrix: np.ndarray
    n_mc: int
    ess_per_component: np.ndarray
    se_matrix: np.ndarray
    theta: np.ndarray
    model_descriptor: str
    degenerate: bool = False


def finalize_fim(acc: CovAccumulator, ess, theta, descriptor: str) -> FimEstimate:
    """Covariance with the (N_MC - 1) denominator plus entrywise standard
    errors se = |value| * sqrt(2/ess) (Gaussian-motivated heuristic)."""
    if acc.count < 2:
        raise InsufficientSamplesError(
            f"need at least 2 samples for the (N-1)-denominator covariance, got {acc.count}"
        )
    matrix = acc.comoment / (acc.count - 1)
    ess = np.atleast_1d(np.asarray(ess, dtype=float))
    if ess.shape != (acc.dim,):
        raise ValueError(f"ess has shape {ess.shape}, expected ({acc.dim},)")
    ess_pair = np.minimum.outer(ess, ess)
    se = np.abs(matrix) * np.sqrt(2.0 / ess_pair)
    degenerate = float(np.trace(matrix)) <= 0.0
    return FimEstimate(
        matrix=matrix,
        n_mc=acc.count,
        ess_per_component=ess,
        se_matrix=se,
        theta=np.atleast_1d(np.asarray(theta, dtype=float)),
        model_descriptor=descriptor,
        degenerate=degenerate,
    )


def autocorrelation(series, max_lag: int) -> np.ndarray:
    """Normalized autocorrelations rho_0..rho_max_lag (FFT-based)."""
    x = np.asarray(series, dtype=float)
    n = len(x)
    x = x - x.mean()
    nfft = 1
    while nfft < 2 * n:
        nfft *= 2
    f = np.fft.rfft(x, nfft)
    acov = np.fft.irfft(f * np.conj(f), nfft)[: max_lag + 1] / n
    if acov[0] <= 0:
        out = np.zeros(max_lag + 1)
        out[0] = 1.0
        return out
    return acov / acov[0]


def autocorrelation_direct(series, max_lag: int) -> np.ndarray:
    """Direct-summation reference for the FFT path."""
    x = np.asarray(series, dtype=float)
    n = len(x)
    x = x - x.mean()
    c0 = float(x @ x) / n
    out = np.empty(max_lag + 1)
    out[0] = 1.0
    if c0 <= 0:
        out[1:] = 0.0
        return out
    for lag in range(1, max_lag + 1):
        out[lag] = float(x[:-lag] @ x[lag:]) / n / c0
    return out


def effective_sample_size(series, max_lag: int | None = None) -> float:
    """ESS = N / (1 + 2 sum rho_k), truncated at the first non-positive
    even/odd lag-pair sum (Geyer initial positive sequence); clamped to
    (0, N]. A constant series is degenerate and returns N."""
    x = np.asarray(series, dtype=float)
    n = len(x)
    if n < 100:
        raise ValueError(f"need at least 100 samples for an ESS estimate, got {n}")
    if np.ptp(x) == 0.0:
        return float(n)
    if max_lag is None:
        max_lag = min(n // 2, DEFAULT_MAX_LAG)
    rho = autocorrelation(x, max_lag)
    s = 0.0
    m = 0
    while 2 * m + 1 <= max_lag:
        g = rho[2 * m] + rho[2 * m + 1]
        if g <= 0.0:
            break
        s += g
        m += 1
    tau = 2.0 * s - 1.0  # = 1 + 2 sum_{k>=1} rho_k over the kept pairs
    if tau <= 0.0:
        return float(n)
    return float(min(n / tau, n))


@dataclass
class CrbReport:
    """Inverse of an information-matrix estimate."""

    crb: np.ndarray
    fim: FimEstimate
    condition_number: float


def crb_from_fim(fim: FimEstimate) -> CrbReport:
    """Invert the estimated information matrix (direct symmetric solve;
    M is small)."""
    matrix = fim.matrix
    eigvals = np.linalg.eigvalsh(matrix)
    max_eig = float(eigvals[-1])
    min_eig = float(eigvals[0])
    if max_eig <= 0.0 or min_eig <= 1e-12 * max_eig:
        raise SingularFimError(
            f"information matrix is singular (min eigenvalue {min_eig:.3e}); "
            "N_MC is likely too small for a stable estimate"
        )
    if matrix.shape == (1, 1):
        crb = np.array([[1.0 / matrix[0, 0]]])
    else:
        crb = np.linalg.inv(matrix)
        crb = 0.5 * (crb + crb.T)
    return CrbReport(crb=crb, fim=fim, condition_number=max_eig / min_eig)
