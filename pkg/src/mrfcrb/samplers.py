"""MCMC samplers targeting the Potts/Ising Gibbs distribution:
systematic- and random-scan single-site Gibbs, and Swendsen-Wang.
"""

import enum
from dataclasses import dataclass

import numpy as np

from . import kernels
from .kernels import RNG_NAME
from .model import (
    Configuration,
    ModelSpec,
    sufficient_statistic,
    uniform_random_configuration,
    validate_configuration,
)

HISTOGRAM_STATE_CAP = 2**20


class SamplerKind(enum.Enum):
    GIBBS_SYSTEMATIC = "gibbs_systematic"
    GIBBS_RANDOM_SCAN = "gibbs_random_scan"
    SWENDSEN_WANG = "swendsen_wang"

    @classmethod
    def parse(cls, name: str) -> "SamplerKind":
        aliases = {
            "gibbs": cls.GIBBS_SYSTEMATIC,
            "sw": cls.SWENDSEN_WANG,
        }
        if name in aliases:
            return aliases[name]
        return cls(name)


class Rng:
    """Deterministic splitmix64 stream; shareable with the compiled kernels."""

    name = RNG_NAME

    def __init__(self, seed: int):
        self.seed = int(seed)
        self.state = np.array([np.uint64(self.seed & 0xFFFFFFFFFFFFFFFF)], dtype=np.uint64)

    def u01(self) -> float:
        return float(kernels.rand_u01(self.state))

    def randint(self, k: int) -> int:
        return int(kernels.rand_below(self.state, k))

    def normal(self) -> float:
        return float(kernels.rand_normal(self.state))


def derive_seeds(master_seed: int, n: int) -> list:
    """n reproducible 63-bit stream seeds derived from a master seed."""
    state = np.array([np.uint64(master_seed & 0xFFFFFFFFFFFFFFFF)], dtype=np.uint64)
    return [int(kernels.next_u64(state)) >> 1 for _ in range(n)]


@dataclass
class ChainOutput:
    """Recorded statistic series u^(t), one per kernel application."""

    stat_series: np.ndarray  # (n_mc, M) int64
    final_config: Configuration
    seed: int
    n_burn: int
    sampler: SamplerKind


def gibbs_sweep(model: ModelSpec, theta, config: Configuration, rng: Rng,
                random_scan: bool = False) -> Configuration:
    """Update every site once (raster order; or n random sites if
    random_scan) by sampling its full conditional. In place."""
    theta = float(np.asarray(theta).reshape(()))
    validate_configuration(model, config)
    counts = np.zeros(model.num_labels)
    probs = np.empty(model.num_labels)
    kernels.gibbs_sweep(
        config.labels, model.graph.nbr, model.graph.deg, model.num_labels,
        theta, rng.state, random_scan, counts, probs,
    )
    return config


def swendsen_wang_step(model: ModelSpec, theta, config: Configuration, rng: Rng) -> Configuration:
    """One cluster update; requires theta >= 0. In place."""
    theta = float(np.asarray(theta).reshape(()))
    if theta < 0:
        raise ValueError(f"Swendsen-Wang requires theta >= 0, got {theta}")
    validate_configuration(model, config)
    n = model.graph.n_sites
    parent = np.empty(n, np.int32)
    newlab = np.empty(n, np.int32)
    kernels.sw_step(config.labels, model.graph.edges, model.num_labels,
                    theta, rng.state, parent, newlab)
    return config


def run_chain(
    model: ModelSpec,
    theta,
    sampler: SamplerKind,
    z0="uniform-random",
    n_burn: int = 1000,
    n_mc: int = 10_000,
    seed: int = 0,
    consumer=None,
) -> ChainOutput:
    """Discard n_burn kernel applications, then record u^(t) = phi(z^(t))
    for t = 1..n_mc. If given, `consumer` is called with each u^(t) so
    downstream accumulation can stay O(M^2) in memory."""
    if n_mc < 2:
        raise ValueError(f"n_mc must be >= 2, got {n_mc}")
    if n_burn < 0:
        raise ValueError(f"n_burn must be >= 0, got {n_burn}")
    theta = float(np.asarray(theta).reshape(()))

    rng = Rng(seed)
    if isinstance(z0, str):
        if z0 != "uniform-random":
            raise ValueError(f"unknown initial condition {z0!r}")
        config = uniform_random_configuration(model, rng)
    else:
        config = z0.copy()
        validate_configuration(model, config)
    labels = np.ascontiguousarray(config.labels, dtype=np.int32)

    g = model.graph
    if sampler in (SamplerKind.GIBBS_SYSTEMATIC, SamplerKind.GIBBS_RANDOM_SCAN):
        series = kernels.run_gibbs_chain(
            labels, g.nbr, g.deg, g.edges, model.num_labels, theta,
            n_burn, n_mc, rng.state, sampler is SamplerKind.GIBBS_RANDOM_SCAN,
        )
    elif sampler is SamplerKind.SWENDSEN_WANG:
        if theta < 0:
            raise ValueError(f"Swendsen-Wang requires theta >= 0, got {theta}")
        series = kernels.run_sw_chain(
            labels, g.edges, model.num_labels, theta, n_burn, n_mc, rng.state,
        )
    else:
        raise ValueError(f"unknown sampler {sampler}")

    stat_series = series.reshape(-1, 1)
    if consumer is not None:
        for u in stat_series:
            consumer(u)

    final = Configuration(labels)
    # running-phi bookkeeping must agree with a fresh recompute
    assert int(sufficient_statistic(model, final)[0]) == int(series[-1])
    return ChainOutput(
        stat_series=stat_series,
        final_config=final,
        seed=seed,
        n_burn=n_burn,
        sampler=sampler,
    )


def state_histogram(
    model: ModelSpec, theta, sampler: SamplerKind, n_samples: int,
    seed: int = 0, thin: int = 1, n_burn: int = 100,
) -> np.ndarray:
    """Visit counts over all K^N states (tiny lattices only). States are
    encoded as sum_i labels[i] * K^i."""
    k = model.num_labels
    n = model.graph.n_sites
    if k**n > HISTOGRAM_STATE_CAP:
        raise ValueError(f"state space K^N = {k}**{n} too large to histogram")
    theta = float(np.asarray(theta).reshape(()))
    rng = Rng(seed)
    config = uniform_random_configuration(model, rng)
    labels = np.ascontiguousarray(config.labels, dtype=np.int32)
    g = model.graph
    if sampler in (SamplerKind.GIBBS_SYSTEMATIC, SamplerKind.GIBBS_RANDOM_SCAN):
        counts = np.zeros(k)
        probs = np.empty(k)
        for _ in range(n_burn):
            kernels.gibbs_sweep(labels, g.nbr, g.deg, k, theta, rng.state,
                                False, counts, probs)
        return kernels.gibbs_state_histogram(
            labels, g.nbr, g.deg, k, theta, n_samples, thin, rng.state)
    if sampler is SamplerKind.SWENDSEN_WANG:
        if theta < 0:
            raise ValueError("Swendsen-Wang requires theta >= 0")
        parent = np.empty(n, np.int32)
        newlab = np.empty(n, np.int32)
        for _ in range(n_burn):
            kernels.sw_step(labels, g.edges, k, theta, rng.state, parent, newlab)
        return kernels.sw_state_histogram(
            labels, g.edges, k, theta, n_samples, thin, rng.state)
    raise ValueError(f"unknown sampler {sampler}")


def write_chain_dump(path, model: ModelSpec, theta, out: ChainOutput) -> None:
    """Header plus one u^(t) row per line, for offline reanalysis."""
    with open(path, "w") as f:
        f.write(f"# model={model.descriptor()}\n")
        f.write(f"# theta={float(np.asarray(theta).reshape(())):.17g}\n")
        f.write(f"# seed={out.seed} sampler={out.sampler.value} "
                f"n_burn={out.n_burn} rng={RNG_NAME}\n")
        for u in out.stat_series:
            f.write(" ".join(str(int(v)) for v in u) + "\n")
