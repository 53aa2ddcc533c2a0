"""Exact ground truth for tiny lattices by exhaustive enumeration.

Enumerating all K^N states gives the exact log partition function and
the exact moments of the edge-agreement statistic, hence the exact
information matrix and CRB. Finite differences of the log partition
function independently verify that its gradient is E[phi] and its
Hessian is cov[phi].
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .fim import CrbReport, FimEstimate, SingularFimError
from .model import ModelSpec

ENUMERATION_CAP = 2**24

_dos_cache: dict = {}


class IntractableSizeError(ValueError):
    """State space exceeds the enumeration cap."""


@dataclass
class ExactMoments:
    log_partition: float
    mean_stat: np.ndarray
    cov_stat: np.ndarray


def _state_count(model: ModelSpec) -> int:
    return model.num_labels ** model.graph.n_sites


def density_of_states(model: ModelSpec) -> np.ndarray:
    """Number of configurations for each edge-agreement value 0..|edges|."""
    if _state_count(model) > ENUMERATION_CAP:
        raise IntractableSizeError(
            f"enumeration of K^N = {model.num_labels}^{model.graph.n_sites} states "
            f"exceeds the cap of {ENUMERATION_CAP}; intractable at this size"
        )
    g = model.graph
    key = (g.width, g.height, g.boundary, model.num_labels)
    dos = _dos_cache.get(key)
    if dos is None:
        dos = kernels.density_of_states(g.nbr, g.deg, g.n_edges, model.num_labels, g.n_sites)
        _dos_cache[key] = dos
    return dos


def enumerate_moments(model: ModelSpec, theta) -> ExactMoments:
    """Exact log C(theta), E[phi], cov[phi] by summation over all states."""
    theta = float(np.asarray(theta).reshape(()))
    dos = density_of_states(model)
    phis = np.arange(len(dos), dtype=float)
    mask = dos > 0
    logw = np.log(dos[mask].astype(float)) + theta * phis[mask]
    m = logw.max()
    log_c = m + np.log(np.exp(logw - m).sum())
    p = np.exp(logw - log_c)
    mean = float(p @ phis[mask])
    var = float(p @ (phis[mask] - mean) ** 2)
    return ExactMoments(
        log_partition=float(log_c),
        mean_stat=np.array([mean]),
        cov_stat=np.array([[var]]),
    )


def exact_crb(model: ModelSpec, theta) -> CrbReport:
    """CRB = (cov[phi])^-1, exact up to floating point."""
    moments = enumerate_moments(model, theta)
    var = moments.cov_stat[0, 0]
    if var <= 1e-300:
        raise SingularFimError(
            f"exact covariance of the statistic is singular ({var:.3e}) "
            f"at theta={theta}"
        )
    fim = FimEstimate(
        matrix=moments.cov_stat,
        n_mc=0,
        ess_per_component=np.array([np.inf]),
        se_matrix=np.zeros((1, 1)),
        theta=np.atleast_1d(np.asarray(theta, dtype=float)),
        model_descriptor=model.descriptor() + " (exact enumeration)",
    )
    return CrbReport(crb=np.array([[1.0 / var]]), fim=fim, condition_number=1.0)


def check_identity(model: ModelSpec, theta, h: float = 1e-4) -> np.ndarray:
    """Central-difference d(log C)/d(theta) minus E[phi]; O(h^2)."""
    if h <= 0:
        raise ValueError("step h must be positive")
    theta = float(np.asarray(theta).reshape(()))
    lp = enumerate_moments(model, theta + h).log_partition
    lm = enumerate_moments(model, theta - h).log_partition
    grad_fd = (lp - lm) / (2.0 * h)
    mean = enumerate_moments(model, theta).mean_stat[0]
    return np.array([grad_fd - mean])


def check_second_derivative(model: ModelSpec, theta, h: float = 1e-3) -> np.ndarray:
    """Five-point central second difference of log C minus cov[phi]; O(h^4)."""
    if h <= 0:
        raise ValueError("step h must be positive")
    theta = float(np.asarray(theta).reshape(()))

    def lc(t):
        return enumerate_moments(model, t).log_partition

    hess_fd = (-lc(theta + 2 * h) + 16.0 * lc(theta + h) - 30.0 * lc(theta)
               + 16.0 * lc(theta - h) - lc(theta - 2 * h)) / (12.0 * h * h)
    var = enumerate_moments(model, theta).cov_stat[0, 0]
    return np.array([[hess_fd - var]])
