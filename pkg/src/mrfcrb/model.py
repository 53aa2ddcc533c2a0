"""Ising/Potts exponential-family model on a lattice.

The unnormalized density is exp(theta * phi(z)), where phi counts the
number of edges whose endpoints carry equal labels. Each unordered edge
is counted once, so the critical coupling is log(1 + sqrt(K)).
Labels are stored 0-based; file formats use 1-based labels.
"""

from dataclasses import dataclass, field

import numpy as np

from .lattice import NeighborhoodGraph, build_lattice


@dataclass
class ModelSpec:
    """Potts model (Ising when num_labels == 2) on a neighborhood graph."""

    graph: NeighborhoodGraph
    num_labels: int
    stat_dim: int = 1

    def __post_init__(self):
        if self.num_labels < 2:
            raise ValueError(f"num_labels must be >= 2, got {self.num_labels}")
        if self.stat_dim != 1:
            raise ValueError("only the scalar edge-agreement statistic is supported")

    @property
    def family(self) -> str:
        return "ising" if self.num_labels == 2 else "potts"

    @property
    def critical_theta(self) -> float:
        return float(np.log(1.0 + np.sqrt(self.num_labels)))

    def descriptor(self) -> str:
        g = self.graph
        return f"{self.family} K={self.num_labels} {g.width}x{g.height} {g.boundary}"


def make_model(width: int, height: int, boundary: str, num_labels: int) -> ModelSpec:
    return ModelSpec(graph=build_lattice(width, height, boundary), num_labels=num_labels)


@dataclass
class Configuration:
    """One field state: 0-based labels in raster order."""

    labels: np.ndarray

    def copy(self) -> "Configuration":
        return Configuration(self.labels.copy())


def validate_configuration(model: ModelSpec, config: Configuration) -> None:
    labels = config.labels
    if labels.shape != (model.graph.n_sites,):
        raise ValueError(
            f"configuration has {labels.shape} labels, expected ({model.graph.n_sites},)"
        )
    if labels.min() < 0 or labels.max() >= model.num_labels:
        raise ValueError(
            f"labels out of range [0, {model.num_labels - 1}]: "
            f"min={labels.min()}, max={labels.max()}"
        )


def uniform_random_configuration(model: ModelSpec, rng) -> Configuration:
    """I.i.d. uniform labels ('hot start'); rng is a samplers.Rng."""
    n = model.graph.n_sites
    labels = np.empty(n, dtype=np.int32)
    for i in range(n):
        labels[i] = rng.randint(model.num_labels)
    return Configuration(labels)


def sufficient_statistic(model: ModelSpec, config: Configuration) -> np.ndarray:
    """Number of agreeing-label edges, as a length-1 int64 vector."""
    validate_configuration(model, config)
    edges = model.graph.edges
    labels = config.labels
    count = int(np.sum(labels[edges[:, 0]] == labels[edges[:, 1]]))
    return np.array([count], dtype=np.int64)


def statistic_delta(
    model: ModelSpec, config: Configuration, site: int, new_label: int
) -> np.ndarray:
    """Change in the statistic if `site` were relabeled to `new_label`."""
    if not 0 <= site < model.graph.n_sites:
        raise ValueError(f"site {site} out of range")
    if not 0 <= new_label < model.num_labels:
        raise ValueError(f"label {new_label} out of range")
    labels = config.labels
    old_label = labels[site]
    nbr = model.graph.nbr[site]
    d = 0
    for j in range(model.graph.deg[site]):
        nl = labels[nbr[j]]
        if nl == new_label:
            d += 1
        if nl == old_label:
            d -= 1
    return np.array([d], dtype=np.int64)


def conditional_distribution(
    model: ModelSpec, theta, config: Configuration, site: int
) -> np.ndarray:
    """Full conditional p(z_site = k | rest), length-K probability vector.

    Uses the full symmetric neighborhood: every edge incident to the site
    contributes to the change in phi under a single-site relabel.
    """
    theta = float(np.asarray(theta).reshape(()))
    labels = config.labels
    nbr = model.graph.nbr[site]
    counts = np.zeros(model.num_labels)
    for j in range(model.graph.deg[site]):
        counts[labels[nbr[j]]] += 1.0
    logits = theta * counts
    logits -= logits.max()
    p = np.exp(logits)
    p /= p.sum()
    return p


def log_unnormalized_density(model: ModelSpec, theta, config: Configuration) -> float:
    """theta . phi(z); the log partition function is not included."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    phi = sufficient_statistic(model, config).astype(float)
    return float(theta @ phi)


def save_configuration(path, model: ModelSpec, config: Configuration) -> None:
    """Text format: header `K W H BOUNDARY`, then one row of 1-based labels
    per lattice row."""
    validate_configuration(model, config)
    g = model.graph
    with open(path, "w") as f:
        f.write(f"{model.num_labels} {g.width} {g.height} {g.boundary}\n")
        grid = config.labels.reshape(g.height, g.width) + 1
        for row in grid:
            f.write(" ".join(str(int(v)) for v in row) + "\n")


def load_configuration(path):
    """Returns (model, configuration) from the text format."""
    with open(path) as f:
        header = f.readline().split()
        if len(header) != 4:
            raise ValueError("expected header `K W H BOUNDARY`")
        k, w, h = int(header[0]), int(header[1]), int(header[2])
        boundary = header[3]
        rows = []
        for _ in range(h):
            rows.append([int(v) for v in f.readline().split()])
    labels = np.array(rows, dtype=np.int32).reshape(-1) - 1
    model = make_model(w, h, boundary, k)
    config = Configuration(labels)
    validate_configuration(model, config)
    return model, config
