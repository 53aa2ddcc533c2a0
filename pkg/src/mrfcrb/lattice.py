"""Rectangular lattice geometry with 4-neighbor structure.

Sites are indexed in raster order: site = row * width + col.
"""

from dataclasses import dataclass, field

import numpy as np

BOUNDARY_TOROIDAL = "toroidal"
BOUNDARY_FREE = "free"
_BOUNDARIES = (BOUNDARY_TOROIDAL, BOUNDARY_FREE)


class LatticeSizeError(ValueError):
    """Requested lattice dimensions are invalid for the boundary type."""


@dataclass(frozen=True)
class NeighborhoodGraph:
    """First-order neighborhood structure of a width x height lattice.

    ``edges`` holds each unordered neighbor pair exactly once.
    ``nbr`` is an (N, 4) int32 array of full symmetric neighbor indices,
    padded with -1; ``deg`` gives the number of valid entries per site.
    """

    width: int
    height: int
    boundary: str
    edges: np.ndarray
    nbr: np.ndarray
    deg: np.ndarray

    @property
    def n_sites(self) -> int:
        return self.width * self.height

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def neighbor_lists(self) -> list:
        return [list(self.nbr[i, : self.deg[i]]) for i in range(self.n_sites)]


def build_lattice(width: int, height: int, boundary: str = BOUNDARY_FREE) -> NeighborhoodGraph:
    """Build the neighbor/edge structure for a rectangular lattice.

    Toroidal lattices require width, height >= 3 so that wrap-around
    never produces self-loops or duplicate parallel edges.
    """
    if boundary not in _BOUNDARIES:
        raise ValueError(f"unknown boundary {boundary!r}; expected one of {_BOUNDARIES}")
    if width < 1 or height < 1:
        raise LatticeSizeError(f"lattice dimensions must be positive, got {width}x{height}")
    if boundary == BOUNDARY_TOROIDAL and (width < 3 or height < 3):
        raise LatticeSizeError(
            f"toroidal lattice requires width, height >= 3, got {width}x{height}"
        )

    n = width * height
    edges = []
    for r in range(height):
        for c in range(width):
            s = r * width + c
            if boundary == BOUNDARY_TOROIDAL:
                edges.append((s, r * width + (c + 1) % width))
                edges.append((s, ((r + 1) % height) * width + c))
            else:
                if c + 1 < width:
                    edges.append((s, s + 1))
                if r + 1 < height:
                    edges.append((s, s + width))
    edge_arr = np.array(edges, dtype=np.int32).reshape(-1, 2)

    nbr = np.full((n, 4), -1, dtype=np.int32)
    deg = np.zeros(n, dtype=np.int32)
    for a, b in edge_arr:
        nbr[a, deg[a]] = b
        deg[a] += 1
        nbr[b, deg[b]] = a
        deg[b] += 1

    return NeighborhoodGraph(
        width=width,
        height=height,
        boundary=boundary,
        edges=edge_arr,
        nbr=nbr,
        deg=deg,
    )
