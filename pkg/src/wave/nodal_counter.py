"""
Nodal counter.
Labels the sign components of a raster with a two-pass union-find, counts the
components contained in B(0, R) and turns ensembles of counts into an estimate
of nu_BS = 4 * lim E[N(R, f)] / R^2.

Besides the components contained in the disk, every census counts the
components anchored in it: a component is anchored at its first node in
row-major order, and is counted when that node lies in the disk and the
component stays clear of the raster edge. Anchoring counts each component
once per translate, so its mean is the area times the component density at
every R, while containment loses the components cut by the circle.
"""
import logging
import math
from collections import deque
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import ndimage

from src.core import config
from src.core.exceptions import GeometryError
from src.wave.field_sampler import FieldRaster, GridSpec, draw_sample, eval_raster, n_trunc_for_radius

logger = logging.getLogger(__name__)

ZERO_SIGN = 1
# 4-connectivity for both signs
_CROSS = ndimage.generate_binary_structure(2, 1)


@dataclass(frozen=True)
class SignGrid:
    """Signs (+1/-1) of a raster; exact zeros are resolved to ZERO_SIGN."""

    signs: np.ndarray
    geometry: GridSpec
    zero_node_count: int = 0


@dataclass(frozen=True)
class LabelMap:
    """Component label of every node (0 .. n_components - 1)."""

    labels: np.ndarray
    n_components: int


@dataclass(frozen=True)
class NodalCensus:
    """Nodal domains of one sample counted against the disk B(0, R)."""

    n_inside: int
    n_touching: int
    component_sizes: Tuple[int, ...]
    R: float
    h: float
    seed: int = 0
    zero_node_count: int = 0
    n_anchored: int = 0

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["component_sizes"] = list(self.component_sizes)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "NodalCensus":
        return cls(
            n_inside=int(data["n_inside"]),
            n_touching=int(data["n_touching"]),
            component_sizes=tuple(int(s) for s in data.get("component_sizes", [])),
            R=float(data["R"]),
            h=float(data["h"]),
            seed=int(data.get("seed", 0)),
            zero_node_count=int(data.get("zero_node_count", 0)),
            n_anchored=int(data.get("n_anchored", 0)),
        )


@dataclass(frozen=True)
class NuEstimate:
    """Ensemble estimate of nu_BS with its standard error."""

    nu_hat: float
    stderr: float
    n_samples: int
    R: float
    h: float
    mean_inside: float
    nu_anchored: float = 0.0
    stderr_anchored: float = 0.0
    censuses: Tuple[NodalCensus, ...] = ()

    def to_dict(self, include_censuses: bool = False) -> Dict[str, Any]:
        data = {
            "nu_hat": self.nu_hat,
            "stderr": self.stderr,
            "n_samples": self.n_samples,
            "R": self.R,
            "h": self.h,
            "mean_inside": self.mean_inside,
            "nu_anchored": self.nu_anchored,
            "stderr_anchored": self.stderr_anchored,
        }
        if include_censuses:
            data["censuses"] = [c.to_dict() for c in self.censuses]
        return data


class DisjointSet:
    """
    Union-find with path compression and union by size.
    """

    def __init__(self, size: int):
        self.parents = list(range(size))
        self.sizes = [1] * size
        self.num_components = size

    def find(self, elem: int) -> int:
        root = elem
        while root != self.parents[root]:
            root = self.parents[root]
        # compress path
        while elem != root:
            parent = self.parents[elem]
            self.parents[elem] = root
            elem = parent
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.sizes[ra] < self.sizes[rb]:
            ra, rb = rb, ra
        self.parents[rb] = ra
        self.sizes[ra] += self.sizes[rb]
        self.num_components -= 1
        return True

    def roots(self) -> List[int]:
        return [self.find(i) for i in range(len(self.parents))]


def sign_grid(raster: FieldRaster) -> SignGrid:
    """
    Sign raster of a field raster.

    Args:
        raster: Field raster

    Returns:
        SignGrid with exact zeros resolved to ZERO_SIGN and counted
    """
    zeros = int(np.count_nonzero(raster.values == 0.0))
    signs = np.where(raster.values > 0, 1, -1).astype(np.int8)
    if zeros:
        signs[raster.values == 0.0] = ZERO_SIGN
        logger.warning("Raster of seed %d has %d nodes that are exactly zero", raster.seed, zeros)
    return SignGrid(signs=signs, geometry=raster.grid, zero_node_count=zeros)


def _as_signs(grid: Union[SignGrid, np.ndarray]) -> np.ndarray:
    return grid.signs if isinstance(grid, SignGrid) else np.asarray(grid)


def label(grid: Union[SignGrid, np.ndarray]) -> LabelMap:
    """
    Label 4-connected same-sign components.

    Runs of equal sign along each row are the union-find elements. The first
    pass unions runs that overlap vertically with the same sign; the second
    pass resolves every run to its root and relabels nodes.

    Args:
        grid: SignGrid or 2-D array of signs

    Returns:
        LabelMap with labels numbered by first appearance in row-major order
    """
    signs = _as_signs(grid)
    if signs.ndim != 2 or signs.size == 0:
        raise GeometryError("sign grid must be a non-empty 2-D array")
    rows, cols = signs.shape

    starts = np.ones_like(signs, dtype=bool)
    starts[:, 1:] = signs[:, 1:] != signs[:, :-1]
    run_of_node = np.cumsum(starts.ravel()).reshape(rows, cols) - 1
    n_runs = int(run_of_node[-1, -1]) + 1

    # first pass: equivalences between vertically adjacent runs
    same = signs[1:, :] == signs[:-1, :]
    upper = run_of_node[:-1, :][same].astype(np.int64)
    lower = run_of_node[1:, :][same].astype(np.int64)
    pairs = np.unique(upper * n_runs + lower)
    forest = DisjointSet(n_runs)
    for a, b in zip((pairs // n_runs).tolist(), (pairs % n_runs).tolist()):
        forest.union(a, b)

    # second pass: resolve roots, number them by first appearance
    roots = np.asarray(forest.roots())
    _, first_seen, inverse = np.unique(roots, return_index=True, return_inverse=True)
    order = np.argsort(np.argsort(first_seen))
    run_labels = order[inverse]
    labels = run_labels[run_of_node].astype(np.int64)
    return LabelMap(labels=labels, n_components=forest.num_components)


def flood_fill_labels(grid: Union[SignGrid, np.ndarray]) -> LabelMap:
    """
    Brute-force breadth-first flood fill labelling (reference implementation).

    Args:
        grid: SignGrid or 2-D array of signs

    Returns:
        LabelMap numbered by first appearance in row-major order
    """
    signs = _as_signs(grid)
    rows, cols = signs.shape
    labels = np.full((rows, cols), -1, dtype=np.int64)
    current = 0
    for i in range(rows):
        for j in range(cols):
            if labels[i, j] >= 0:
                continue
            sign = signs[i, j]
            labels[i, j] = current
            queue = deque([(i, j)])
            while queue:
                a, b = queue.popleft()
                for da, db in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                    na, nb = a + da, b + db
                    if 0 <= na < rows and 0 <= nb < cols and labels[na, nb] < 0 and signs[na, nb] == sign:
                        labels[na, nb] = current
                        queue.append((na, nb))
            current += 1
    return LabelMap(labels=labels, n_components=current)


def flood_fill_component(grid: Union[SignGrid, np.ndarray], start: Tuple[int, int]) -> np.ndarray:
    """
    Nodes 4-connected to ``start`` through nodes of the same sign.

    Args:
        grid: SignGrid or 2-D array of signs
        start: (row, col) of the seed node

    Returns:
        Boolean mask of the component
    """
    signs = _as_signs(grid)
    same = signs == signs[start]
    seed = np.zeros_like(same)
    seed[start] = True
    return ndimage.binary_propagation(seed, structure=_CROSS, mask=same)


def partitions_equal(a: LabelMap, b: LabelMap) -> bool:
    """Whether two label maps describe the same partition of the nodes."""
    if a.labels.shape != b.labels.shape or a.n_components != b.n_components:
        return False
    pairs = np.unique(np.stack([a.labels.ravel(), b.labels.ravel()]), axis=1)
    return pairs.shape[1] == a.n_components


def census(labels: LabelMap, geometry: GridSpec, R: float, seed: int = 0,
           zero_node_count: int = 0) -> NodalCensus:
    """
    Count the components contained in the open disk of radius R about the origin.

    A component counts as inside iff all its nodes are at distance < R and none
    lies on the raster edge; every other component is touching. A component is
    anchored iff its first node in row-major order is at distance < R and none
    of its nodes lies on the raster edge.

    Args:
        labels: Component labels of the raster
        geometry: Raster geometry
        R: Disk radius, with R + h within the raster
        seed: Sample seed (provenance)
        zero_node_count: Exact zeros met while taking signs

    Returns:
        NodalCensus
    """
    reach = math.hypot(*geometry.center) + R + geometry.h
    if R <= 0 or reach > geometry.half_nodes * geometry.h + 1e-9:
        raise GeometryError(
            f"R = {R} needs a one-cell margin inside the raster (half extent {geometry.half_extent})"
        )

    lab = labels.labels
    n = labels.n_components
    xx, yy = geometry.coordinates()
    index = np.arange(n)
    max_r2 = np.asarray(ndimage.maximum(xx * xx + yy * yy, lab, index), dtype=float).reshape(n)
    sizes = np.bincount(lab.ravel(), minlength=n)

    edge = np.zeros(n, dtype=bool)
    edge[np.unique(np.concatenate([lab[0], lab[-1], lab[:, 0], lab[:, -1]]))] = True
    inside = (max_r2 < R * R) & ~edge

    _, first_node = np.unique(lab.ravel(), return_index=True)
    anchor_r2 = (xx * xx + yy * yy).ravel()[first_node]
    anchored = (anchor_r2 < R * R) & ~edge

    n_inside = int(np.count_nonzero(inside))
    return NodalCensus(
        n_inside=n_inside,
        n_touching=n - n_inside,
        component_sizes=tuple(int(s) for s in sizes[inside]),
        R=float(R),
        h=float(geometry.h),
        seed=int(seed),
        zero_node_count=int(zero_node_count),
        n_anchored=int(np.count_nonzero(anchored)),
    )


def count_nodal_domains(raster: FieldRaster, R: float) -> NodalCensus:
    """Sign, label and census one raster."""
    signs = sign_grid(raster)
    return census(label(signs), signs.geometry, R, seed=raster.seed,
                  zero_node_count=signs.zero_node_count)


def counting_grid(R: float, h: float, margin: float = config.COUNT_MARGIN) -> GridSpec:
    """Origin-centred grid reaching ``margin`` (at least two cells) beyond B(0, R)."""
    return GridSpec(h=h, half_extent=R + max(margin, 2.0 * h))


def sample_census(index: int, *, master_seed: int, R: float, h: float, eps: float,
                  n_trunc: Optional[int] = None) -> NodalCensus:
    """
    Draw ensemble member ``index``, rasterise it around B(0, R) and count.

    Args:
        index: Sample index
        master_seed: Master seed
        R: Counting radius
        h: Grid step
        eps: Truncation tolerance
        n_trunc: Optional truncation override

    Returns:
        NodalCensus of the sample
    """
    grid = counting_grid(R, h)
    order = n_trunc_for_radius(grid.max_radius(), eps, n_trunc)
    raster = eval_raster(draw_sample(master_seed, index, order), grid)
    result = count_nodal_domains(raster, R)
    logger.debug("Sample %d: %d inside, %d touching, %d anchored", index, result.n_inside,
                 result.n_touching, result.n_anchored)
    return result


def estimate_nu(samples: Sequence[NodalCensus]) -> NuEstimate:
    """
    Estimate nu_BS from per-sample censuses.

    nu_hat = 4 * mean(n_inside) / R^2 and stderr = 4 * std(n_inside) / (R^2 sqrt(n));
    nu_anchored and stderr_anchored are the same statistics of n_anchored.

    Args:
        samples: Censuses sharing (R, h), at least two

    Returns:
        NuEstimate
    """
    samples = list(samples)
    if len(samples) < 2:
        raise GeometryError("estimate_nu needs at least two samples")
    R, h = samples[0].R, samples[0].h
    if any(not (math.isclose(s.R, R) and math.isclose(s.h, h)) for s in samples):
        raise GeometryError("all censuses must share the same R and h")

    counts = np.array([s.n_inside for s in samples], dtype=float)
    anchored = np.array([s.n_anchored for s in samples], dtype=float)
    scale = 4.0 / (R * R)
    root_n = math.sqrt(len(counts))
    flagged = sum(1 for s in samples if s.zero_node_count > 0)
    if flagged:
        logger.warning("%d of %d samples met exact zeros on raster nodes", flagged, len(samples))
    return NuEstimate(
        nu_hat=float(scale * counts.mean()),
        stderr=float(scale * counts.std(ddof=1) / root_n),
        n_samples=len(samples),
        R=float(R),
        h=float(h),
        mean_inside=float(counts.mean()),
        nu_anchored=float(scale * anchored.mean()),
        stderr_anchored=float(scale * anchored.std(ddof=1) / root_n),
        censuses=tuple(samples),
    )
