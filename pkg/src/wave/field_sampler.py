"""
Field sampler.
Draws the random monochromatic plane wave through its Bessel-Fourier expansion
about the origin

    f(r, theta) = X_0 J_0(r) - sqrt(2) * sum_{n>=1} J_n(r) (X_n cos(n theta) + Y_n sin(n theta))

and evaluates it at points, on batches of samples and on square rasters.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from src.core.exceptions import GeometryError, OutOfDomainError
from src.wave.special_functions import MAX_ARGUMENT, MAX_ORDER, bessel_j0, bessel_j_row, bessel_j_table

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)
_CHUNK = 16384
_TRUNCATION_SCAN_STEP = 0.1

Point = Tuple[float, float]


@dataclass(frozen=True)
class WaveCoefficients:
    """Gaussian coefficients X_0, (X_n), (Y_n) of one field sample."""

    x0: float
    xs: np.ndarray
    ys: np.ndarray
    n_trunc: int
    seed: int = 0

    def __post_init__(self):
        if self.n_trunc < 1 or len(self.xs) != self.n_trunc or len(self.ys) != self.n_trunc:
            raise GeometryError("xs and ys must both have length n_trunc >= 1")
        self.xs.setflags(write=False)
        self.ys.setflags(write=False)

    def with_x0(self, x0: float) -> "WaveCoefficients":
        """Condition on X_0 = x0 by substitution (X_0 is independent of the rest)."""
        return WaveCoefficients(float(x0), self.xs.copy(), self.ys.copy(), self.n_trunc, self.seed)

    def rotated(self, phi: float) -> "WaveCoefficients":
        """
        Coefficients of g(r, theta) = f(r, theta + phi).

        Args:
            phi: Rotation angle

        Returns:
            New coefficients with each (X_n, Y_n) pair rotated by n * phi
        """
        n = np.arange(1, self.n_trunc + 1)
        c, s = np.cos(n * phi), np.sin(n * phi)
        xs = self.xs * c + self.ys * s
        ys = self.ys * c - self.xs * s
        return WaveCoefficients(self.x0, xs, ys, self.n_trunc, self.seed)


@dataclass(frozen=True)
class CoefficientBatch:
    """Coefficients of many samples stacked row-wise, for vectorised evaluation."""

    x0: np.ndarray
    xs: np.ndarray
    ys: np.ndarray
    seeds: np.ndarray
    n_trunc: int

    def __len__(self) -> int:
        return len(self.x0)

    def sample(self, i: int) -> WaveCoefficients:
        return WaveCoefficients(float(self.x0[i]), self.xs[i].copy(), self.ys[i].copy(),
                                self.n_trunc, int(self.seeds[i]))

    def subset(self, rows) -> "CoefficientBatch":
        """Rows selected by an index array or boolean mask."""
        return CoefficientBatch(self.x0[rows], self.xs[rows], self.ys[rows], self.seeds[rows], self.n_trunc)

    def with_x0(self, x0: float) -> "CoefficientBatch":
        """Every sample conditioned on X_0 = x0."""
        return CoefficientBatch(np.full(len(self), float(x0)), self.xs, self.ys, self.seeds, self.n_trunc)


@dataclass(frozen=True)
class GridSpec:
    """Node-centred square grid covering center + [-half_extent, half_extent]^2."""

    h: float
    half_extent: float
    center: Point = (0.0, 0.0)

    def __post_init__(self):
        if self.h <= 0 or self.half_extent <= 0:
            raise GeometryError("grid step and half extent must be positive")
        if self.half_extent / self.h < 4:
            raise GeometryError("degenerate raster: half_extent / h must be >= 4")

    @property
    def half_nodes(self) -> int:
        # tolerate half_extent / h landing a rounding error below an integer
        return int(math.floor(self.half_extent / self.h + 1e-9))

    @property
    def n_side(self) -> int:
        return 2 * self.half_nodes + 1

    def axis(self) -> np.ndarray:
        """Offsets of the nodes from the centre along one axis."""
        return (np.arange(self.n_side) - self.half_nodes) * self.h

    def coordinates(self) -> Tuple[np.ndarray, np.ndarray]:
        """Physical (x, y) of every node; rows follow y, columns follow x."""
        offsets = self.axis()
        xs = self.center[0] + offsets
        ys = self.center[1] + offsets
        return np.meshgrid(xs, ys)

    @property
    def is_centred(self) -> bool:
        return self.center[0] == 0.0 and self.center[1] == 0.0

    def max_radius(self) -> float:
        c = math.hypot(*self.center)
        return c + self.half_nodes * self.h * SQRT2


@dataclass
class FieldRaster:
    """Field values on a GridSpec; ``values[i, j]`` sits at (x_j, y_i)."""

    values: np.ndarray
    h: float
    half_extent: float
    center: Point = (0.0, 0.0)
    seed: int = 0
    n_trunc: int = 0

    def __post_init__(self):
        expected = self.grid.n_side
        if self.values.shape != (expected, expected):
            raise GeometryError(f"raster must be {expected}x{expected}, got {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise GeometryError("raster contains non-finite values")

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.h, self.half_extent, tuple(self.center))


def derive_seed(master_seed: int, sample_index: int) -> int:
    """
    Seed of one ensemble member.

    sample_seed = SeedSequence(master_seed, spawn_key=(sample_index,)) reduced to
    one 64-bit word, so any sample can be regenerated on its own.

    Args:
        master_seed: Non-negative master seed
        sample_index: Non-negative sample index

    Returns:
        64-bit sample seed
    """
    sequence = np.random.SeedSequence(int(master_seed), spawn_key=(int(sample_index),))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def _normals(seed: int, n_trunc: int) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(int(seed)))
    return rng.standard_normal(1 + 2 * n_trunc)


def draw(seed: int, n_trunc: int) -> WaveCoefficients:
    """
    Draw the coefficients of one sample.

    The stream is read as x0, x1, y1, x2, y2, ... so a longer truncation
    extends a shorter one drawn from the same seed.

    Args:
        seed: 64-bit sample seed
        n_trunc: Truncation order, >= 1

    Returns:
        WaveCoefficients
    """
    if n_trunc < 1:
        raise OutOfDomainError("n_trunc must be >= 1")
    z = _normals(seed, n_trunc)
    return WaveCoefficients(float(z[0]), z[1::2].copy(), z[2::2].copy(), n_trunc, int(seed))


def draw_sample(master_seed: int, sample_index: int, n_trunc: int) -> WaveCoefficients:
    """Draw ensemble member ``sample_index`` of ``master_seed``."""
    return draw(derive_seed(master_seed, sample_index), n_trunc)


def draw_batch(master_seed: int, indices: Sequence[int], n_trunc: int) -> CoefficientBatch:
    """
    Draw several ensemble members at once (row i equals draw_sample(master_seed, indices[i])).

    Args:
        master_seed: Master seed
        indices: Sample indices
        n_trunc: Truncation order

    Returns:
        CoefficientBatch
    """
    if n_trunc < 1:
        raise OutOfDomainError("n_trunc must be >= 1")
    seeds = np.array([derive_seed(master_seed, i) for i in indices], dtype=np.uint64)
    z = np.stack([_normals(int(s), n_trunc) for s in seeds]) if len(seeds) else np.zeros((0, 1 + 2 * n_trunc))
    return CoefficientBatch(z[:, 0].copy(), z[:, 1::2].copy(), z[:, 2::2].copy(), seeds, n_trunc)


def truncation_order(r_max: float, eps: float) -> int:
    """
    Smallest truncation order whose discarded variance is <= eps on [0, r_max].

    The discarded variance 2 * sum_{n>N} J_n(r)^2 is scanned on radii spaced 0.1
    apart (r_max included). The result is never below ceil(r_max).

    Args:
        r_max: Largest radius that will be evaluated
        eps: Variance tolerance, 0 < eps < 1

    Returns:
        Truncation order N
    """
    if r_max <= 0 or not 0 < eps < 1:
        raise OutOfDomainError("need r_max > 0 and 0 < eps < 1")
    if r_max > MAX_ARGUMENT:
        raise OutOfDomainError(f"r_max = {r_max} exceeds the validated radius {MAX_ARGUMENT:g}")

    radii = np.append(np.arange(0.0, r_max, _TRUNCATION_SCAN_STEP), r_max)
    squares = bessel_j_table(radii, MAX_ORDER) ** 2
    # tail[:, N] = 2 * sum_{n > N} J_n^2
    suffix = np.cumsum(squares[:, ::-1], axis=1)[:, ::-1]
    tail = 2.0 * np.concatenate([suffix[:, 1:], np.zeros((len(radii), 1))], axis=1)
    worst = tail.max(axis=0)

    admissible = np.flatnonzero(worst[1:] <= eps)
    if admissible.size == 0:
        raise OutOfDomainError(f"no truncation order <= {MAX_ORDER} reaches eps = {eps:g}")
    n = int(admissible[0]) + 1
    return max(n, int(math.ceil(r_max)))


def _mode_sums(coeffs_x: np.ndarray, coeffs_y: np.ndarray, table: np.ndarray,
               angles: np.ndarray) -> np.ndarray:
    n = np.arange(1, table.shape[1])
    phase = np.outer(angles, n)
    return np.einsum("pn,pn->p", table[:, 1:], np.cos(phase) * coeffs_x + np.sin(phase) * coeffs_y)


def evaluate(coeffs: WaveCoefficients, point: Point) -> float:
    """
    Evaluate one sample at a point given in polar coordinates.

    Args:
        coeffs: Sample coefficients
        point: (radius, angle) with radius >= 0

    Returns:
        f(radius, angle)
    """
    radius, angle = point
    row = bessel_j_row(radius, coeffs.n_trunc).values
    n = np.arange(1, coeffs.n_trunc + 1)
    modes = coeffs.xs * np.cos(n * angle) + coeffs.ys * np.sin(n * angle)
    return float(coeffs.x0 * row[0] - SQRT2 * np.dot(row[1:], modes))


def evaluate_points(coeffs: WaveCoefficients, radii: np.ndarray, angles: np.ndarray) -> np.ndarray:
    """
    Evaluate one sample at many polar points (chunked).

    Args:
        coeffs: Sample coefficients
        radii: Radii, any shape
        angles: Angles, same shape as radii

    Returns:
        Field values with the shape of radii
    """
    radii = np.asarray(radii, dtype=float)
    angles = np.asarray(angles, dtype=float)
    flat_r, flat_a = radii.ravel(), angles.ravel()
    out = np.empty(flat_r.size)
    for start in range(0, flat_r.size, _CHUNK):
        stop = start + _CHUNK
        table = bessel_j_table(flat_r[start:stop], coeffs.n_trunc)
        out[start:stop] = coeffs.x0 * table[:, 0] - SQRT2 * _mode_sums(
            coeffs.xs, coeffs.ys, table, flat_a[start:stop])
    return out.reshape(radii.shape)


def evaluate_cartesian(coeffs: WaveCoefficients, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Evaluate one sample at Cartesian points."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return evaluate_points(coeffs, np.hypot(x, y), np.arctan2(y, x))


def evaluate_batch(batch: CoefficientBatch, radii: np.ndarray, angles: np.ndarray) -> np.ndarray:
    """
    Evaluate every sample of a batch at the same polar points.

    Args:
        batch: Stacked coefficients (S samples)
        radii: Radii of P points
        angles: Angles of P points

    Returns:
        Array of shape (S, P)
    """
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    angles = np.atleast_1d(np.asarray(angles, dtype=float))
    table = bessel_j_table(radii, batch.n_trunc)
    n = np.arange(1, batch.n_trunc + 1)
    phase = np.outer(n, angles)
    cos_basis = table[:, 1:].T * np.cos(phase)
    sin_basis = table[:, 1:].T * np.sin(phase)
    return (np.outer(batch.x0, table[:, 0])
            - SQRT2 * (batch.xs @ cos_basis + batch.ys @ sin_basis))


# quarter-turn values of cos and sin at multiples of pi/2
_QUARTER_COS = np.array([1.0, 0.0, -1.0, 0.0])
_QUARTER_SIN = np.array([0.0, 1.0, 0.0, -1.0])
# (s, k): image angle s * theta + k * pi / 2
_OCTANT_IMAGES = [(s, k) for s in (1, -1) for k in range(4)]


def _image_coefficients(coeffs: WaveCoefficients, s: int, k: int) -> Tuple[np.ndarray, np.ndarray]:
    n = np.arange(1, coeffs.n_trunc + 1)
    cb = _QUARTER_COS[(n * k) % 4]
    sb = _QUARTER_SIN[(n * k) % 4]
    xs = coeffs.xs * cb + coeffs.ys * sb
    ys = s * (coeffs.ys * cb - coeffs.xs * sb)
    return xs, ys


def _image_indices(a: np.ndarray, b: np.ndarray, s: int, k: int) -> Tuple[np.ndarray, np.ndarray]:
    # rotate (a, s*b) by k quarter turns
    x, y = a, s * b
    for _ in range(k):
        x, y = -y, x
    return x, y


def _eval_raster_symmetric(coeffs: WaveCoefficients, grid: GridSpec) -> np.ndarray:
    half = grid.half_nodes
    values = np.empty((grid.n_side, grid.n_side))
    a_all, b_all = np.nonzero(np.tril(np.ones((half + 1, half + 1), dtype=bool)))

    images = [(s, k, *_image_coefficients(coeffs, s, k)) for s, k in _OCTANT_IMAGES]
    image_x = np.stack([im[2] for im in images])
    image_y = np.stack([im[3] for im in images])
    n = np.arange(1, coeffs.n_trunc + 1)

    for start in range(0, a_all.size, _CHUNK):
        a = a_all[start:start + _CHUNK]
        b = b_all[start:start + _CHUNK]
        radii = np.hypot(a, b) * grid.h
        angles = np.arctan2(b, a)
        table = bessel_j_table(radii, coeffs.n_trunc)
        phase = np.outer(angles, n)
        cos_part = table[:, 1:] * np.cos(phase)
        sin_part = table[:, 1:] * np.sin(phase)
        chunk = (coeffs.x0 * table[:, :1]
                 - SQRT2 * (cos_part @ image_x.T + sin_part @ image_y.T))
        for column, (s, k, _, _) in enumerate(images):
            ix, iy = _image_indices(a, b, s, k)
            values[iy + half, ix + half] = chunk[:, column]
    return values


def eval_raster(coeffs: WaveCoefficients, grid: GridSpec) -> FieldRaster:
    """
    Evaluate one sample on every node of a grid.

    Grids centred at the origin use the dihedral symmetry of the node set:
    Bessel values are computed on one octant and the seven images are
    obtained by transforming the coefficients.

    Args:
        coeffs: Sample coefficients
        grid: Grid geometry

    Returns:
        FieldRaster
    """
    if grid.max_radius() > MAX_ARGUMENT:
        raise OutOfDomainError(f"raster reaches radius {grid.max_radius():.2f} > {MAX_ARGUMENT:g}")

    if grid.is_centred:
        values = _eval_raster_symmetric(coeffs, grid)
    else:
        xx, yy = grid.coordinates()
        values = evaluate_cartesian(coeffs, xx, yy)

    logger.debug("Evaluated %dx%d raster (seed=%d, n_trunc=%d)",
                 grid.n_side, grid.n_side, coeffs.seed, coeffs.n_trunc)
    return FieldRaster(values=values, h=grid.h, half_extent=grid.half_extent,
                       center=tuple(grid.center), seed=coeffs.seed, n_trunc=coeffs.n_trunc)


def covariance(d: float) -> float:
    """Covariance E[f(x) f(y)] = J_0(|x - y|) of the field at distance d."""
    if d < 0:
        raise OutOfDomainError("distance must be >= 0")
    return bessel_j0(float(d))


def helmholtz_residual(raster: FieldRaster) -> np.ndarray:
    """
    Five-point residual Delta_h f + f on the interior nodes of a raster.

    Args:
        raster: Field raster

    Returns:
        Residual array of shape (n_side - 2, n_side - 2)
    """
    f = raster.values
    h2 = raster.h * raster.h
    laplacian = (f[1:-1, 2:] + f[1:-1, :-2] + f[2:, 1:-1] + f[:-2, 1:-1] - 4.0 * f[1:-1, 1:-1]) / h2
    return laplacian + f[1:-1, 1:-1]


def n_trunc_for_radius(r_max: float, eps: float, override: Optional[int] = None) -> int:
    """Truncation order for rasters/circles reaching r_max, unless overridden."""
    if override is not None:
        if override < 1 or override > MAX_ORDER:
            raise OutOfDomainError(f"n_trunc must lie in [1, {MAX_ORDER}]")
        return int(override)
    return truncation_order(r_max, eps)
