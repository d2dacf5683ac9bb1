"""Radio-map model, KNN position estimation, and evaluation metrics.

A radio map stores one RSS fingerprint tube per reference point on a regular
grid.  The operating phase matches a query fingerprint against every stored
tube by Euclidean distance and returns the unweighted centroid of the k
nearest reference points.  Metrics: tube-wise normalized square error over
the unsampled grid, point localization error in meters, and the empirical
CDF of errors with linearly interpolated percentiles.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch, EmptyComplement, EmptyInput, KTooLarge, ShapeMismatch,
    ZeroDenominator,
)

FLOOR_DBM = -110.0


@dataclass(frozen=True)
class RadioMap:
    """Fingerprint tensor (n1 x n2 x n3) on a regular grid.

    Grid point (i, j) sits at (x0 + i*spacing, y0 + j*spacing) meters.
    floor_value is the RSS reported for undetected transmitters; raw survey
    maps never go below it, recovered maps may (flagged, not rejected).
    """

    fingerprints: np.ndarray
    spacing: float = 1.0
    origin: tuple = (0.0, 0.0)
    floor_value: float = FLOOR_DBM

    def __post_init__(self):
        fp = np.asarray(self.fingerprints, dtype=np.float64)
        if fp.ndim != 3:
            raise ShapeMismatch(f"fingerprints must be a third-order tensor, got {fp.shape}")
        if self.spacing <= 0:
            raise ValueError("spacing must be positive")
        object.__setattr__(self, "fingerprints", fp)

    @property
    def n1(self):
        return self.fingerprints.shape[0]

    @property
    def n2(self):
        return self.fingerprints.shape[1]

    @property
    def n3(self):
        return self.fingerprints.shape[2]

    def rp_coords(self, i, j):
        """Meter coordinates of reference point (i, j)."""
        x0, y0 = self.origin
        return (x0 + i * self.spacing, y0 + j * self.spacing)

    def below_floor_count(self):
        """How many entries dip below floor_value (0 for raw survey maps)."""
        return int((self.fingerprints < self.floor_value - 1e-9).sum())


@dataclass(frozen=True)
class LocationEstimate:
    """Estimated position plus the k matched reference points.

    neighbors: (i, j, distance) triples, non-decreasing in distance.
    """

    position: tuple
    neighbors: list = field(default_factory=list)


def knn_localize(rmap, query, k):
    """Estimate the position whose fingerprint best matches `query`.

    Parameters
    ----------
    rmap : RadioMap
    query : array_like, length n3
        RSS vector observed at the unknown position.
    k : int
        Neighborhood size, 1 <= k <= n1*n2.

    Returns
    -------
    LocationEstimate: the unweighted centroid of the k nearest reference
    points (Euclidean distance in RSS space, ties broken by row-major index).
    """
    query = np.asarray(query, dtype=np.float64).ravel()
    if query.size != rmap.n3:
        raise DimensionMismatch(f"query has {query.size} entries, map stores {rmap.n3}")
    if not 1 <= k <= rmap.n1 * rmap.n2:
        raise KTooLarge(f"k={k} outside [1, {rmap.n1 * rmap.n2}]")

    flat = rmap.fingerprints.reshape(rmap.n1 * rmap.n2, rmap.n3)
    dist = np.linalg.norm(flat - query, axis=1)
    # Stable sort on the row-major flattening is the tie-break rule.
    order = np.argsort(dist, kind="stable")[:k]
    neighbors = []
    xs, ys = 0.0, 0.0
    for idx in order:
        i, j = divmod(int(idx), rmap.n2)
        neighbors.append((i, j, float(dist[idx])))
        x, y = rmap.rp_coords(i, j)
        xs += x
        ys += y
    return LocationEstimate(position=(xs / k, ys / k), neighbors=neighbors)


def localization_error(est, truth):
    """Euclidean distance in meters between estimate and true position."""
    pos = est.position if isinstance(est, LocationEstimate) else est
    return float(np.hypot(pos[0] - truth[0], pos[1] - truth[1]))


def nse(estimate, truth, omega):
    """Normalized square error over the unsampled tubes only.

    sum_{(i,j) not in Omega} ||est(i,j,:) - truth(i,j,:)||^2 divided by the
    same sum of ||truth(i,j,:)||^2.
    """
    estimate = np.asarray(estimate, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if estimate.shape != truth.shape or truth.shape[:2] != omega.flags.shape:
        raise ShapeMismatch("estimate, truth and mask disagree on shape")
    comp = ~omega.flags
    if not comp.any():
        raise EmptyComplement("every tube is sampled, nothing to evaluate on")
    den = float((truth[comp] ** 2).sum())
    if den == 0.0:
        raise ZeroDenominator("truth vanishes on the unsampled tubes")
    num = float(((estimate - truth)[comp] ** 2).sum())
    return num / den


def error_cdf(errors):
    """Empirical CDF as sorted (error, fraction) pairs, fractions i/n."""
    errors = np.asarray(errors, dtype=np.float64).ravel()
    if errors.size == 0:
        raise EmptyInput("no errors to build a CDF from")
    values = np.sort(errors)
    n = values.size
    return [(float(v), (i + 1) / n) for i, v in enumerate(values)]


def cdf_percentile(cdf, q):
    """Linearly interpolated percentile of an error_cdf table.

    q in (0, 1]; queries at or below the first fraction return the smallest
    error.  With errors {1,2,3,4} the 0.8 quantile sits between the 0.75 and
    1.0 steps: 3.2.
    """
    if not 0 < q <= 1:
        raise ValueError("q must be in (0, 1]")
    values = np.array([v for v, _ in cdf])
    fractions = np.array([f for _, f in cdf])
    return float(np.interp(q, fractions, values))
