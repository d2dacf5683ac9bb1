"""Observation masks, synthetic low-tubal-rank ground truth, anomaly injection.

All randomness flows through numpy's PCG64 generator (``np.random.default_rng``),
seeded explicitly, so every artifact is reproducible from the seeds echoed in
reports.
"""

from dataclasses import dataclass

import numpy as np

from .errors import RankTooLarge, ShapeMismatch
from .talgebra import t_product, tubal_rank


@dataclass(frozen=True)
class SampleMask:
    """Boolean indicator of surveyed grid cells; True marks an observed tube."""

    flags: np.ndarray

    def __post_init__(self):
        flags = np.asarray(self.flags, dtype=bool)
        if flags.ndim != 2:
            raise ShapeMismatch(f"mask flags must be 2-D, got shape {flags.shape}")
        object.__setattr__(self, "flags", flags)

    @property
    def n1(self):
        return self.flags.shape[0]

    @property
    def n2(self):
        return self.flags.shape[1]

    @property
    def count(self):
        return int(self.flags.sum())

    def complement(self):
        return SampleMask(~self.flags)


def sample_uniform_tubes(n1, n2, rate, seed):
    """Mask with exactly round(rate * n1 * n2) cells set, uniformly at random."""
    if not 0.0 <= rate <= 1.0:
        raise ValueError(f"rate must lie in [0, 1], got {rate}")
    count = int(round(rate * n1 * n2))
    rng = np.random.default_rng(seed)
    flags = np.zeros(n1 * n2, dtype=bool)
    flags[rng.choice(n1 * n2, size=count, replace=False)] = True
    return SampleMask(flags.reshape(n1, n2))


def apply_mask(t, omega):
    """Keep the tubes of `t` flagged in `omega`, zero the rest."""
    t = np.asarray(t, dtype=np.float64)
    if t.ndim != 3 or t.shape[:2] != omega.flags.shape:
        raise ShapeMismatch(
            f"tensor shape {t.shape} does not match mask {omega.flags.shape}"
        )
    return np.where(omega.flags[:, :, None], t, 0.0)


@dataclass(frozen=True)
class SynthTensor:
    """Synthetic ground truth plus the metadata needed to regenerate it."""

    values: np.ndarray
    rank_requested: int
    rank_measured: int
    lo: float
    hi: float
    seed: int


def generate_low_tubal_rank(n1, n2, n3, r, lo, hi, seed):
    """Random tensor of tubal rank r (r + 1 after rescale), values in [lo, hi].

    Built as the t-product of n1 x r x n3 and r x n2 x n3 standard-normal
    factors, then affinely rescaled onto [lo, hi].  The rescale shift only
    touches the first spectral slice, so it can raise the tubal rank by at
    most one; the measured rank is recorded in the result.
    """
    if r > min(n1, n2):
        raise RankTooLarge(f"rank {r} exceeds min(n1, n2) = {min(n1, n2)}")
    if not lo < hi:
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")
    if r == 0:
        values = np.full((n1, n2, n3), (lo + hi) / 2.0)
    else:
        rng = np.random.default_rng(seed)
        p = rng.standard_normal((n1, r, n3))
        q = rng.standard_normal((r, n2, n3))
        base = t_product(p, q)
        bmin, bmax = base.min(), base.max()
        values = (base - bmin) * ((hi - lo) / (bmax - bmin)) + lo
    measured = tubal_rank(values)
    assert measured <= r + 1
    return SynthTensor(
        values=values,
        rank_requested=int(r),
        rank_measured=measured,
        lo=float(lo),
        hi=float(hi),
        seed=int(seed),
    )


@dataclass(frozen=True)
class AnomalySpec:
    """Corruption model: fraction of tubes (or entries) hit, and amplitude.

    `mode` is "tube" (whole fingerprints corrupted, the model matched to the
    tube-sparse penalty) or "entry" (individual readings).  Additive noise is
    i.i.d. uniform on [-magnitude, +magnitude].
    """

    ratio: float
    magnitude: float = 100.0
    mode: str = "tube"
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.ratio <= 1.0:
            raise ValueError(f"ratio must lie in [0, 1], got {self.ratio}")
        if self.magnitude < 0:
            raise ValueError("magnitude must be non-negative")
        if self.mode not in ("tube", "entry"):
            raise ValueError(f"mode must be 'tube' or 'entry', got {self.mode!r}")


def inject_anomalies(t, spec):
    """Return (corrupted, truth) with corrupted = t + truth.

    `truth` is zero outside the corrupted positions, and positions left
    uncorrupted are bit-identical between `t` and `corrupted`.
    """
    t = np.asarray(t, dtype=np.float64)
    n1, n2, n3 = t.shape
    rng = np.random.default_rng(spec.seed)
    truth = np.zeros_like(t)
    if spec.mode == "tube":
        count = int(round(spec.ratio * n1 * n2))
        if count:
            cells = rng.choice(n1 * n2, size=count, replace=False)
            rows, cols = np.unravel_index(cells, (n1, n2))
            truth[rows, cols, :] = rng.uniform(-spec.magnitude, spec.magnitude, (count, n3))
    else:
        count = int(round(spec.ratio * t.size))
        if count:
            flat = rng.choice(t.size, size=count, replace=False)
            truth.flat[flat] = rng.uniform(-spec.magnitude, spec.magnitude, count)
    return t + truth, truth


def anomaly_tube_support(truth):
    """Mask of grid cells whose tube holds any nonzero anomaly."""
    truth = np.asarray(truth)
    return SampleMask(np.any(truth != 0.0, axis=2))
