"""ADMM solver for robust low-tubal-rank completion of tube-sampled tensors.

Recovers a low-tubal-rank tensor X and a tube-sparse anomaly tensor Y from
partial observations M = P_Omega(X + Y) by minimizing

    TNN(X) + lam * ||Y||_{1,1,2}   s.t.   M = P_Omega(X + Y),

split through an auxiliary Z = X with multipliers A (observation constraint,
penalty mu) and B (splitting constraint, penalty rho).  Two baseline modes
share the loop: "stc" pins Y to zero (plain nuclear-norm completion), and
"oracle" runs stc on observations with the true anomaly tensor subtracted,
the best any method could do with the same mask.

Penalties follow a continuation schedule by default: mu and rho start at
2 / sigma1 (sigma1 = largest spectral-slice singular value of the observed
tensor, so the first shrinkage threshold is sigma1 / 2) and grow by 1.05 per
iteration.  Fixed unit penalties leave the threshold negligible against the
data scale and stall for thousands of iterations; starting the ramp at 1
converges to the zero-filled tensor instead of the nuclear-norm minimizer.
"""

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeMismatch
from .sampling import SampleMask, apply_mask
from .talgebra import _half_slices, _real_slice, idft_mode3, norm_112, spectral_singular_values

METHODS = ("tcwa", "stc", "oracle")


@dataclass(frozen=True)
class SolverConfig:
    """Solver parameters.

    lam      weight of the tube-sparsity term; None means the default
             sqrt(n3 / max(n1, n2)), resolved against the data at solve time
    mu       penalty on the observation constraint; None means 2 / sigma1 of
             the observed tensor (continuation start)
    rho      penalty on the X = Z splitting constraint; None follows mu
    svt_threshold_source   "rho" shrinks singular values by 1/rho (the exact
             proximal step for the Z subproblem); "mu" uses 1/mu instead
    tol      convergence: both residuals must drop below tol * ||M||_F
    baseline one of "tcwa", "stc", "oracle"
    penalty_ramp   grow mu and rho by ramp_factor per iteration (capped at
             ramp_cap); on by default, the plain fixed-penalty iteration is
             available by turning it off
    """

    lam: float | None = None
    mu: float | None = None
    rho: float | None = None
    svt_threshold_source: str = "rho"
    max_iters: int = 500
    tol: float = 1e-6
    baseline: str = "tcwa"
    penalty_ramp: bool = True
    ramp_factor: float = 1.05
    ramp_cap: float = 1e6

    def __post_init__(self):
        if self.lam is not None and self.lam < 0:
            raise ValueError("lam must be non-negative")
        if (self.mu is not None and self.mu <= 0) or (self.rho is not None and self.rho <= 0):
            raise ValueError("mu and rho must be positive")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.ramp_factor < 1 or self.ramp_cap <= 0:
            raise ValueError("ramp_factor must be >= 1 and ramp_cap positive")
        if self.svt_threshold_source not in ("rho", "mu"):
            raise ValueError("svt_threshold_source must be 'rho' or 'mu'")
        if self.baseline not in METHODS:
            raise ValueError(f"baseline must be one of {METHODS}")


def default_lam(shape):
    """Sparsity weight sqrt(n3 / max(n1, n2)) for a given tensor shape.

    The usual robust-decomposition rate for a per-slice-normalized nuclear
    norm is 1 / sqrt(max(n1, n2) * n3); the nuclear norm here sums over all
    n3 spectral slices without normalization, so the weight carries the
    extra factor n3.
    """
    n1, n2, n3 = shape
    return float(np.sqrt(n3 / max(n1, n2)))


def default_penalty(m):
    """Continuation start 2 / sigma1 for observed tensor `m` (1.0 if m = 0)."""
    s1 = spectral_singular_values(m).max()
    return 2.0 / s1 if s1 > 0 else 1.0


@dataclass
class SolverState:
    """One ADMM iterate: primal x, z, y, multipliers a, b, iteration count."""

    x: np.ndarray
    z: np.ndarray
    y: np.ndarray
    a: np.ndarray
    b: np.ndarray
    iter: int = 0

    @classmethod
    def zeros(cls, shape):
        return cls(*(np.zeros(shape) for _ in range(5)))


@dataclass(frozen=True)
class IterationRecord:
    """Residuals and objective logged once per iteration."""

    feasibility: float
    splitting: float
    objective: float


@dataclass(frozen=True)
class SolverResult:
    x_hat: np.ndarray
    y_hat: np.ndarray
    iterations: int
    converged: bool
    history: list[IterationRecord] = field(default_factory=list)


def soft_threshold(x, eps):
    """Shrink toward zero by eps: x - eps, x + eps, or 0 by sign band."""
    if eps < 0:
        raise ValueError("eps must be non-negative")
    x = np.asarray(x)
    out = np.sign(x) * np.maximum(np.abs(x) - eps, 0.0)
    return out if out.ndim else float(out)


def _svt_spectral(j, eps):
    """SVT in the spectral domain; returns (result, tnn of result)."""
    n1, n2, n3 = j.shape
    jh = np.fft.fft(j, axis=2)
    zh = np.empty_like(jh)
    total = 0.0
    for k in range(_half_slices(n3)):
        slab = jh[:, :, k].real if _real_slice(n3, k) else jh[:, :, k]
        u, s, vt = np.linalg.svd(slab, full_matrices=False)
        s = np.maximum(s - eps, 0.0)
        zh[:, :, k] = (u * s) @ vt
        # Mirrored slices repeat the same singular values.
        weight = 1.0 if _real_slice(n3, k) else 2.0
        total += weight * s.sum()
    for k in range(_half_slices(n3), n3):
        zh[:, :, k] = zh[:, :, n3 - k].conj()
    return idft_mode3(zh), total


def singular_value_threshold(j, eps):
    """Shrink every spectral-slice singular value of `j` by `eps`.

    This is the proximal map of eps * TNN at `j`: the minimizer of
    eps * TNN(Z) + 0.5 * ||Z - J||_F^2.
    """
    if eps < 0:
        raise ValueError("eps must be non-negative")
    j = np.asarray(j, dtype=np.float64)
    if j.ndim != 3:
        raise ShapeMismatch(f"expected a third-order tensor, got shape {j.shape}")
    return _svt_spectral(j, eps)[0]


def update_x(state, m, omega, cfg):
    """Closed-form X step: elementwise solve of the quadratic subproblem.

    On observed tubes x = [mu (m - y + a/mu) + rho z - b] / (mu + rho);
    elsewhere x = z - b / rho.
    """
    if state.z.shape != m.shape or m.shape[:2] != omega.flags.shape:
        raise ShapeMismatch("state, observations and mask disagree on shape")
    on = omega.flags[:, :, None]
    x_obs = (cfg.mu * (m - state.y) + state.a + cfg.rho * state.z - state.b) / (cfg.mu + cfg.rho)
    x_free = state.z - state.b / cfg.rho
    return np.where(on, x_obs, x_free)


def update_z(state, cfg):
    """SVT step on x + b/rho; threshold 1/rho (default) or 1/mu."""
    eps = 1.0 / cfg.rho if cfg.svt_threshold_source == "rho" else 1.0 / cfg.mu
    return singular_value_threshold(state.x + state.b / cfg.rho, eps)


def update_y(state, m, omega, cfg):
    """Tube-wise shrinkage of the observation residual g = m - P_Omega(x) + a/mu.

    Observed tubes shrink by the factor (1 - (lam/mu) / ||g tube||)_+;
    unobserved tubes stay exactly zero.  Zero-norm tubes map to zero.
    """
    g = m - apply_mask(state.x, omega) + state.a / cfg.mu
    tube_norms = np.sqrt((g * g).sum(axis=2))
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.maximum(0.0, 1.0 - (cfg.lam / cfg.mu) / tube_norms)
    scale = np.where(tube_norms > 0.0, scale, 0.0)
    return np.where(omega.flags[:, :, None], g * scale[:, :, None], 0.0)


def update_duals(state, m, omega, cfg):
    """Gradient-ascent step on both multipliers."""
    a = state.a + cfg.mu * (m - apply_mask(state.x + state.y, omega))
    b = state.b + cfg.rho * (state.x - state.z)
    return a, b


def solve(m, omega, cfg=None, anomaly_truth=None):
    """Run the ADMM loop on observations `m` supported on `omega`.

    Parameters
    ----------
    m : ndarray, n1 x n2 x n3
        Observed tensor, zero outside the mask (the caller applies the mask).
    omega : SampleMask
        Indicator of observed tubes.
    cfg : SolverConfig, optional
        Defaults to SolverConfig() (tcwa with data-scaled lam and penalties).
    anomaly_truth : ndarray, optional
        The true anomaly tensor; required by the oracle baseline, which
        subtracts it from the observations and completes the cleaned data.

    Returns
    -------
    SolverResult with the recovered components, the per-iteration history,
    and a converged flag (False only means max_iters hit, the result is
    still usable).
    """
    if cfg is None:
        cfg = SolverConfig()
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 3 or m.shape[:2] != omega.flags.shape:
        raise ShapeMismatch(f"observations {m.shape} do not match mask {omega.flags.shape}")

    if cfg.baseline == "oracle":
        if anomaly_truth is None:
            raise ValueError("oracle baseline needs the true anomaly tensor")
        if anomaly_truth.shape != m.shape:
            raise ShapeMismatch("anomaly truth does not match observations")
        m = apply_mask(m - anomaly_truth, omega)

    lam = cfg.lam if cfg.lam is not None else default_lam(m.shape)
    mu = cfg.mu if cfg.mu is not None else default_penalty(m)
    rho = cfg.rho if cfg.rho is not None else mu
    cfg = dataclasses.replace(cfg, lam=lam, mu=mu, rho=rho)
    robust = cfg.baseline == "tcwa"

    norm_m = float(np.linalg.norm(m))
    scale = norm_m if norm_m > 0 else 1.0
    state = SolverState.zeros(m.shape)
    history = []
    converged = False
    eps_svt = 1.0 / cfg.rho if cfg.svt_threshold_source == "rho" else 1.0 / cfg.mu

    for _ in range(cfg.max_iters):
        state.x = update_x(state, m, omega, cfg)
        state.z, tnn_z = _svt_spectral(state.x + state.b / cfg.rho, eps_svt)
        if robust:
            state.y = update_y(state, m, omega, cfg)
        state.a, state.b = update_duals(state, m, omega, cfg)
        state.iter += 1

        feas = float(np.linalg.norm(m - apply_mask(state.x + state.y, omega)))
        split = float(np.linalg.norm(state.x - state.z))
        obj = tnn_z + cfg.lam * norm_112(state.y) if robust else tnn_z
        history.append(IterationRecord(feas, split, obj))
        if feas <= cfg.tol * scale and split <= cfg.tol * scale:
            converged = True
            break
        if cfg.penalty_ramp:
            cfg = dataclasses.replace(
                cfg,
                mu=min(cfg.mu * cfg.ramp_factor, cfg.ramp_cap),
                rho=min(cfg.rho * cfg.ramp_factor, cfg.ramp_cap),
            )
            eps_svt = 1.0 / cfg.rho if cfg.svt_threshold_source == "rho" else 1.0 / cfg.mu

    return SolverResult(
        x_hat=state.x,
        y_hat=state.y,
        iterations=state.iter,
        converged=converged,
        history=history,
    )
