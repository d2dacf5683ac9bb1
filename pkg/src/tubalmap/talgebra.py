"""Third-order tensor algebra built on tube-wise circular convolution.

Tensors are dense float64 numpy arrays of shape (n1, n2, n3), indexed
(i, j, k) with k running over frontal slices; the tube at grid cell (i, j)
is ``t[i, j, :]``.  The spectral domain is the unnormalized DFT along the
third mode (numpy's fft convention, inverse carries the 1/n3 factor); all
products and factorizations are slice-wise matrix operations there.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NonRealResult, ShapeMismatch

# Absolute imaginary residue above which an inverse transform is rejected.
IMAG_TOL = 1e-6


def _as_tensor(t):
    t = np.asarray(t, dtype=np.float64)
    if t.ndim != 3:
        raise ShapeMismatch(f"expected a third-order tensor, got shape {t.shape}")
    return t


def dft_mode3(t):
    """DFT of every tube of `t` (unnormalized forward transform)."""
    return np.fft.fft(_as_tensor(t), axis=2)


def idft_mode3(s, imag_tol=IMAG_TOL):
    """Inverse of :func:`dft_mode3`, returning a real tensor.

    Raises NonRealResult if the inverse transform carries an imaginary
    part larger than `imag_tol` anywhere, which signals spectral data
    that did not come from a real tensor.
    """
    s = np.asarray(s)
    if s.ndim != 3:
        raise ShapeMismatch(f"expected a third-order spectral tensor, got shape {s.shape}")
    x = np.fft.ifft(s, axis=2)
    if x.size and np.abs(x.imag).max() > imag_tol:
        raise NonRealResult(
            f"imaginary residue {np.abs(x.imag).max():.3e} exceeds {imag_tol:.1e}"
        )
    return np.ascontiguousarray(x.real)


def t_product(a, b):
    """Tube-circulant product of `a` (n1 x n2 x n3) and `b` (n2 x n4 x n3).

    Entry tube (i, j) of the result is sum_k a(i, k, :) (*) b(k, j, :)
    with (*) the circular convolution; computed as slice-wise matrix
    products in the spectral domain.
    """
    a = _as_tensor(a)
    b = _as_tensor(b)
    if a.shape[1] != b.shape[0] or a.shape[2] != b.shape[2]:
        raise ShapeMismatch(f"cannot t-multiply shapes {a.shape} and {b.shape}")
    ah = np.moveaxis(np.fft.fft(a, axis=2), 2, 0)
    bh = np.moveaxis(np.fft.fft(b, axis=2), 2, 0)
    return idft_mode3(np.moveaxis(ah @ bh, 0, 2))


def t_transpose(t):
    """Transpose every frontal slice and reverse the order of slices 2..n3."""
    t = _as_tensor(t)
    out = np.empty((t.shape[1], t.shape[0], t.shape[2]))
    out[:, :, 0] = t[:, :, 0].T
    if t.shape[2] > 1:
        out[:, :, 1:] = np.transpose(t[:, :, :0:-1], (1, 0, 2))
    return out


def identity_tensor(n1, n3):
    """n1 x n1 x n3 tensor acting as the unit of the t-product."""
    if n1 < 1 or n3 < 1:
        raise ShapeMismatch("identity_tensor needs n1 >= 1 and n3 >= 1")
    out = np.zeros((n1, n1, n3))
    out[:, :, 0] = np.eye(n1)
    return out


@dataclass(frozen=True)
class TSvdFactors:
    """Orthogonal-diagonal-orthogonal factorization t = u * theta * v^T.

    `u` is n1 x n1 x n3, `theta` n1 x n2 x n3 with every frontal slice
    diagonal, `v` n2 x n2 x n3.  In the spectral domain each slice of
    theta holds the singular values of the matching slice of the input,
    sorted non-increasing.
    """

    u: np.ndarray
    theta: np.ndarray
    v: np.ndarray


def _half_slices(n3):
    # Conjugate symmetry of real input: slices k and n3-k mirror, so only
    # the first n3 // 2 + 1 need direct computation.
    return n3 // 2 + 1


def _real_slice(n3, k):
    # Slice 0 always, and the Nyquist slice when n3 is even, are exactly
    # real for real input.
    return k == 0 or (n3 % 2 == 0 and k == n3 // 2)


def t_svd(t):
    """Tube-circulant SVD, via per-slice SVDs of the spectral tensor."""
    t = _as_tensor(t)
    n1, n2, n3 = t.shape
    th = np.fft.fft(t, axis=2)
    uh = np.empty((n1, n1, n3), dtype=np.complex128)
    sh = np.zeros((n1, n2, n3), dtype=np.complex128)
    vh = np.empty((n2, n2, n3), dtype=np.complex128)
    m = min(n1, n2)
    diag = np.arange(m)
    for k in range(_half_slices(n3)):
        slab = th[:, :, k].real if _real_slice(n3, k) else th[:, :, k]
        u, s, vt = np.linalg.svd(slab, full_matrices=True)
        uh[:, :, k] = u
        sh[diag, diag, k] = s
        vh[:, :, k] = vt.conj().T
    for k in range(_half_slices(n3), n3):
        uh[:, :, k] = uh[:, :, n3 - k].conj()
        sh[:, :, k] = sh[:, :, n3 - k].conj()
        vh[:, :, k] = vh[:, :, n3 - k].conj()
    return TSvdFactors(u=idft_mode3(uh), theta=idft_mode3(sh), v=idft_mode3(vh))


def spectral_singular_values(t):
    """Per-slice singular values of the spectral tensor, shape (min(n1,n2), n3)."""
    t = _as_tensor(t)
    n1, n2, n3 = t.shape
    th = np.fft.fft(t, axis=2)
    sv = np.empty((min(n1, n2), n3))
    for k in range(_half_slices(n3)):
        slab = th[:, :, k].real if _real_slice(n3, k) else th[:, :, k]
        sv[:, k] = np.linalg.svd(slab, compute_uv=False)
    for k in range(_half_slices(n3), n3):
        sv[:, k] = sv[:, n3 - k]
    return sv


def tubal_rank(t, tol=None):
    """Number of diagonal tubes of theta with norm above `tol`.

    Default `tol` is 1e-8 times the largest spectral singular value.
    """
    if tol is not None and tol < 0:
        raise ValueError("tol must be non-negative")
    sv = spectral_singular_values(t)
    if tol is None:
        tol = 1e-8 * sv.max() if sv.size else 0.0
    n3 = np.asarray(t).shape[2]
    # Parseval: spatial tube norm of the theta diagonal is the spectral
    # tube norm divided by sqrt(n3).
    tube_norms = np.sqrt((sv * sv).sum(axis=1) / n3)
    return int((tube_norms > tol).sum())


def tnn(t):
    """Sum of the singular values of all spectral frontal slices."""
    return float(spectral_singular_values(t).sum())


def norm_112(t):
    """Sum over all grid cells (i, j) of the Euclidean tube norm."""
    t = _as_tensor(t)
    return float(np.sqrt((t * t).sum(axis=2)).sum())
