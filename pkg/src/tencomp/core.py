"""Third-order tensor algebra in the mode-3 Fourier domain.

A tensor is a real ``numpy.ndarray`` of shape ``(n1, n2, n3)`` and dtype
float64.  Frontal slice ``k`` is ``x[:, :, k]`` and tube ``(i, j)`` is
``x[i, j, :]``.  The tensor-tensor product and everything built on it
(decomposition, ranks, nuclear norm) reduce to ordinary matrix operations
on the frontal slices after a DFT along the tubes.

DFT convention: unnormalized forward transform, ``1/n3``-scaled inverse
(the ``fft``/``ifft`` pair).  All Fourier-domain quantities below use the
forward transform's scaling.

For real input the spectrum is conjugate-symmetric in the slice index:
slice ``k`` and slice ``n3 - k`` (0-based, ``k >= 1``) are elementwise
conjugates.  Per-slice factorizations are therefore computed only on the
first ``n3 // 2 + 1`` slices and mirrored by conjugation to the rest,
which keeps the pairing exact and the inverse transforms real.
"""

from typing import NamedTuple

import numpy as np

from .errors import DimensionMismatch, ImaginaryResidueTooLarge, SvdFailure

# Relative bound on the imaginary residue tolerated when a result is
# mathematically real and the imaginary part is discarded.
_IMAG_RTOL = 1e-8

# Default relative tolerance for rank decisions (the largest singular
# value / tube norm is the reference scale).
DEFAULT_RANK_TOL = 1e-8


class TSVDFactors(NamedTuple):
    """Factors ``(u, s, v)`` with ``x = u * s * conj_transpose(v)``.

    ``u`` is ``n1 x n1 x n3``, ``s`` is ``n1 x n2 x n3`` and f-diagonal
    (every frontal slice diagonal), ``v`` is ``n2 x n2 x n3``; ``u`` and
    ``v`` are orthogonal under the t-product.
    """

    u: np.ndarray
    s: np.ndarray
    v: np.ndarray


def as_tensor3(x, name: str = "tensor") -> np.ndarray:
    """Validate and return ``x`` as a finite float64 array of rank 3."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 3:
        raise DimensionMismatch(f"{name} must be a third-order tensor, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} contains NaN or Inf entries")
    return arr


def dft_mode3(x: np.ndarray) -> np.ndarray:
    """Unnormalized forward DFT of every tube ``x[i, j, :]``.

    Returns a complex array of the same shape.  For real input the output
    satisfies the conjugate-symmetry property described in the module
    docstring.
    """
    x = as_tensor3(x)
    return np.fft.fft(x, axis=2)


def idft_mode3(xbar: np.ndarray) -> np.ndarray:
    """``1/n3``-scaled inverse DFT along mode 3, returning a real tensor.

    The imaginary part of the inverse must be negligible (relative
    Frobenius norm below ``1e-8``); it is asserted and then discarded.

    Raises
    ------
    ImaginaryResidueTooLarge
        If the input spectrum was not (numerically) conjugate-symmetric.
    """
    xbar = np.asarray(xbar, dtype=np.complex128)
    if xbar.ndim != 3:
        raise DimensionMismatch(f"expected a third-order spectrum, got shape {xbar.shape}")
    y = np.fft.ifft(xbar, axis=2)
    scale = np.linalg.norm(y)
    residue = np.linalg.norm(y.imag)
    if residue > _IMAG_RTOL * scale:
        raise ImaginaryResidueTooLarge(
            f"imaginary residue {residue:.3e} exceeds {_IMAG_RTOL:g} * {scale:.3e}"
        )
    return np.ascontiguousarray(y.real)


def identity_tensor(n: int, n3: int) -> np.ndarray:
    """Identity of the t-product: first frontal slice ``eye(n)``, rest zero."""
    if n < 1 or n3 < 1:
        raise DimensionMismatch(f"identity_tensor needs n >= 1 and n3 >= 1, got {n}, {n3}")
    out = np.zeros((n, n, n3))
    out[:, :, 0] = np.eye(n)
    return out


def conj_transpose(x: np.ndarray) -> np.ndarray:
    """Tensor conjugate transpose.

    Every frontal slice is transposed, and slices 2 through ``n3``
    (1-based) are reversed in order, so slice ``k`` of the output is the
    transpose of input slice ``n3 - k + 2``.  Real tensors need no
    conjugation but the mirrored ordering is what makes
    ``t_product(conj_transpose(b), conj_transpose(a))`` the transpose of
    ``t_product(a, b)``.
    """
    x = as_tensor3(x)
    n3 = x.shape[2]
    out = np.empty((x.shape[1], x.shape[0], n3))
    out[:, :, 0] = x[:, :, 0].T
    if n3 > 1:
        out[:, :, 1:] = x[:, :, :0:-1].transpose(1, 0, 2)
    return out


def t_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor-tensor product of ``a`` (n1 x n2 x n3) and ``b`` (n2 x n4 x n3).

    Tube ``(i, j)`` of the result is the sum over ``k`` of the circular
    convolutions of tubes ``a[i, k, :]`` and ``b[k, j, :]``; equivalently,
    and as computed here, frontal slice ``k`` of the result's spectrum is
    the matrix product of the operands' spectral slices.
    """
    a = as_tensor3(a, "a")
    b = as_tensor3(b, "b")
    if a.shape[1] != b.shape[0] or a.shape[2] != b.shape[2]:
        raise DimensionMismatch(f"cannot t-product shapes {a.shape} and {b.shape}")
    abar = np.fft.fft(a, axis=2)
    bbar = np.fft.fft(b, axis=2)
    # matmul over slice stacks: move the slice index to the front
    cbar = np.matmul(np.moveaxis(abar, 2, 0), np.moveaxis(bbar, 2, 0))
    return idft_mode3(np.moveaxis(cbar, 0, 2))


def _n_independent_slices(n3: int) -> int:
    """Number of spectral slices not determined by conjugate symmetry."""
    return n3 // 2 + 1


def tsvd(x: np.ndarray) -> TSVDFactors:
    """Tensor singular value decomposition via per-slice matrix SVDs.

    Computes the full (not economy) factorization: Fourier slice ``k`` of
    ``x`` is decomposed as ``U S V^H`` with square ``U`` and ``V``, the
    diagonal of ``S`` holding the singular values in nonincreasing order.
    Only the first ``n3 // 2 + 1`` slices are factorized; the rest are
    their mirrored conjugates.

    Raises
    ------
    SvdFailure
        If any per-slice SVD fails to converge.
    """
    x = as_tensor3(x)
    n1, n2, n3 = x.shape
    mn = min(n1, n2)
    xbar = np.fft.fft(x, axis=2)
    ubar = np.empty((n1, n1, n3), dtype=np.complex128)
    sbar = np.zeros((n1, n2, n3), dtype=np.complex128)
    vbar = np.empty((n2, n2, n3), dtype=np.complex128)
    diag = np.arange(mn)
    for k in range(_n_independent_slices(n3)):
        try:
            u, s, vh = np.linalg.svd(xbar[:, :, k], full_matrices=True)
        except np.linalg.LinAlgError as exc:
            raise SvdFailure(f"SVD of Fourier slice {k} did not converge") from exc
        ubar[:, :, k] = u
        sbar[diag, diag, k] = s
        vbar[:, :, k] = vh.conj().T
    for k in range(_n_independent_slices(n3), n3):
        m = n3 - k
        ubar[:, :, k] = ubar[:, :, m].conj()
        sbar[:, :, k] = sbar[:, :, m].conj()
        vbar[:, :, k] = vbar[:, :, m].conj()
    return TSVDFactors(idft_mode3(ubar), idft_mode3(sbar), idft_mode3(vbar))


def fourier_singular_values(x: np.ndarray) -> np.ndarray:
    """Singular values of every Fourier-domain frontal slice.

    Returns an array of shape ``(min(n1, n2), n3)`` whose column ``k``
    holds the nonincreasing singular values of spectral slice ``k``.
    Mirrored slices share a column by conjugate symmetry.
    """
    x = as_tensor3(x)
    n1, n2, n3 = x.shape
    xbar = np.fft.fft(x, axis=2)
    out = np.empty((min(n1, n2), n3))
    for k in range(_n_independent_slices(n3)):
        try:
            out[:, k] = np.linalg.svd(xbar[:, :, k], compute_uv=False)
        except np.linalg.LinAlgError as exc:
            raise SvdFailure(f"SVD of Fourier slice {k} did not converge") from exc
    for k in range(_n_independent_slices(n3), n3):
        out[:, k] = out[:, n3 - k]
    return out


def tubal_rank(x: np.ndarray, tol: float = DEFAULT_RANK_TOL) -> int:
    """Number of nonzero diagonal tubes of the t-SVD's ``s`` factor.

    A tube counts as nonzero when its Frobenius norm exceeds ``tol`` times
    the largest tube norm.  Equals ``max(multi_rank(x, tol))`` whenever the
    spectrum is not adversarially scaled.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    x = as_tensor3(x)
    svals = fourier_singular_values(x)
    # Parseval: the spatial tube s[i, i, :] has squared norm (1/n3) * sum_k svals[i, k]^2
    tube_norms = np.sqrt((svals**2).sum(axis=1) / x.shape[2])
    largest = tube_norms.max(initial=0.0)
    return int(np.count_nonzero(tube_norms > tol * largest))


def multi_rank(x: np.ndarray, tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Per-Fourier-slice matrix ranks, as a length-``n3`` integer vector.

    Singular values below ``tol`` times the largest singular value across
    all slices are treated as zero.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    svals = fourier_singular_values(x)
    largest = svals.max(initial=0.0)
    return np.count_nonzero(svals > tol * largest, axis=0).astype(np.int64)


def tnn(x: np.ndarray) -> float:
    """Tensor nuclear norm: total of all spectral slices' singular values."""
    return float(fourier_singular_values(x).sum())
