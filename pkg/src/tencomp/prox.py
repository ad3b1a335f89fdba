"""Proximal and projection operators used by the completion solver.

``svt_tnn`` shrinks the Fourier-domain singular values of a tensor, the
tensor analogue of matrix singular value thresholding.  A note on the
threshold's meaning: the solver applies ``svt_tnn(x, 1/beta)``, shrinking
each spectral singular value by ``1/beta``.  Because the Fourier transform
here is unnormalized, that step is the exact proximal operator of the
``1/n3``-scaled tensor nuclear norm with penalty ``beta``; the exact prox
of the unscaled norm (the one ``tencomp.core.tnn`` reports) is obtained at
threshold ``n3/beta`` instead.  The constant factor is absorbed into the
tuning of ``beta``, which is a free hyper-parameter.
"""

import numpy as np

from .core import _n_independent_slices, as_tensor3, idft_mode3
from .errors import DimensionMismatch, SvdFailure


def _svt_spectral(x: np.ndarray, tau: float) -> tuple[np.ndarray, float]:
    """Threshold spectral singular values by ``tau``.

    Returns the shrunk tensor and the total of the surviving singular
    values (the tensor nuclear norm of the result, free of charge).
    """
    x = as_tensor3(x)
    if tau < 0:
        raise ValueError(f"threshold must be nonnegative, got {tau}")
    n3 = x.shape[2]
    xbar = np.fft.fft(x, axis=2)
    ybar = np.empty_like(xbar)
    half = _n_independent_slices(n3)
    value = 0.0
    for k in range(half):
        try:
            u, s, vh = np.linalg.svd(xbar[:, :, k], full_matrices=False)
        except np.linalg.LinAlgError as exc:
            raise SvdFailure(f"SVD of Fourier slice {k} did not converge") from exc
        s = np.maximum(s - tau, 0.0)
        ybar[:, :, k] = (u * s) @ vh
        # mirrored slices contribute the same singular values
        weight = 1.0 if k == 0 or (n3 % 2 == 0 and k == n3 // 2) else 2.0
        value += weight * s.sum()
    for k in range(half, n3):
        ybar[:, :, k] = ybar[:, :, n3 - k].conj()
    return idft_mode3(ybar), value


def svt_tnn(x: np.ndarray, tau: float) -> np.ndarray:
    """Singular value thresholding on the Fourier-domain frontal slices.

    Every spectral slice ``k`` of the result is the matrix SVT of the
    input's spectral slice: singular values are replaced by
    ``max(s - tau, 0)`` with singular vectors unchanged.

    Parameters
    ----------
    x : ndarray
        Real tensor of shape ``(n1, n2, n3)``.
    tau : float
        Nonnegative shrinkage threshold.
    """
    return _svt_spectral(x, tau)[0]


def project_support(x: np.ndarray, o: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Overwrite the observed entries of ``x`` with those of ``o``.

    ``mask`` is boolean with True marking observed positions; the result
    equals ``o`` there and ``x`` elsewhere.
    """
    x = as_tensor3(x, "x")
    o = as_tensor3(o, "o")
    mask = np.asarray(mask, dtype=bool)
    if x.shape != o.shape or x.shape != mask.shape:
        raise DimensionMismatch(
            f"shapes disagree: x {x.shape}, o {o.shape}, mask {mask.shape}"
        )
    return np.where(mask, o, x)
