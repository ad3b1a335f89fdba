"""Exception types raised by the public API."""


class TencompError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(TencompError, ValueError):
    """Operands do not have compatible shapes."""


class ImaginaryResidueTooLarge(TencompError, ArithmeticError):
    """An inverse mode-3 DFT produced a significant imaginary part.

    Raised when the result of an operation that must be real-valued has an
    imaginary Frobenius norm above ``1e-8`` of the tensor's norm; this
    indicates the input spectrum was not conjugate-symmetric.
    """


class SvdFailure(TencompError, RuntimeError):
    """A per-slice matrix SVD did not converge."""


class NonFiniteOutput(TencompError, ArithmeticError):
    """A denoiser produced NaN or Inf entries."""


class ExternalDenoiserFailure(TencompError, RuntimeError):
    """The external denoiser process misbehaved (exit, bad reply, short read)."""


class SpawnFailure(ExternalDenoiserFailure):
    """The external denoiser process could not be started."""


class HandshakeFailure(ExternalDenoiserFailure):
    """The external denoiser did not complete the protocol handshake."""


class EmptyMask(TencompError, ValueError):
    """A completion run was requested with no observed entries."""


class RateOutOfRange(TencompError, ValueError):
    """Sampling rate outside (0, 1]."""


class BayerDimsInvalid(TencompError, ValueError):
    """Bayer sampling requires three channels and even spatial dimensions."""


class ZeroReference(TencompError, ValueError):
    """Relative error against an all-zero reference is undefined."""


class SliceTooSmall(TencompError, ValueError):
    """SSIM needs frontal slices at least as large as its 11x11 window."""


class UnreadableImage(TencompError, RuntimeError):
    """An image file could not be decoded into a supported format."""


class InconsistentDims(TencompError, ValueError):
    """Files in an image stack do not share a common shape."""


class WriteFailure(TencompError, RuntimeError):
    """An output file could not be written."""
