"""Third-order tensor completion with a low-rank plus denoiser prior.

The package provides the mode-3 Fourier tensor algebra (t-product, t-SVD,
tubal and multi rank, tensor nuclear norm), the proximal operators built
on it, an ADMM completion solver with pluggable denoisers (built-in
identity and total variation, or any external process speaking the
denoiser wire protocol), seeded mask generators, image quality metrics,
and file I/O for tensors and image stacks.
"""

from .core import (
    TSVDFactors,
    conj_transpose,
    dft_mode3,
    fourier_singular_values,
    identity_tensor,
    idft_mode3,
    multi_rank,
    t_product,
    tnn,
    tsvd,
    tubal_rank,
)
from .denoise import (
    DenoiserSession,
    DenoiserSpec,
    denoise,
    echo_command,
    external_spec,
    spawn_external,
    total_variation,
)
from .errors import (
    BayerDimsInvalid,
    DimensionMismatch,
    EmptyMask,
    ExternalDenoiserFailure,
    HandshakeFailure,
    ImaginaryResidueTooLarge,
    InconsistentDims,
    NonFiniteOutput,
    RateOutOfRange,
    SliceTooSmall,
    SpawnFailure,
    SvdFailure,
    TencompError,
    UnreadableImage,
    WriteFailure,
    ZeroReference,
)
from .metrics import psnr, rel_error, ssim
from .prox import project_support, svt_tnn
from .sampling import SamplingSpec, gen_mask
from .solver import SolverConfig, SolverTrace, complete, solve_tnn_only
from .tenio import (
    load_image_stack,
    read_mask,
    read_ten3,
    save_image_stack,
    write_mask,
    write_ten3,
)

__version__ = "0.1.0"
