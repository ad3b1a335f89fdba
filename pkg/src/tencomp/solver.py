"""ADMM solver for tensor completion with a low-rank plus denoiser prior.

The model completes a partially observed tensor by minimizing the tensor
nuclear norm plus a denoiser-induced regularizer, subject to agreement
with the observations.  Splitting with two auxiliary variables gives the
iteration (penalty ``beta``, regularizer weight ``lam``):

* ``y``-step: singular value thresholding of ``x + l1/beta`` at ``1/beta``;
* ``z``-step: denoise ``x + l2/beta`` at level ``sigma = sqrt(lam/beta)``;
* ``x``-step: observed entries copied from the data, the rest set to
  ``(beta*y + beta*z - l1 - l2) / (2*beta)``;
* multipliers: ``l1 += beta*(x - y)``, ``l2 += beta*(x - z)``.

Iterations stop when the relative change of ``x`` falls below ``tol`` or
``max_iter`` is reached.
"""

import io
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .core import as_tensor3
from .denoise import DenoiserSession, DenoiserSpec, denoise
from .errors import DimensionMismatch, EmptyMask
from .prox import _svt_spectral


@dataclass
class SolverConfig:
    """Hyper-parameters of a completion run.

    ``sigma_override``, when set, replaces the default denoiser level
    ``sqrt(lam/beta)``.  ``trace_every`` records one diagnostic row every
    so many iterations (the final iteration is always recorded).
    """

    beta: float
    lam: float = 0.0
    sigma_override: float | None = None
    tol: float = 1e-4
    max_iter: int = 500
    denoiser: DenoiserSpec = field(default_factory=DenoiserSpec)
    clip_output: bool = True
    trace_every: int = 1

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if self.lam < 0:
            raise ValueError(f"lam must be nonnegative, got {self.lam}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be at least 1, got {self.max_iter}")
        if self.trace_every < 1:
            raise ValueError(f"trace_every must be at least 1, got {self.trace_every}")


@dataclass
class SolverTrace:
    """Per-iteration diagnostics.

    ``tnn`` is the tensor nuclear norm of the ``y`` iterate (read off the
    thresholded singular values, so it costs nothing extra); ``res_y`` and
    ``res_z`` are the primal residuals ``||x - y||_F`` and ``||x - z||_F``
    after the ``x``-step.
    """

    iterations: list[int] = field(default_factory=list)
    relcha: list[float] = field(default_factory=list)
    tnn: list[float] = field(default_factory=list)
    res_y: list[float] = field(default_factory=list)
    res_z: list[float] = field(default_factory=list)
    seconds: list[float] = field(default_factory=list)

    def record(self, iteration, relcha, tnn, res_y, res_z, seconds):
        self.iterations.append(iteration)
        self.relcha.append(relcha)
        self.tnn.append(tnn)
        self.res_y.append(res_y)
        self.res_z.append(res_z)
        self.seconds.append(seconds)

    def to_csv(self, path_or_file) -> None:
        """Write ``iter,relcha,tnn,res_y,res_z,seconds`` records."""
        own = not isinstance(path_or_file, io.IOBase)
        f = open(path_or_file, "w") if own else path_or_file
        try:
            f.write("iter,relcha,tnn,res_y,res_z,seconds\n")
            for row in zip(self.iterations, self.relcha, self.tnn,
                           self.res_y, self.res_z, self.seconds):
                f.write("%d,%.12g,%.12g,%.12g,%.12g,%.6f\n" % row)
        finally:
            if own:
                f.close()


def _check_inputs(o, mask):
    o = as_tensor3(o, "observed tensor")
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != o.shape:
        raise DimensionMismatch(f"mask shape {mask.shape} does not match tensor {o.shape}")
    if not mask.any():
        raise EmptyMask("completion needs at least one observed entry")
    return o, mask


def complete(o: np.ndarray, mask: np.ndarray, cfg: SolverConfig) -> tuple[np.ndarray, SolverTrace]:
    """Complete ``o`` on the support ``mask`` under ``cfg``.

    ``o`` is zero-filled outside the mask before use, so values at
    unobserved positions are ignored.  Returns the recovered tensor
    (clipped to [0, 1] when ``cfg.clip_output``) and the iteration trace.
    """
    o, mask = _check_inputs(o, mask)
    beta = cfg.beta
    sigma = cfg.sigma_override if cfg.sigma_override is not None else math.sqrt(cfg.lam / beta)

    o_obs = np.where(mask, o, 0.0)
    x = o_obs.copy()
    y = o_obs.copy()
    z = o_obs.copy()
    l1 = np.zeros_like(x)
    l2 = np.zeros_like(x)

    trace = SolverTrace()
    session = None
    if cfg.denoiser.kind == "external":
        session = DenoiserSession(cfg.denoiser)
    start = time.perf_counter()
    try:
        for it in range(1, cfg.max_iter + 1):
            y, tnn_y = _svt_spectral(x + l1 / beta, 1.0 / beta)
            z = denoise(cfg.denoiser, x + l2 / beta, sigma, session=session)
            x_new = np.where(mask, o_obs, (beta * (y + z) - l1 - l2) / (2.0 * beta))
            l1 = l1 + beta * (x_new - y)
            l2 = l2 + beta * (x_new - z)

            x_norm = np.linalg.norm(x)
            change = np.linalg.norm(x_new - x)
            relcha = change / x_norm if x_norm > 0 else change
            x = x_new

            done = relcha < cfg.tol or it == cfg.max_iter
            if it % cfg.trace_every == 0 or done:
                trace.record(it, relcha, tnn_y,
                             float(np.linalg.norm(x - y)), float(np.linalg.norm(x - z)),
                             time.perf_counter() - start)
            if relcha < cfg.tol:
                break
    finally:
        if session is not None:
            session.close()

    if cfg.clip_output:
        x = np.clip(x, 0.0, 1.0)
    return x, trace


def solve_tnn_only(o: np.ndarray, mask: np.ndarray, beta: float,
                   tol: float = 1e-4, max_iter: int = 500) -> tuple[np.ndarray, SolverTrace]:
    """Pure low-rank completion: ``complete`` with the identity denoiser and ``lam = 0``."""
    cfg = SolverConfig(beta=beta, lam=0.0, tol=tol, max_iter=max_iter,
                       denoiser=DenoiserSpec(kind="identity"))
    return complete(o, mask, cfg)


def tnn_only_config(beta: float, tol: float = 1e-4, max_iter: int = 500,
                    **kwargs) -> SolverConfig:
    """Config matching ``solve_tnn_only``, for callers that need to tweak it."""
    cfg = SolverConfig(beta=beta, lam=0.0, tol=tol, max_iter=max_iter,
                       denoiser=DenoiserSpec(kind="identity"))
    return replace(cfg, **kwargs) if kwargs else cfg
