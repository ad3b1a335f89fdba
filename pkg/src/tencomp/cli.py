"""Command-line surface for reproducible completion experiments.

Exit codes: 0 on success, 1 on usage errors, 2 on runtime failures.
"""

import argparse
import math
import sys

import numpy as np

from .core import multi_rank, t_product, tnn, tubal_rank
from .denoise import DenoiserSpec, external_spec
from .errors import TencompError
from .metrics import psnr, rel_error, ssim
from .sampling import SamplingSpec, gen_mask
from .solver import SolverConfig, complete
from .tenio import read_mask, read_ten3, write_mask, write_ten3

# Hyper-parameter candidate set swept by `sweep`.
CANDIDATE_GRID = (1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 1e2)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _dims(text):
    try:
        parts = tuple(int(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad dims {text!r}, expected n1,n2,n3")
    if len(parts) != 3 or any(p < 1 for p in parts):
        raise argparse.ArgumentTypeError(f"bad dims {text!r}, expected three positive integers")
    return parts


def _float_list(text):
    try:
        return tuple(float(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad list {text!r}, expected comma-separated floats")


def _denoiser_spec(text):
    if text == "none":
        return DenoiserSpec(kind="identity")
    if text == "tv":
        return DenoiserSpec(kind="tv")
    if text.startswith("external:"):
        cmd = text[len("external:"):]
        if not cmd.strip():
            raise argparse.ArgumentTypeError("external denoiser needs a command")
        return external_spec(cmd)
    raise argparse.ArgumentTypeError(
        f"unknown denoiser {text!r}, expected none, tv or external:<cmd>"
    )


def _fmt(v):
    if math.isfinite(v) and v == int(v):
        return f"{v:.1f}"
    return f"{v:.6g}"


def _read_float_tensor(path):
    return np.asarray(read_ten3(path), dtype=np.float64)


def _cmd_synth(args):
    n1, n2, n3 = args.dims
    r = args.tubal_rank
    if r < 1 or r > min(n1, n2):
        raise _UsageError(f"tubal rank {r} not in [1, {min(n1, n2)}]")
    rng = np.random.Generator(np.random.Philox(args.seed))
    x = t_product(rng.standard_normal((n1, r, n3)), rng.standard_normal((r, n2, n3)))
    write_ten3(args.output, x)
    return 0


def _cmd_mask(args):
    kind = "mask_image" if args.kind == "image" else args.kind
    rate = args.rate if kind in ("elementwise", "tubal") else None
    spec = SamplingSpec(kind=kind, rate=rate, seed=args.seed, mask_path=args.mask_image)
    write_mask(args.output, gen_mask(spec, args.dims))
    return 0


def _cmd_apply_mask(args):
    x = _read_float_tensor(args.input)
    mask = read_mask(args.mask)
    write_ten3(args.output, np.where(mask, x, 0.0))
    return 0


def _cmd_complete(args):
    obs = _read_float_tensor(args.input)
    mask = read_mask(args.mask)
    cfg = SolverConfig(
        beta=args.beta,
        lam=args.lam,
        sigma_override=args.sigma,
        tol=args.tol,
        max_iter=args.max_iter,
        denoiser=args.denoiser,
        clip_output=not args.no_clip,
    )
    x, trace = complete(obs, mask, cfg)
    write_ten3(args.output, x)
    if args.trace:
        trace.to_csv(args.trace)
    print(f"iterations={trace.iterations[-1]} relcha={_fmt(trace.relcha[-1])}")
    return 0


def _cmd_metrics(args):
    a = _read_float_tensor(args.a)
    b = _read_float_tensor(args.b)
    print(f"psnr={_fmt(psnr(a, b))} ssim={_fmt(ssim(a, b))} rse={_fmt(rel_error(a, b))}")
    return 0


def _cmd_sweep(args):
    obs = _read_float_tensor(args.input)
    mask = read_mask(args.mask)
    truth = _read_float_tensor(args.truth)
    best = None
    with open(args.output, "w") as f:
        f.write("beta,lambda,psnr,ssim\n")
        for beta in args.betas:
            for lam in args.lambdas:
                cfg = SolverConfig(beta=beta, lam=lam, tol=args.tol,
                                   max_iter=args.max_iter, denoiser=args.denoiser)
                x, _ = complete(obs, mask, cfg)
                p, s = psnr(x, truth), ssim(x, truth)
                f.write(f"{beta:g},{lam:g},{_fmt(p)},{_fmt(s)}\n")
                if best is None or p > best[2]:
                    best = (beta, lam, p, s)
    print(f"best beta={best[0]:g} lambda={best[1]:g} psnr={_fmt(best[2])} ssim={_fmt(best[3])}")
    return 0


def _cmd_tsvd(args):
    x = _read_float_tensor(args.input)
    print(f"tnn={_fmt(tnn(x))}")
    if args.print_ranks:
        print(f"tubal_rank={tubal_rank(x)}")
        print("multi_rank=" + ",".join(str(int(r)) for r in multi_rank(x)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tencomp", description=__doc__)
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("synth", help="generate a seeded low-tubal-rank tensor")
    p.add_argument("--dims", type=_dims, required=True, metavar="n1,n2,n3")
    p.add_argument("--tubal-rank", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("mask", help="generate an observation mask")
    p.add_argument("--kind", choices=("elementwise", "tubal", "bayer", "image"), required=True)
    p.add_argument("--rate", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dims", type=_dims, required=True, metavar="n1,n2,n3")
    p.add_argument("--mask-image", help="binary image path for --kind image")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_mask)

    p = sub.add_parser("apply-mask", help="zero a tensor outside a mask")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-m", "--mask", required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_apply_mask)

    p = sub.add_parser("complete", help="run the completion solver")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-m", "--mask", required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=0.0)
    p.add_argument("--sigma", type=float, default=None,
                   help="override the denoiser level sqrt(lambda/beta)")
    p.add_argument("--denoiser", type=_denoiser_spec, default=DenoiserSpec(kind="identity"),
                   help="none, tv, or external:<command line>")
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--trace", help="write per-iteration diagnostics CSV here")
    p.add_argument("--no-clip", action="store_true",
                   help="keep the output unclipped (for data outside [0,1])")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_complete)

    p = sub.add_parser("metrics", help="PSNR/SSIM/relative error between two tensors")
    p.add_argument("-a", required=True)
    p.add_argument("-b", required=True)
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("sweep", help="grid-search beta and lambda")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-m", "--mask", required=True)
    p.add_argument("-t", "--truth", required=True)
    p.add_argument("--betas", type=_float_list, default=CANDIDATE_GRID)
    p.add_argument("--lambdas", type=_float_list, default=CANDIDATE_GRID)
    p.add_argument("--denoiser", type=_denoiser_spec, default=DenoiserSpec(kind="tv"))
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("tsvd", help="rank and nuclear norm report")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--print-ranks", action="store_true")
    p.set_defaults(func=_cmd_tsvd)

    return parser


def cli_main(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"tencomp: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    if getattr(args, "func", None) is None:
        parser.print_help(sys.stderr)
        return 1
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"tencomp: {exc}", file=sys.stderr)
        return 1
    except (TencompError, OSError, ValueError) as exc:
        print(f"tencomp: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
