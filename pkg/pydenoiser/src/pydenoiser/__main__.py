import argparse
import sys

from . import AdapterConfig, default_weights_path
from .server import serve


def main() -> None:
    parser = argparse.ArgumentParser(prog="pydenoiser", description=__doc__)
    parser.add_argument("--mode", choices=("echo", "neural"), default="echo")
    parser.add_argument("--weights", default=None,
                        help="weights archive for neural mode (defaults to the bundled one)")
    parser.add_argument("--device", choices=("cpu", "gpu"), default="cpu")
    parser.add_argument("--channel-mode", choices=("per_slice", "joint_rgb"),
                        default="joint_rgb")
    args = parser.parse_args()

    weights = args.weights
    if args.mode == "neural" and weights is None:
        bundled = default_weights_path()
        if bundled is None:
            print("pydenoiser: neural mode needs --weights (no bundled archive found)",
                  file=sys.stderr)
            sys.exit(1)
        weights = str(bundled)

    try:
        config = AdapterConfig(mode=args.mode, weights_path=weights,
                               device=args.device, channel_mode=args.channel_mode)
        code = serve(config)
    except Exception as exc:
        print(f"pydenoiser: {exc}", file=sys.stderr)
        sys.exit(1)
    sys.exit(code)


if __name__ == "__main__":
    main()
