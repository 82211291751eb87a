"""Command-line entry points.

Exit codes: 0 on success, 1 on configuration or usage errors, 2 when a
run finished but some samples failed.
"""

from __future__ import annotations

import argparse
import sys

from .fileio import FormatError, save_image
from .phantom import make_phantom
from .pipeline import (
    ConfigError,
    GenerationConfig,
    generate,
    report,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_PARTIAL = 2


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; the CLI contract reserves
    # 2 for partial runs, so usage errors are remapped to 1
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ctdegrad", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser(
        "generate", help="generate a benchmark dataset tree"
    )
    gen.add_argument("--config", required=True, help="generation config JSON")
    gen.add_argument("--seed", required=True, type=int, help="master seed")
    gen.add_argument("--out", required=True, help="output directory")

    rep = sub.add_parser(
        "report", help="score a generated dataset and emit tables"
    )
    rep.add_argument("--manifest", required=True, help="manifest.json path")
    rep.add_argument(
        "--metrics",
        default="psnr,ssim,vif",
        help="comma-separated metric names (default: psnr,ssim,vif)",
    )
    rep.add_argument(
        "--embeddings", default=None, help="optional CTDE embeddings file"
    )
    rep.add_argument(
        "--out", default=None, help="report output directory (default: reports/)"
    )

    phm = sub.add_parser("phantom", help="render one reference phantom")
    phm.add_argument("--size", type=int, default=512, help="image side in pixels")
    phm.add_argument("--seed", required=True, type=int, help="phantom seed")
    phm.add_argument("--out", required=True, help="output CTDI path")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "generate":
            cfg = GenerationConfig.from_json(args.config)
            result = generate(cfg, args.seed, args.out)
            print(f"generated {result.num_samples} samples -> {result.out_dir}")
            if result.failures:
                for failure in result.failures:
                    print(
                        f"failed: {failure['sample']}: {failure['error']}",
                        file=sys.stderr,
                    )
                return EXIT_PARTIAL
            return EXIT_OK
        if args.command == "report":
            metrics = tuple(
                m.strip() for m in args.metrics.split(",") if m.strip()
            )
            if not metrics:
                raise ConfigError("no metrics requested")
            result = report(
                args.manifest,
                metrics=metrics,
                embeddings_path=args.embeddings,
                out_dir=args.out,
            )
            print(
                f"scored {result.num_scored} samples -> {result.csv_path}, "
                f"{result.markdown_path}"
            )
            if result.failures:
                for failure in result.failures:
                    print(
                        f"failed: {failure['sample']}: {failure['error']}",
                        file=sys.stderr,
                    )
                return EXIT_PARTIAL
            return EXIT_OK
        if args.command == "phantom":
            try:
                img = make_phantom(args.size, args.seed)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
            save_image(args.out, img)
            print(f"wrote {args.size}x{args.size} phantom -> {args.out}")
            return EXIT_OK
        raise ConfigError(f"unknown command {args.command!r}")
    except (ConfigError, FormatError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
