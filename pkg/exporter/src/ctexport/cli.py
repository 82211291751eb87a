"""Command-line entry point.

Exit codes: 0 on success, 1 on any configuration, model, or input
error.
"""

import argparse
import sys

from .encoders import ModelError, available_models
from .export import ExportError, ExportJob, export

EXIT_OK = 0
EXIT_ERROR = 1


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; keep a single failure code
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(EXIT_ERROR)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ctexport", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    exp = sub.add_parser(
        "export", help="encode a benchmark tree into a CTDE embedding file"
    )
    exp.add_argument("--manifest", required=True, help="manifest.json path")
    exp.add_argument(
        "--model",
        default="offline-v1",
        help=f"encoder identifier (available: {', '.join(available_models())})",
    )
    exp.add_argument(
        "--patches", action="store_true", help="also export patch tokens"
    )
    exp.add_argument("--out", required=True, help="output CTDE path")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    job = ExportJob(
        manifest_path=args.manifest,
        out_path=args.out,
        model_id=args.model,
        include_patches=args.patches,
    )
    try:
        result = export(job)
    except (ExportError, ModelError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    print(
        f"exported {result.num_images} images, {result.num_patch_tokens} "
        f"patch tokens, {result.num_prompts} prompts -> {result.out_path}"
    )
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
