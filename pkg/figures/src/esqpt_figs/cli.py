"""Command line wrapper: render_figs BUNDLE_DIR OUT_DIR."""
import argparse
import sys

from .bundle import BundleError
from .render import render_all


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="render_figs",
        description="Render the five figure images from a reproduce-all "
                    "bundle directory.")
    parser.add_argument("bundle_dir", help="directory holding summary.json")
    parser.add_argument("out_dir", help="where the PNG files go")
    args = parser.parse_args(argv)
    try:
        paths = render_all(args.bundle_dir, args.out_dir)
    except BundleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in paths:
        print(path)
    return 0
