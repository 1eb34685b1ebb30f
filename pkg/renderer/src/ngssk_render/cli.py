"""Command line wrapper: ngssk-render --manifest PATH --out PATH [--format svg|png]."""

from __future__ import annotations

import argparse
import sys

from ngssk_render.render import RenderError, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ngssk-render", description="render an ngssk figure bundle"
    )
    parser.add_argument("--manifest", required=True, help="bundle manifest JSON")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--format", choices=("svg", "png"), default="svg")
    args = parser.parse_args(argv)
    try:
        written = render(args.manifest, args.out, args.format)
    except (RenderError, FileNotFoundError, KeyError, ValueError) as exc:
        print(f"render error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {written}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
