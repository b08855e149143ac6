"""Command line: render a simulator bundle into a figure image.

Exit codes: 0 success, 1 empty data (placeholder written), 2 bad inputs.
"""

from __future__ import annotations

import argparse
import sys

from .figures import EmptyDataError, RenderError, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="excitonlight-render",
        description="Render figure analogs from excitonlight CSV bundles")
    parser.add_argument("command", choices=["render"])
    parser.add_argument("--bundle", required=True, help="bundle directory (CSV + JSON)")
    parser.add_argument("--fig", type=int, required=True, help="figure id 1..10")
    parser.add_argument("--out", required=True, help="output image path")
    args = parser.parse_args(argv)
    try:
        summary = render(args.bundle, args.fig, args.out)
    except EmptyDataError as exc:
        print(f"no data: {exc}", file=sys.stderr)
        return 1
    except RenderError as exc:
        print(f"render error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {summary['out']} ({summary['series']} series, "
          f"{summary['panels']} panels)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
