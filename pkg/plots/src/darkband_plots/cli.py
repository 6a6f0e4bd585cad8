"""Command line entry: darkband-plots <figure-id> --data-dir DIR --out FILE."""

import argparse
import sys

from .recipes import FIGURE_IDS, recipe_for_directory, render
from .schema import SchemaError


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="darkband-plots",
        description="Render figure analogues from darkband CSV data",
    )
    parser.add_argument("figure", choices=FIGURE_IDS)
    parser.add_argument("--data-dir", required=True,
                        help="directory holding the CSV files")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--style", action="append", default=[],
                        metavar="KEY=VALUE",
                        help="style option (repeatable), e.g. j=350")
    args = parser.parse_args(argv)
    style = {}
    for item in args.style:
        if "=" not in item:
            print(f"bad --style entry {item!r}, expected KEY=VALUE",
                  file=sys.stderr)
            return 2
        key, val = item.split("=", 1)
        style[key] = val
    try:
        recipe = recipe_for_directory(args.figure, args.data_dir, style)
        render(recipe, args.out)
    except (SchemaError, FileNotFoundError) as exc:
        print(str(exc), file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
