"""Deterministic CSV emission shared by the CLI subcommands.

All floats are written with 17 significant digits so that re-running a
pipeline with identical parameters reproduces byte-identical files.
Underflow-sentinel rates (nan) are written as the literal ``underflow``.
"""

import os


def fmt(value):
    if isinstance(value, float):
        if value != value:  # nan sentinel
            return "underflow"
        return f"{value:.17g}"
    if isinstance(value, bool):
        return "1" if value else "0"
    return str(value)


def write_csv(path, header, rows):
    """Write rows (iterables of scalars) under a comma-joined header."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")
    return path
