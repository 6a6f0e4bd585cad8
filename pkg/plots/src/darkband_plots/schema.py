"""CSV loading with schema validation for the darkband data files.

Every reader checks the header against the documented column set and raises
:class:`SchemaError` naming the missing and unexpected columns; downstream
figure code can then assume well-formed arrays.  The rate columns may carry
the ``underflow`` sentinel, which parses to nan.
"""

import csv

import numpy as np

#: documented columns per data file (order-insensitive)
SCHEMAS = {
    "loschmidt.csv": ("t", "L", "r"),
    "fockmap.csv": ("t", "m", "abs_amp"),
    "ensemble.csv": ("t", "phi0", "phi", "eta"),
    "folds.csv": ("t", "eta_star", "is_cusp"),
    "TE.csv": ("branch", "eps", "T"),
    "bs_levels.csv": ("n", "eps_wkb", "eps_exact", "rel_err"),
    "saddles.csv": ("branch", "t", "re_phi0", "im_phi0", "re_S", "im_S",
                    "residual"),
    "rate_semiclassical.csv": ("t", "r0", "r1", "r_min", "L_finite_j"),
    "bipartite_rates.csv": ("t", "L", "r", "L_plus", "L_minus", "r_plus",
                            "r_minus", "p_plus"),
    "surface.csv": ("t", "eta", "r", "source"),
    "switchline.csv": ("t", "eta"),
    "dpt.csv": ("t_c", "r_at_tc"),
    "rainbow_io.csv": ("order", "h", "theta_deg"),
    "darkband.csv": ("theta_deg", "I", "r"),
}


class SchemaError(ValueError):
    """Input file header does not match the documented columns."""

    def __init__(self, path, kind, missing, unexpected):
        self.missing = sorted(missing)
        self.unexpected = sorted(unexpected)
        parts = [f"{path}: schema mismatch for {kind}"]
        if self.missing:
            parts.append(f"missing columns: {', '.join(self.missing)}")
        if self.unexpected:
            parts.append(f"unexpected columns: {', '.join(self.unexpected)}")
        super().__init__("; ".join(parts))


def _parse(value):
    if value == "underflow":
        return float("nan")
    try:
        return float(value)
    except ValueError:
        return value


def load(path, kind):
    """Read ``path`` as file-kind ``kind``, returning {column: array}.

    String-valued columns come back as object arrays; numeric ones as float
    (with the underflow sentinel mapped to nan).
    """
    expected = SCHEMAS[kind]
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(path, kind, expected, []) from None
        got = [h.strip() for h in header]
        missing = set(expected) - set(got)
        unexpected = set(got) - set(expected)
        if missing or unexpected:
            raise SchemaError(path, kind, missing, unexpected)
        rows = [[_parse(v) for v in row] for row in reader if row]
    cols = {}
    for i, name in enumerate(got):
        values = [row[i] for row in rows]
        numeric = all(isinstance(v, float) for v in values)
        cols[name] = np.array(values, dtype=float if numeric else object)
    return cols
