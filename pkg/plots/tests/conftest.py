"""Synthetic CSV fixture set covering every documented schema.

The fixtures are small hand-built tables with the documented columns; the
plotting layer must render from them without recomputing any physics.
"""

import numpy as np
import pytest


def write_csv(path, header, rows):
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(str(v) for v in row) + "\n")


@pytest.fixture(scope="session")
def fixture_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("csvdata")
    t = np.linspace(0.0, 5.0, 26)
    write_csv(d / "loschmidt.csv", ("t", "L", "r"),
              [(tv, np.exp(-tv), 0.1 * tv) for tv in t])
    rows = []
    for tv in t:
        for m in range(-5, 6):
            rows.append((tv, m, abs(np.sin(0.3 * tv + 0.2 * m))))
    write_csv(d / "fockmap.csv", ("t", "m", "abs_amp"), rows)
    write_csv(d / "folds.csv", ("t", "eta_star", "is_cusp"),
              [(tv, 0.6 + 0.2 * np.sin(tv), 1 if abs(tv - 2.4) < 0.1 else 0)
               for tv in t])
    write_csv(d / "switchline.csv", ("t", "eta"),
              [(tv, 0.5 + 0.05 * tv) for tv in t[10:20]])
    write_csv(d / "TE.csv", ("branch", "eps", "T"),
              [(k, e, 2.0 + k + (e - 0.3) ** 2 * (1 - 2 * k))
               for k in (0, 1) for e in np.linspace(-0.5, 0.9, 30)])
    write_csv(d / "saddles.csv",
              ("branch", "t", "re_phi0", "im_phi0", "re_S", "im_S", "residual"),
              [(k, tv, 0.4 - 0.05 * tv, 0.1 * k + 0.02 * tv, -tv, 0.01 * tv,
                1e-12) for k in (0, 1) for tv in t])
    write_csv(d / "rate_semiclassical.csv",
              ("t", "r0", "r1", "r_min", "L_finite_j"),
              [(tv, 0.05 * tv, max(0.2 - 0.04 * tv, 0.0),
                min(0.05 * tv, max(0.2 - 0.04 * tv, 0.0)), np.exp(-tv))
               for tv in t])
    write_csv(d / "bipartite_rates.csv",
              ("t", "L", "r", "L_plus", "L_minus", "r_plus", "r_minus",
               "p_plus"),
              [(tv, np.exp(-tv), 0.05 * tv, 0.6 * np.exp(-tv),
                0.4 * np.exp(-tv), 0.04 * tv, 0.06 * tv, 0.55) for tv in t])
    rows = []
    for source in ("semiclassical-branch(k=0)", "semiclassical-branch(k=1)"):
        for tv in t:
            for eta in np.linspace(0.3, 0.9, 13):
                rows.append((tv, round(eta, 6), 0.1 * abs(eta - 0.6) + 0.02 * tv,
                             source))
    write_csv(d / "surface.csv", ("t", "eta", "r", "source"), rows)
    write_csv(d / "dpt.csv", ("t_c", "r_at_tc"), [(3.67, 0.155)])
    write_csv(d / "rainbow_io.csv", ("order", "h", "theta_deg"),
              [(o, h, 40 * h + 5 * o) for o in (1, 2)
               for h in np.linspace(0, 1, 40)])
    write_csv(d / "darkband.csv", ("theta_deg", "I", "r"),
              [(th, np.exp(-0.1 * (th - 42) * (51 - th)), 0.01 * (th - 42))
               for th in np.linspace(42.0, 51.0, 40)])
    return d
