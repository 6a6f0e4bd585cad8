"""Batch front end: one subcommand per reproduced figure.

Every run resolves its parameter set (defaults < config file < flags),
executes the corresponding module pipeline, writes the module's CSV files
plus a ``manifest.json`` listing the resolved parameters and emitted files.
The pipelines are deterministic: identical resolved parameters give
byte-identical CSV output.

Config files are flat ``key = value`` text; keys match the long flag names
with dashes or underscores.

Exit codes: 0 ok, 2 configuration error, 3 numeric failure, 4 resource
budget exceeded.
"""

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, bipartite, catastrophe, classical, complexmech
from . import csvio, dicke, scan, wkb

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_RESOURCE = 4


class ConfigError(ValueError):
    pass


def _parse_config_file(path):
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        values[key.replace("-", "_")] = val
    return values


_FLAG_TYPES = {
    "j": float,
    "n_atoms": int,
    "omega_over_g": float,
    "m0": str,
    "t_max": float,
    "t_steps": int,
    "eta_steps": int,
    "norm": str,
    "legacy_sign": bool,
    "workers": int,
    "out_dir": str,
    "n_traj": int,
    "refractive_index": float,
    "wavenumber": float,
}


def _build_parser():
    p = argparse.ArgumentParser(
        prog="darkband",
        description="Quench dynamics, caustics and dark-band analysis for the "
        "fully connected transverse-field Ising model",
    )
    p.add_argument("--version", action="version", version=f"darkband {__version__}")
    sub = p.add_subparsers(dest="subcommand", required=True)

    def add(name, help_text, **defaults):
        q = sub.add_parser(name, help=help_text)
        q.add_argument("--config", default=None, help="flat key=value config file")
        q.add_argument("--j", type=float, default=defaults.get("j"))
        q.add_argument("--n-atoms", dest="n_atoms", type=int,
                       default=defaults.get("n_atoms", 20))
        q.add_argument("--omega-over-g", dest="omega_over_g", type=float,
                       default=1.0)
        q.add_argument("--m0", default="auto",
                       help="initial Fock label, or 'auto' for nearest to 0.6 j")
        q.add_argument("--t-max", dest="t_max", type=float,
                       default=defaults.get("t_max", 6.0))
        q.add_argument("--t-steps", dest="t_steps", type=int,
                       default=defaults.get("t_steps", 600))
        q.add_argument("--eta-steps", dest="eta_steps", type=int,
                       default=defaults.get("eta_steps", 61))
        q.add_argument("--norm", choices=("per-j", "per-N"), default="per-j")
        q.add_argument("--legacy-sign", dest="legacy_sign", action="store_true")
        q.add_argument("--workers", type=int, default=1)
        q.add_argument("--out-dir", dest="out_dir", default=".")
        q.add_argument("--n-traj", dest="n_traj", type=int,
                       default=defaults.get("n_traj", 256))
        q.add_argument("--n", dest="refractive_index", type=float,
                       default=4.0 / 3.0, help="refractive index (rainbow)")
        q.add_argument("--k", dest="wavenumber", type=float, default=200.0,
                       help="wavenumber scale of the dark-band intensity model")
        return q

    add("fockmap", "Fock-space amplitude map (caustic morphology)", j=80.0)
    add("loschmidt", "return probability and rate function", j=80.0)
    add("classical", "trajectory ensemble snapshots and fold detection",
        j=80.0, t_steps=9)
    add("wkb", "return-time curves and Bohr-Sommerfeld spectrum", j=80.0)
    add("darkband", "complex-branch rates and finite-size echo", j=350.0,
        t_steps=160)
    add("bipartite", "conditioned measurement protocol", j=None)
    add("switchline", "branch-rate surfaces and switching line", j=80.0,
        t_steps=60, eta_steps=31)
    add("rainbow", "geometric rainbow and dark-band intensity model", j=None)
    return p


def _apply_config(args):
    if args.config is None:
        return args
    file_vals = _parse_config_file(args.config)
    parser_defaults = {
        "j": args.j, "n_atoms": 20, "omega_over_g": 1.0, "m0": "auto",
        "t_max": 6.0, "t_steps": 600, "eta_steps": 61, "norm": "per-j",
        "legacy_sign": False, "workers": 1, "out_dir": ".", "n_traj": 256,
        "refractive_index": 4.0 / 3.0, "wavenumber": 200.0,
    }
    for key, raw in file_vals.items():
        if key not in _FLAG_TYPES:
            raise ConfigError(f"unknown config key {key!r}")
        caster = _FLAG_TYPES[key]
        try:
            val = raw.lower() in ("1", "true", "yes") if caster is bool else caster(raw)
        except ValueError as exc:
            raise ConfigError(f"config field {key!r}: {exc}") from exc
        # flags explicitly given on the command line win; argparse cannot
        # tell, so config only fills values still at their defaults
        if getattr(args, key, None) == parser_defaults.get(key):
            setattr(args, key, val)
    return args


def _resolve(args):
    params = {
        "subcommand": args.subcommand,
        "omega_over_g": args.omega_over_g,
        "G": 1.0,
        "Omega": args.omega_over_g,
        "norm": args.norm,
        "legacy_sign": bool(args.legacy_sign),
        "workers": args.workers,
        "t_max": args.t_max,
        "t_steps": args.t_steps,
        "eta_steps": args.eta_steps,
        "n_traj": args.n_traj,
        "n_atoms": args.n_atoms,
        "refractive_index": args.refractive_index,
        "wavenumber": args.wavenumber,
    }
    if params["omega_over_g"] <= 0:
        raise ConfigError("omega-over-g must be positive")
    if params["t_max"] <= 0 or params["t_steps"] < 2:
        raise ConfigError("time grid requires t_max > 0 and t_steps >= 2")
    if args.j is not None:
        space = dicke.DickeSpace(float(args.j))
        params["j"] = space.j
        if args.m0 == "auto":
            params["m0"] = dicke.nearest_m0(space)
        else:
            try:
                params["m0"] = float(args.m0)
            except ValueError as exc:
                raise ConfigError(f"--m0 must be a number or 'auto'") from exc
            space.index_of(params["m0"])  # validates
    return params


def _times(params):
    return np.linspace(0.0, params["t_max"], params["t_steps"] + 1)


def _quench(params):
    space = dicke.DickeSpace(params["j"])
    sign = -1.0 if params["legacy_sign"] else 1.0
    return dicke.QuenchConfig(
        G=sign * params["G"], Omega=params["Omega"], space=space,
        m0=params["m0"], times=_times(params), norm=params["norm"],
    )


def run_loschmidt(params, out):
    cfg = _quench(params)
    L = dicke.loschmidt(cfg)
    r = dicke.rate_function(L, cfg.space, params["norm"])
    rows = [(t, Lv, rv) for (t, Lv), (_, rv) in zip(L, r)]
    return [csvio.write_csv(out / "loschmidt.csv", ("t", "L", "r"), rows)]

def run_fockmap(params, out):
    cfg = _quench(params)
    amps = dicke.fock_map(cfg)
    m_vals = cfg.space.m_values()
    rows = [
        (t, m_vals[im], amps[im, it])
        for it, t in enumerate(cfg.times)
        for im in range(cfg.space.dim)
    ]
    files = [csvio.write_csv(out / "fockmap.csv", ("t", "m", "abs_amp"), rows)]
    files += run_loschmidt(params, out)
    return files


def run_classical(params, out):
    eta0 = params["m0"] / params["j"]
    times = np.linspace(0.0, params["t_max"], params["t_steps"] + 1)
    g_eff = classical.effective_g(params["G"], params["legacy_sign"])
    phi0, etas, phis = classical.ensemble(
        eta0, params["n_traj"], times, g_eff, params["Omega"]
    )
    rows = [
        (t, phi0[k], phis[i, k], etas[i, k])
        for i, t in enumerate(times)
        for k in range(len(phi0))
    ]
    files = [csvio.write_csv(out / "ensemble.csv",
                             ("t", "phi0", "phi", "eta"), rows)]
    fold_rows = []
    for i, t in enumerate(times):
        if i == 0:
            continue
        folds, degenerate = classical.detect_folds(phi0, etas[i])
        if degenerate:
            continue
        for f in folds:
            fold_rows.append((t, f.eta_star, f.is_cusp))
    files.append(csvio.write_csv(out / "folds.csv",
                                 ("t", "eta_star", "is_cusp"), fold_rows))
    return files


def run_wkb(params, out):
    G, Om = params["G"], params["Omega"]
    eta0 = params["m0"] / params["j"]
    space = dicke.DickeSpace(params["j"])
    rows = []
    for k in (0, 1):
        branch = wkb.ActionBranch.k0(eta0) if k == 0 else wkb.ActionBranch.k1(eta0)
        grid = wkb.EnergyGrid.for_latitude(eta0, 400, G, Om)
        for eps in grid.eps:
            rows.append((k, eps, wkb.return_time(eps, branch, G, Om)))
    files = [csvio.write_csv(out / "TE.csv", ("branch", "eps", "T"), rows)]
    es = dicke.diagonalize(dicke.build_hamiltonian(space, G, Om))
    span = 0.5 * (classical.energy_maximum(G, Om) + Om)
    lv_rows = []
    for lv in wkb.bohr_sommerfeld(space, G, Om):
        if lv.bracket_failed:
            continue
        exact = es.energies[lv.n] / space.j
        lv_rows.append((lv.n, lv.eps, exact, abs(lv.eps - exact) / span))
    files.append(csvio.write_csv(out / "bs_levels.csv",
                                 ("n", "eps_wkb", "eps_exact", "rel_err"), lv_rows))
    return files


def run_darkband(params, out):
    G, Om = params["G"], params["Omega"]
    j = params["j"]
    eta0 = params["m0"] / j
    b0 = wkb.ActionBranch.k0(eta0)
    b1 = wkb.ActionBranch.k1(eta0)
    c0 = wkb.caustic_times(b0, G, Om)
    c1 = wkb.caustic_times(b1, G, Om)
    pad = 0.12 * (c1.time - c0.time)
    times = np.linspace(max(c0.time - pad, 0.05), c1.time + pad,
                        params["t_steps"] + 1)
    cont0 = complexmech.continue_branch(b0, times, G=G, Omega=Om, caustic=c0)
    cont1 = complexmech.continue_branch(b1, times, G=G, Omega=Om, caustic=c1)
    saddle_rows = []
    for cont in (cont0, cont1):
        for t, sol in zip(times, cont.solutions):
            if sol is None or not sol.converged:
                continue
            saddle_rows.append((
                cont.branch.k, t, sol.phi0.real, sol.phi0.imag,
                sol.action.real, sol.action.imag, sol.residual,
            ))
    files = [csvio.write_csv(
        out / "saddles.csv",
        ("branch", "t", "re_phi0", "im_phi0", "re_S", "im_S", "residual"),
        saddle_rows,
    )]
    curve = complexmech.asymptotic_rate(times, eta0, G, Om,
                                        continuations=(cont0, cont1))
    L_fin = dict(complexmech.semiclassical_loschmidt(j, times, eta0, G, Om))
    rate_rows = []
    for i, t in enumerate(times):
        r0 = curve.branch_rates[0][i]
        r1 = curve.branch_rates[1][i]
        rate_rows.append((t, r0, r1, curve.r[i], L_fin.get(t, float("nan"))))
    files.append(csvio.write_csv(
        out / "rate_semiclassical.csv", ("t", "r0", "r1", "r_min", "L_finite_j"),
        rate_rows,
    ))
    return files


def run_bipartite(params, out):
    space = bipartite.BipartiteSpace(params["n_atoms"])
    m0 = dicke.nearest_m0(space.sub_space())
    rows = bipartite.conditioned_rates(space, m0, _times(params),
                                       params["G"], params["Omega"])
    return [csvio.write_csv(
        out / "bipartite_rates.csv",
        ("t", "L", "r", "L_plus", "L_minus", "r_plus", "r_minus", "p_plus"),
        rows,
    )]


def run_switchline(params, out):
    G, Om = params["G"], params["Omega"]
    eta0 = params["m0"] / params["j"]
    cfg = _quench(params)
    exact = scan.rate_surface_exact(cfg)
    rows = []
    for ie, eta in enumerate(exact.etas):
        for it, t in enumerate(exact.times):
            rows.append((t, eta, exact.r[ie, it], exact.source))
    b0 = wkb.ActionBranch.k0(eta0)
    b1 = wkb.ActionBranch.k1(eta0)
    c0 = wkb.caustic_times(b0, G, Om)
    c1 = wkb.caustic_times(b1, G, Om)
    pad = 0.05 * (c1.time - c0.time)
    times = np.linspace(c0.time + pad, c1.time + 0.3, params["t_steps"] + 1)
    etas = np.linspace(0.2, 0.95, params["eta_steps"])
    s0 = scan.branch_rate_surface(b0, times, etas, G=G, Omega=Om,
                                  workers=params["workers"])
    s1 = scan.branch_rate_surface(b1, times, etas, G=G, Omega=Om,
                                  workers=params["workers"])
    for surf in (s0, s1):
        for ie, eta in enumerate(surf.etas):
            for it, t in enumerate(surf.times):
                rows.append((t, eta, surf.r[ie, it], surf.source))
    files = [csvio.write_csv(out / "surface.csv",
                             ("t", "eta", "r", "source"), rows)]
    line = scan.switching_line(s0, s1)
    files.append(csvio.write_csv(out / "switchline.csv", ("t", "eta"),
                                 [tuple(p) for p in line]))
    res = scan.locate_dpt(eta0, G, Om)
    files.append(csvio.write_csv(out / "dpt.csv", ("t_c", "r_at_tc"),
                                 [(res.t_c, res.rate)]))
    return files


def run_rainbow(params, out):
    n = params["refractive_index"]
    hs = np.linspace(0.0, 1.0 - 1e-9, 400)
    rows = [
        (order, h, np.degrees(catastrophe.raindrop_deflection(h, n, order)))
        for order in (1, 2)
        for h in hs
    ]
    files = [csvio.write_csv(out / "rainbow_io.csv",
                             ("order", "h", "theta_deg"), rows)]
    p = catastrophe.RainbowParams.for_droplet(n, k=params["wavenumber"])
    thetas = np.linspace(p.theta1, p.theta2, 301)
    band_rows = []
    for th in thetas:
        I = catastrophe.dark_band_intensity(th, p)
        r, _ = catastrophe.dark_band_rate(th, p)
        band_rows.append((np.degrees(th), I, r))
    files.append(csvio.write_csv(out / "darkband.csv",
                                 ("theta_deg", "I", "r"), band_rows))
    return files


_RUNNERS = {
    "fockmap": run_fockmap,
    "loschmidt": run_loschmidt,
    "classical": run_classical,
    "wkb": run_wkb,
    "darkband": run_darkband,
    "bipartite": run_bipartite,
    "switchline": run_switchline,
    "rainbow": run_rainbow,
}


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_CONFIG
    start = time.time()
    try:
        args = _apply_config(args)
        params = _resolve(args)
    except (ConfigError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        files = _RUNNERS[params["subcommand"]](params, out)
    except bipartite.ResourceError as exc:
        print(f"resource budget exceeded: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ValueError, RuntimeError, ArithmeticError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    manifest = {
        "tool": "darkband",
        "version": __version__,
        "parameters": params,
        "files": sorted(Path(f).name for f in files),
        "wall_seconds": round(time.time() - start, 3),
    }
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
