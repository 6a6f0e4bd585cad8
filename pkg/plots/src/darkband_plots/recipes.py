"""Figure recipes: CSV inputs in, deterministic image out.

Each builder arranges data from the validated CSV files; no physics is
recomputed here beyond axis transforms (logs, degrees, reshapes).  Rendering
is pinned to the Agg backend with fixed style so identical inputs give
byte-identical image files.
"""

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .schema import load

FIGURE_IDS = ("fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8")

_RC = {
    "figure.dpi": 130,
    "savefig.dpi": 130,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.25,
    "svg.hashsalt": "darkband",
}


@dataclass(frozen=True)
class FigureRecipe:
    """One renderable figure: identifier, named CSV inputs, style options.

    ``inputs`` maps slot names to paths (or lists of paths for overlay
    slots); ``style`` passes free-form options (log axes, labels for
    overlays) to the builder.
    """

    figure: str
    inputs: dict
    style: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.figure not in FIGURE_IDS:
            raise ValueError(f"unknown figure id {self.figure!r}; "
                             f"expected one of {', '.join(FIGURE_IDS)}")


def render(recipe, out_path):
    """Render the recipe to ``out_path`` and return the path."""
    builder = _BUILDERS[recipe.figure]
    with matplotlib.rc_context(_RC):
        fig = builder(recipe)
        fig.savefig(out_path, metadata=_metadata(out_path))
        plt.close(fig)
    return Path(out_path)


def _metadata(out_path):
    # strip creation timestamps for byte-stable output
    suffix = Path(out_path).suffix.lower()
    if suffix == ".png":
        return {"Software": "darkband-plots"}
    if suffix == ".svg":
        return {"Date": None}
    if suffix == ".pdf":
        return {"CreationDate": None}
    return None


def _rate_overlays(recipe, slot="rates"):
    paths = recipe.inputs[slot]
    if isinstance(paths, (str, Path)):
        paths = [paths]
    labels = recipe.style.get("labels", [Path(p).parent.name for p in paths])
    return [(load(p, "loschmidt.csv"), lbl) for p, lbl in zip(paths, labels)]


def _fig1(recipe):
    fig, ax = plt.subplots(figsize=(4.6, 3.2))
    for data, label in _rate_overlays(recipe):
        ax.plot(data["t"], data["r"], lw=1.1, label=str(label))
    ax.set_xlabel(r"$\Omega t$")
    ax.set_ylabel("rate function r(t)")
    ax.set_title("Return-rate family: kink sharpens with system size")
    ax.legend(fontsize=7)
    return fig


def _fig2(recipe):
    data = load(recipe.inputs["fockmap"], "fockmap.csv")
    t = np.unique(data["t"])
    m = np.unique(data["m"])
    grid = np.full((len(m), len(t)), np.nan)
    ti = np.searchsorted(t, data["t"])
    mi = np.searchsorted(m, data["m"])
    grid[mi, ti] = data["abs_amp"]
    fig, ax = plt.subplots(figsize=(5.2, 3.4))
    j = np.max(np.abs(m))
    ax.pcolormesh(t, m / j, grid, cmap="Greys", shading="nearest",
                  rasterized=True)
    folds_path = recipe.inputs.get("folds")
    if folds_path:
        folds = load(folds_path, "folds.csv")
        reg = folds["is_cusp"] == 0.0
        ax.plot(folds["t"][reg], folds["eta_star"][reg], ".", ms=2,
                color="tab:blue", label="fold caustics")
        cusp = ~reg
        if np.any(cusp):
            ax.plot(folds["t"][cusp], folds["eta_star"][cusp], "x", ms=6,
                    color="tab:red", label="cusp")
    line_path = recipe.inputs.get("switchline")
    if line_path:
        line = load(line_path, "switchline.csv")
        ax.plot(line["t"], line["eta"], "-", lw=1.4, color="tab:green",
                label="switching line")
    if folds_path or line_path:
        ax.legend(fontsize=7, loc="lower left")
    ax.set_xlabel(r"$\Omega t$")
    ax.set_ylabel(r"$m/j$")
    ax.set_title("Fock-space amplitude map")
    return fig


def _fig3(recipe):
    data = load(recipe.inputs["darkband"], "darkband.csv")
    fig, ax = plt.subplots(figsize=(4.6, 3.2))
    ax.plot(data["theta_deg"], data["I"], lw=1.2, color="tab:purple")
    if recipe.style.get("log", True):
        ax.set_yscale("log")
    ax.set_xlabel(r"viewing angle $\theta$ (deg)")
    ax.set_ylabel("intensity")
    ax.set_title("Two-tail intensity across the dark band")
    return fig


def _fig4(recipe):
    data = load(recipe.inputs["semiclassical"], "rate_semiclassical.csv")
    fig, ax = plt.subplots(figsize=(4.8, 3.3))
    ax.plot(data["t"], data["r0"], lw=1.1, color="tab:blue", label="r0 branch")
    ax.plot(data["t"], data["r1"], lw=1.1, color="tab:red", label="r1 branch")
    ax.plot(data["t"], data["r_min"], lw=2.0, color="k", label="min envelope")
    with np.errstate(divide="ignore", invalid="ignore"):
        r_fin = -np.log(data["L_finite_j"])
    j = recipe.style.get("j")
    if j:
        ax.plot(data["t"], r_fin / float(j), "--", lw=1.0, color="tab:gray",
                label=f"finite j={j}")
    ax.set_ylim(0, np.nanmax(data["r_min"]) * 3 + 0.05)
    ax.set_xlabel(r"$\Omega t$")
    ax.set_ylabel("rate")
    ax.set_title("Branch rates and the transition kink")
    ax.legend(fontsize=7)
    return fig


def _fig5(recipe):
    te = load(recipe.inputs["TE"], "TE.csv")
    fig, axes = plt.subplots(1, 2, figsize=(7.4, 3.1))
    for k, color in ((0.0, "tab:blue"), (1.0, "tab:red")):
        sel = te["branch"] == k
        axes[0].plot(te["eps"][sel], te["T"][sel], lw=1.2, color=color,
                     label=f"k={int(k)}")
    axes[0].set_xlabel(r"$\varepsilon$")
    axes[0].set_ylabel("return time T")
    axes[0].legend(fontsize=7)
    axes[0].set_title("Stationary-phase condition")
    saddles_path = recipe.inputs.get("saddles")
    if saddles_path:
        sad = load(saddles_path, "saddles.csv")
        for k, color in ((0.0, "tab:blue"), (1.0, "tab:red")):
            sel = sad["branch"] == k
            axes[1].plot(sad["re_phi0"][sel], sad["im_phi0"][sel], ".",
                         ms=2.5, color=color)
    axes[1].set_xlabel(r"Re $\phi_0$")
    axes[1].set_ylabel(r"Im $\phi_0$")
    axes[1].set_title("Saddle trajectories")
    fig.tight_layout()
    return fig


def _fig6(recipe):
    data = load(recipe.inputs["rainbow"], "rainbow_io.csv")
    fig, ax = plt.subplots(figsize=(4.2, 3.2))
    for order, color in ((1.0, "tab:blue"), (2.0, "tab:red")):
        sel = data["order"] == order
        ax.plot(data["h"][sel], data["theta_deg"][sel], lw=1.3, color=color,
                label=f"{int(order)} internal reflection{'s' if order > 1 else ''}")
    ax.set_xlabel("impact parameter h")
    ax.set_ylabel(r"viewing angle $\theta$ (deg)")
    ax.set_title("Raindrop input-output relation")
    ax.legend(fontsize=7)
    return fig


def _fig7(recipe):
    data = load(recipe.inputs["bipartite"], "bipartite_rates.csv")
    fig, ax = plt.subplots(figsize=(4.8, 3.3))
    ax.plot(data["t"], data["r"], lw=1.8, color="k", label="unconditioned")
    ax.plot(data["t"], data["r_plus"], lw=1.1, color="tab:blue",
            label=r"$S_y \geq 0$ branch")
    ax.plot(data["t"], data["r_minus"], lw=1.1, color="tab:red",
            label=r"$S_y < 0$ branch")
    ax.set_xlabel(r"$\Omega t$")
    ax.set_ylabel("rate per atom")
    ax.set_title("Conditioned return rates")
    ax.legend(fontsize=7)
    return fig


def _fig8(recipe):
    surf = load(recipe.inputs["surface"], "surface.csv")
    source = recipe.style.get("source")
    if source is None:
        source = sorted(set(surf["source"]))[0]
    sel = surf["source"] == source
    t = np.unique(surf["t"][sel])
    eta = np.unique(surf["eta"][sel])
    grid = np.full((len(eta), len(t)), np.nan)
    ti = np.searchsorted(t, surf["t"][sel])
    ei = np.searchsorted(eta, surf["eta"][sel])
    grid[ei, ti] = surf["r"][sel]
    fig, ax = plt.subplots(figsize=(5.2, 3.4))
    pc = ax.pcolormesh(t, eta, grid, cmap="viridis", shading="nearest",
                       rasterized=True)
    fig.colorbar(pc, ax=ax, label="rate")
    line_path = recipe.inputs.get("switchline")
    if line_path:
        line = load(line_path, "switchline.csv")
        ax.plot(line["t"], line["eta"], "-", lw=1.6, color="w",
                label="switching line")
    dpt_path = recipe.inputs.get("dpt")
    if dpt_path:
        dpt = load(dpt_path, "dpt.csv")
        eta0 = recipe.style.get("eta0", 0.6)
        ax.plot(dpt["t_c"], [eta0] * len(dpt["t_c"]), "*", ms=11,
                color="tab:green", label="transition")
    if line_path or dpt_path:
        ax.legend(fontsize=7, loc="upper left")
    ax.set_xlabel(r"$\Omega t$")
    ax.set_ylabel(r"$\eta$")
    ax.set_title(f"Rate surface [{source}]")
    return fig


_BUILDERS = {
    "fig1": _fig1,
    "fig2": _fig2,
    "fig3": _fig3,
    "fig4": _fig4,
    "fig5": _fig5,
    "fig6": _fig6,
    "fig7": _fig7,
    "fig8": _fig8,
}

#: default input slots per figure, resolved against a data directory
DEFAULT_SLOTS = {
    "fig1": {"rates": "loschmidt.csv"},
    "fig2": {"fockmap": "fockmap.csv", "folds": "folds.csv?",
             "switchline": "switchline.csv?"},
    "fig3": {"darkband": "darkband.csv"},
    "fig4": {"semiclassical": "rate_semiclassical.csv"},
    "fig5": {"TE": "TE.csv", "saddles": "saddles.csv?"},
    "fig6": {"rainbow": "rainbow_io.csv"},
    "fig7": {"bipartite": "bipartite_rates.csv"},
    "fig8": {"surface": "surface.csv", "switchline": "switchline.csv?",
             "dpt": "dpt.csv?"},
}


def recipe_for_directory(figure, data_dir, style=None):
    """Recipe with the figure's default file layout inside ``data_dir``.

    Slot names ending in '?' are optional overlays: included when the file
    exists, dropped otherwise.
    """
    data_dir = Path(data_dir)
    inputs = {}
    for slot, fname in DEFAULT_SLOTS[figure].items():
        optional = fname.endswith("?")
        fname = fname.rstrip("?")
        path = data_dir / fname
        if path.exists():
            inputs[slot] = str(path)
        elif not optional:
            raise FileNotFoundError(
                f"{figure} requires {fname} in {data_dir}"
            )
    return FigureRecipe(figure=figure, inputs=inputs, style=style or {})
