#!/usr/bin/env python3
"""Regenerate every figure's data through the CLI recipes and render PNGs.

The `weaktherm` tool itself emits only CSV; this script is the external
plotting recipe.  It executes each config under recipes/, writes the CSV next
to a rendered PNG in the output directory, and additionally computes the
post-selection-angle maps (optimal temperature and peak precision surfaces)
directly through the library.

Usage: python scripts/render_figures.py [--outdir figures]
"""

import argparse
import math
import pathlib
import sys

import numpy as np

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from weaktherm import optimal_temperature_postselection, optimal_temperature_thermalization, rms_error_postselection
from weaktherm.cli import main as weaktherm_main

REPO = pathlib.Path(__file__).resolve().parent.parent
RECIPES = REPO / "recipes"

CURVE_GROUPS = {
    "fig2_thermalization_precision": [
        ("fig2_thermalization_balanced.cfg", "balanced post-selection"),
        ("fig2_thermalization_near_ground.cfg", "near-ground post-selection"),
    ],
    "fig5_postselection_precision": [
        ("fig5_postselection_xi0.cfg", "xi = 0"),
        ("fig5_postselection_xi_half_pi.cfg", "xi = pi/2"),
        ("fig5_postselection_xi_pi.cfg", "xi = pi"),
    ],
    "fig8_scaled_fisher_precision": [
        ("fig8_qfi_theta_pi6.cfg", "theta = pi/6"),
        ("fig8_qfi_theta_pi3.cfg", "theta = pi/3"),
        ("fig8_qfi_theta_pi2.cfg", "theta = pi/2"),
    ],
}


def run_recipe(cfg: pathlib.Path, out_csv: pathlib.Path) -> None:
    code = weaktherm_main(["sweep", "--config", str(cfg), "--out", str(out_csv)])
    if code != 0:
        raise SystemExit(f"recipe {cfg.name} failed with exit code {code}")


def load_curve(path: pathlib.Path):
    temps, precisions = [], []
    header = None
    for line in path.read_text().splitlines():
        if line.startswith("#"):
            continue
        if header is None:
            header = line.split(",")
            t_col = header.index("T")
            p_col = header.index("precision")
            continue
        cells = line.split(",")
        temps.append(float(cells[t_col]))
        precisions.append(float(cells[p_col]))
    return np.array(temps), np.array(precisions)


def render_curve_group(name: str, members, outdir: pathlib.Path) -> None:
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    for cfg_name, label in members:
        csv_path = outdir / (cfg_name.replace(".cfg", ".csv"))
        run_recipe(RECIPES / cfg_name, csv_path)
        t, p = load_curve(csv_path)
        ax.plot(t, p, label=label)
    ax.set_xlabel("temperature T")
    ax.set_ylabel("precision")
    ax.set_title(name.replace("_", " "))
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(outdir / f"{name}.png", dpi=200)
    plt.close(fig)


def render_window_maps(outdir: pathlib.Path) -> None:
    # optimal temperature and attainable peak precision over the
    # post-selection sphere (imperfect-thermalization model)
    xis = np.linspace(0.0, math.pi, 41)
    nus = np.linspace(0.0, 2.0 * math.pi, 41)
    t_opt = np.empty((xis.size, nus.size))
    peak = np.empty_like(t_opt)
    for i, xi in enumerate(xis):
        for j, nu in enumerate(nus):
            w = optimal_temperature_thermalization(float(xi), float(nu))
            t_opt[i, j] = w.T_opt
            peak[i, j] = w.peak_precision
    for data, tag, label in ((t_opt, "fig3_optimal_temperature_map", "T_opt"), (peak, "fig4_peak_precision_map", "peak precision")):
        fig, ax = plt.subplots(figsize=(5.0, 3.6))
        im = ax.pcolormesh(nus, xis, data, shading="auto")
        fig.colorbar(im, ax=ax, label=label)
        ax.set_xlabel("azimuthal angle nu")
        ax.set_ylabel("polar angle xi")
        fig.tight_layout()
        fig.savefig(outdir / f"{tag}.png", dpi=200)
        plt.close(fig)
    np.savetxt(
        outdir / "fig3_fig4_window_maps.csv",
        np.column_stack(
            [np.repeat(xis, nus.size), np.tile(nus, xis.size), t_opt.ravel(), peak.ravel()]
        ),
        delimiter=",",
        header="xi,nu,T_opt,peak_precision",
        comments="# ",
    )


def render_postselection_window_curves(outdir: pathlib.Path) -> None:
    xis = np.linspace(0.0, math.pi, 61)
    t_opt = np.array([optimal_temperature_postselection(float(x)) for x in xis])
    peak = np.array([1.0 / rms_error_postselection(1.0 / t, float(x)) for t, x in zip(t_opt, xis)])
    fig, axes = plt.subplots(1, 2, figsize=(7.5, 3.0))
    axes[0].plot(xis, t_opt)
    axes[0].set_xlabel("polar angle xi")
    axes[0].set_ylabel("optimal temperature")
    axes[1].plot(xis, peak)
    axes[1].set_xlabel("polar angle xi")
    axes[1].set_ylabel("peak precision")
    fig.tight_layout()
    fig.savefig(outdir / "fig6_fig7_postselection_window.png", dpi=200)
    plt.close(fig)
    np.savetxt(
        outdir / "fig6_fig7_postselection_window.csv",
        np.column_stack([xis, t_opt, peak]),
        delimiter=",",
        header="xi,T_opt,peak_precision",
        comments="# ",
    )


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--outdir", default="figures")
    args = parser.parse_args(argv)
    outdir = pathlib.Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for name, members in CURVE_GROUPS.items():
        render_curve_group(name, members, outdir)
    render_window_maps(outdir)
    render_postselection_window_curves(outdir)
    print(f"figures and CSV data written to {outdir}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
