"""The five bundle figures, rendered headless to PNG.

Layout knowledge lives here: which tables belong to which figure, which
columns they must carry, and the one structural invariant the renderer
refuses to violate: a delta=0 energy surface must be rotationally
symmetric, ring by ring, before it is drawn.
"""
import os
import re

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .bundle import Bundle, BundleError

RING_TOL = 1e-9

_SURFACE = re.compile(r"surface_delta(\d)_r([0-9p]+)\.csv$")


def ring_spread(u, v, values, decimals: int = 9) -> float:
    """Largest within-ring spread of values over circles u^2+v^2 = r^2.

    The surface grids sample exact polar rings, so grouping by rounded
    radius reconstructs them; a rotationally symmetric surface shows
    zero spread on every ring.
    """
    r = np.round(np.hypot(u, v), decimals)
    order = np.argsort(r, kind="stable")
    rs, vs = r[order], np.asarray(values)[order]
    starts = np.flatnonzero(np.r_[True, rs[1:] != rs[:-1]])
    worst = 0.0
    for a, b in zip(starts, np.r_[starts[1:], rs.size]):
        seg = vs[a:b]
        worst = max(worst, float(seg.max() - seg.min()))
    return worst


def _ratio_of(tag: str) -> float:
    return float(tag.replace("p", "."))


def _overlay_tags(files, stem: str) -> list:
    pat = re.compile(rf"{stem}_r([0-9p]+)\.csv$")
    tags = [m.group(1) for rel in files if (m := pat.search(rel))]
    if not tags:
        raise BundleError(f"no {stem} overlay tables in the bundle")
    return sorted(tags, key=_ratio_of)


def render_fig1(bundle: Bundle, out_dir: str) -> str:
    """Energy-surface contour panels, models by row, couplings by
    column.  Refuses asymmetric delta=0 data outright."""
    panels = {}
    for rel in bundle.files_for("fig1"):
        m = _SURFACE.search(rel)
        if not m:
            raise BundleError(f"{rel}: not a surface table name")
        panels[(int(m.group(1)), m.group(2))] = rel
    deltas = sorted({d for d, _ in panels})
    tags = sorted({t for _, t in panels}, key=_ratio_of)

    fig, axes = plt.subplots(len(deltas), len(tags),
                             figsize=(3.4 * len(tags), 3.2 * len(deltas)),
                             squeeze=False)
    for i, delta in enumerate(deltas):
        for k, tag in enumerate(tags):
            rel = panels[(delta, tag)]
            cols = bundle.table(rel, ("u", "v", "epsilon"))
            if delta == 0:
                spread = ring_spread(cols["u"], cols["v"], cols["epsilon"])
                if spread >= RING_TOL:
                    raise BundleError(
                        f"{rel}: delta=0 surface breaks rotational "
                        f"symmetry (ring spread {spread:.2e})")
            ax = axes[i][k]
            im = ax.tricontourf(cols["u"], cols["v"], cols["epsilon"],
                                levels=21, cmap="viridis")
            ax.set_aspect("equal")
            ax.set_title(f"{'tc' if delta == 0 else 'dicke'}  "
                         f"gamma/gc={_ratio_of(tag):g}", fontsize=10)
            fig.colorbar(im, ax=ax, shrink=0.85)
    fig.suptitle("scaled energy over the reduced sphere")
    fig.tight_layout()
    path = os.path.join(out_dir, "fig1.png")
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_fig2(bundle: Bundle, out_dir: str) -> str:
    """Classical ground energy against the coupling ratio."""
    (rel,) = bundle.files_for("fig2")
    cols = bundle.table(rel, ("gamma_over_gc", "epsilon_min"))
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.plot(cols["gamma_over_gc"], cols["epsilon_min"], lw=1.5)
    ax.axvline(1.0, color="0.6", ls="--", lw=0.8)
    ax.set_xlabel("gamma / gc")
    ax.set_ylabel("ground epsilon")
    fig.tight_layout()
    path = os.path.join(out_dir, "fig2.png")
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_fig3(bundle: Bundle, out_dir: str) -> str:
    """Admissible azimuth fraction across the spin range, one curve per
    energy slice."""
    (rel,) = bundle.files_for("fig3")
    cols = bundle.table(rel, ("epsilon", "y", "frac"))
    fig, ax = plt.subplots(figsize=(5.6, 4.0))
    for eps in np.unique(cols["epsilon"]):
        sel = cols["epsilon"] == eps
        ax.plot(cols["y"][sel], cols["frac"][sel], lw=1.2,
                label=f"eps={eps:g}")
    ax.set_xlabel("jz / j")
    ax.set_ylabel("admissible fraction")
    ax.legend(fontsize=8, ncol=2)
    fig.tight_layout()
    path = os.path.join(out_dir, "fig3.png")
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def _overlay_panel(ax, bundle, quantum_rel, classical_rel, title):
    q = bundle.table(quantum_rel, ("epsilon", "nu_scaled"))
    c = bundle.table(classical_rel, ("epsilon", "nu_scaled"))
    ax.plot(c["epsilon"], c["nu_scaled"], lw=1.2, color="C1",
            label="flow")
    ax.plot(q["epsilon"], q["nu_scaled"], ".", ms=3.5, color="C0",
            label="binned levels")
    ax.set_xlabel("epsilon")
    ax.set_ylabel("nu")
    ax.set_title(title, fontsize=10)
    ax.legend(fontsize=8)


def render_fig4(bundle: Bundle, out_dir: str) -> str:
    """Ladder-model density overlays with their counting staircases."""
    files = bundle.files_for("fig4")
    tags = _overlay_tags(files, "dos_tc")
    fig, axes = plt.subplots(2, len(tags),
                             figsize=(4.6 * len(tags), 6.4), squeeze=False)
    for k, tag in enumerate(tags):
        _overlay_panel(axes[0][k], bundle,
                       f"fig4/dos_tc_r{tag}.csv",
                       f"fig4/dos_tc_r{tag}_classical.csv",
                       f"tc  gamma/gc={_ratio_of(tag):g}")
        steps = bundle.table(f"fig4/staircase_tc_r{tag}.csv",
                             ("epsilon", "n_over_2j"))
        ax = axes[1][k]
        ax.plot(steps["epsilon"], steps["n_over_2j"], lw=0.8)
        ax.set_xlabel("epsilon")
        ax.set_ylabel("count / 2j")
    fig.tight_layout()
    path = os.path.join(out_dir, "fig4.png")
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_fig5(bundle: Bundle, out_dir: str) -> str:
    """Displaced-basis density overlays, the sampling cross-check, and
    the derivative blow-up toward eps = -1."""
    files = bundle.files_for("fig5")
    tags = _overlay_tags(files, "dos_dicke")
    mc_pat = re.compile(r"dos_dicke_mc_r([0-9p]+)\.csv$")
    mc_by_tag = {m.group(1): rel for rel in files
                 if (m := mc_pat.search(rel))}

    fig, axes = plt.subplots(1, len(tags) + 1,
                             figsize=(4.3 * (len(tags) + 1), 3.8))
    for k, tag in enumerate(tags):
        ax = axes[k]
        _overlay_panel(ax, bundle,
                       f"fig5/dos_dicke_r{tag}.csv",
                       f"fig5/dos_dicke_r{tag}_classical.csv",
                       f"dicke  gamma/gc={_ratio_of(tag):g}")
        if tag in mc_by_tag:
            mc = bundle.table(mc_by_tag[tag],
                              ("epsilon_lo", "epsilon_hi", "nu_mc",
                               "std_err"))
            centers = 0.5 * (mc["epsilon_lo"] + mc["epsilon_hi"])
            ax.errorbar(centers, mc["nu_mc"], yerr=mc["std_err"],
                        fmt="none", ecolor="C2", elinewidth=0.9,
                        label="sampled")
            ax.legend(fontsize=8)

    ax = axes[-1]
    for name, rel in (("tc", "fig5/derivative_tc.csv"),
                      ("dicke", "fig5/derivative_dicke.csv")):
        if rel in files:
            d = bundle.table(rel, ("epsilon", "nu_prime_scaled"))
            ax.semilogx(d["epsilon"] + 1.0, d["nu_prime_scaled"], "o-",
                        ms=4, label=name)
    ax.set_xlabel("epsilon + 1")
    ax.set_ylabel("d nu / d epsilon")
    ax.set_title("slope toward the saddle energy", fontsize=10)
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = os.path.join(out_dir, "fig5.png")
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_all(bundle_dir: str, out_dir: str) -> list:
    """Render every figure from the bundle; returns the image paths."""
    bundle = Bundle.load(bundle_dir)
    os.makedirs(out_dir, exist_ok=True)
    return [render(bundle, out_dir)
            for render in (render_fig1, render_fig2, render_fig3,
                           render_fig4, render_fig5)]
