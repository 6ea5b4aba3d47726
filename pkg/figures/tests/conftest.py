import hashlib
import json
import os

import numpy as np
import pytest

FORMAT = "esqpt-lab v1"


def fake_hash(rel):
    return hashlib.sha256(rel.encode()).hexdigest()


def write_table(root, rel, columns, config=None):
    path = os.path.join(root, rel)
    os.makedirs(os.path.dirname(path), exist_ok=True)
    names = list(columns)
    arrays = [np.asarray(columns[n], dtype=float) for n in names]
    lines = [f"# {FORMAT}", f"# config={config or fake_hash(rel)}",
             ",".join(names)]
    for row in zip(*arrays):
        lines.append(",".join(repr(float(v)) for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return rel


def surface_columns(delta):
    """Polar-ring samples of a bowl; delta=1 gets an azimuthal dent."""
    theta = np.linspace(0.1, 3.0, 12)
    phi = np.linspace(0.0, 2.0 * np.pi, 16, endpoint=False)
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    eps = tt ** 2 / 9.0 - 1.0
    if delta == 1:
        eps = eps + 0.3 * (tt ** 2 / 9.0) * np.cos(2.0 * pp)
    return {"u": (tt * np.cos(pp)).ravel(),
            "v": (tt * np.sin(pp)).ravel(),
            "epsilon": eps.ravel()}


def make_bundle(root):
    """A small synthetic bundle with every table render_all touches."""
    figures = {}
    files = []

    def put(rel, columns):
        write_table(root, rel, columns)
        files.append({"file": rel, "config_sha256": fake_hash(rel)})
        return rel

    figures["fig1"] = [
        put(f"fig1/surface_delta{delta}_r{tag}.csv", surface_columns(delta))
        for delta in (0, 1) for tag in ("0p2", "1", "2")]

    ratios = np.linspace(0.0, 2.5, 26)
    figures["fig2"] = [put("fig2/ground_energy.csv", {
        "gamma_over_gc": ratios,
        "epsilon_min": -1.0 - np.clip(ratios - 1.0, 0.0, None) ** 2})]

    y = np.linspace(-1.0, 1.0, 21)
    eps_rows, y_rows, frac = [], [], []
    for eps in (-1.5, -0.5):
        eps_rows += [eps] * y.size
        y_rows += list(y)
        frac += list(np.clip(0.5 * (1.0 - y) - 0.1 * eps, 0.0, 1.0))
    figures["fig3"] = [put("fig3/admissible_fraction.csv", {
        "epsilon": eps_rows, "y": y_rows, "frac": frac})]

    grid = np.linspace(-2.0, 3.0, 30)
    nu = 0.5 + 0.1 * np.sin(grid)
    fig4 = []
    for tag in ("1", "2"):
        fig4.append(put(f"fig4/dos_tc_r{tag}.csv",
                        {"epsilon": grid, "nu_scaled": nu}))
        fig4.append(put(f"fig4/dos_tc_r{tag}_classical.csv",
                        {"epsilon": grid, "nu_scaled": nu + 0.01}))
        fig4.append(put(f"fig4/staircase_tc_r{tag}.csv", {
            "epsilon": np.linspace(-2.0, 3.0, 40),
            "n_over_2j": np.linspace(0.01, 3.0, 40)}))
    figures["fig4"] = fig4

    fig5 = []
    for tag in ("1", "2"):
        fig5.append(put(f"fig5/dos_dicke_r{tag}.csv",
                        {"epsilon": grid, "nu_scaled": nu}))
        fig5.append(put(f"fig5/dos_dicke_r{tag}_classical.csv",
                        {"epsilon": grid, "nu_scaled": nu + 0.01}))
    edges = np.linspace(-2.0, 1.2, 11)
    fig5.append(put("fig5/dos_dicke_mc_r2.csv", {
        "epsilon_lo": edges[:-1], "epsilon_hi": edges[1:],
        "nu_mc": np.full(10, 0.4), "std_err": np.full(10, 0.02)}))
    samples = np.array([-1.0 + 10.0 ** -k for k in (2, 3, 4, 5)])
    for name in ("derivative_tc.csv", "derivative_dicke.csv"):
        fig5.append(put(f"fig5/{name}", {
            "epsilon": samples,
            "nu_prime_scaled": 0.3 + 0.09 * np.arange(2.0, 6.0)}))
    figures["fig5"] = fig5

    summary = {"scale": "desk", "figures": figures, "files": files,
               "versions": {}}
    with open(os.path.join(root, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=1, sort_keys=True)
    return root


@pytest.fixture
def bundle_dir(tmp_path):
    root = tmp_path / "bundle"
    root.mkdir()
    return make_bundle(str(root))
