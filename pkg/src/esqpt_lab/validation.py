"""Fast self-contained cross-checks behind the `validate` subcommand.

Each check pits two independent routes at each other (closed form vs
quadrature, structured solver vs brute-force product basis, sampling vs
integration) at sizes small enough to finish in seconds.  They return
(name, passed, detail) tuples; the CLI turns those into output lines
and an exit code.
"""

from __future__ import annotations

import math

import numpy as np

from . import analysis, dicke, dos, fock, landscape, tc
from .params import ModelParams, critical_coupling


def check_frozen_density_values():
    p0 = ModelParams(gamma=2.0, j2=200, delta=0)
    v = dos.dos_tc(0.0, p0)
    ref = (3.0 + math.sqrt(17.0)) / 8.0
    d0 = abs(v - ref)
    p1 = ModelParams(gamma=1.0, j2=80, delta=1)
    w = dos.dos_dicke(-1.0, p1)
    ref1 = 2.0 / 3.0 - math.sqrt(3.0) / (2.0 * math.pi)
    d1 = abs(w - ref1)
    return ("density closed-form anchors", d0 < 1e-14 and d1 < 1e-9,
            f"delta0 dev {d0:.1e}, delta1 dev {d1:.1e}")


def check_block_solver_against_oracle():
    p = ModelParams(gamma=0.7, j2=10, delta=0)
    rec = tc.assemble_spectrum(p, lambda_max=200, epsilon_ref=1.5)
    ora, _ = fock.converged_low_levels(p, 40, tol=1e-11, n_start=64)
    d = float(np.max(np.abs(rec.energies[:40] - ora)))
    return ("excitation blocks vs product basis", d < 1e-9, f"max dev {d:.1e}")


def check_displaced_solver_against_oracle():
    p = ModelParams(gamma=math.sqrt(1.5) / 2.0, j2=6, delta=1)
    rec, rep = dicke.converge_spectrum(p, epsilon_ref=2.0, tol=1e-9,
                                       n_max_start=24)
    k = min(len(rec), 30)
    ora, _ = fock.converged_low_levels(p, k, tol=1e-11, n_start=64)
    d = float(np.max(np.abs(rec.energies[:k] - ora[:k])))
    return ("displaced basis vs product basis",
            rep.converged and d < 1e-8, f"max dev {d:.1e}, {k} levels")


def check_displacement_unitarity():
    beta = 0.8
    n_keep = 30
    dim = n_keep + 1 + math.ceil(math.e * beta * math.sqrt(n_keep + 60) + 30)
    w = dicke.displacement_matrix(dim, beta)
    gram = w.T @ w
    d = float(np.max(np.abs(gram[:n_keep + 1, :n_keep + 1]
                            - np.eye(n_keep + 1))))
    return ("displacement matrix unitarity", d < 1e-10, f"defect {d:.1e}")


def check_sampling_against_quadrature():
    p = ModelParams(gamma=1.0, j2=80, delta=1)
    edges = np.linspace(-1.5, 0.5, 5)
    mc = dos.dos_monte_carlo(p, edges, n_samples=200_000, seed=11)
    worst = 0.0
    for i in range(edges.size - 1):
        ref = dos.dos_bin_average(p, float(edges[i]), float(edges[i + 1]))
        sig = max(float(mc.std_err[i]), 1e-12)
        worst = max(worst, abs(float(mc.nu[i]) - ref) / sig)
    return ("sampled density vs quadrature", worst < 4.0,
            f"worst bin {worst:.2f} sigma")


def check_stationary_points():
    p = ModelParams(gamma=1.0, j2=80, delta=1)
    pts = landscape.fixed_points(p)
    eps_min = min(f.epsilon for f in pts)
    ok = abs(eps_min - landscape.ground_energy(p)) < 1e-12
    labels = sorted(f.stability for f in pts)
    ok = ok and labels.count("stable") >= 2 and "saddle" in labels
    grid = landscape.surface_grid(p)
    ok = ok and float(np.min(grid[2])) >= eps_min - 1e-9
    return ("stationary points vs surface scan", ok,
            f"eps_min {eps_min:.6f}")


def check_derivative_markers():
    p0 = ModelParams(gamma=2.0, j2=200, delta=0)
    lo, _ = dos.dos_derivative(-1.0 - 1e-9, p0)
    hi, _ = dos.dos_derivative(-1.0 + 1e-9, p0)
    jump = abs((lo - hi) - 1.0 / 6.0)
    p1 = ModelParams(gamma=1.0, j2=80, delta=1)
    samples = [-1.0 + 10.0 ** -k for k in (2, 3, 4)]
    grads = [dos.dos_derivative(e, p1, h=abs(e + 1.0) / 8.0)[0]
             for e in samples]
    _, b, r2 = analysis.fit_log_divergence(samples, grads)
    ok = jump < 1e-6 and b > 0.05 and r2 > 0.99
    return ("derivative singularities", ok,
            f"jump dev {jump:.1e}, log slope {b:.3f} (r2 {r2:.4f})")


ALL_CHECKS = (
    check_frozen_density_values,
    check_block_solver_against_oracle,
    check_displaced_solver_against_oracle,
    check_displacement_unitarity,
    check_sampling_against_quadrature,
    check_stationary_points,
    check_derivative_markers,
)


def run_all():
    """Run every check; returns a list of (name, passed, detail)."""
    results = []
    for fn in ALL_CHECKS:
        try:
            results.append(fn())
        except Exception as exc:   # a crashed check is a failed check
            results.append((fn.__name__, False, f"raised {exc!r}"))
    return results
