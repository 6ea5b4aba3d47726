"""Semiclassical density of states for both coupling models.

Everything here works in scaled units: energies eps = E/(omega0 j) and the
dimensionless density (omega/2j) * rho(E), which saturates at 1 once the
whole Bloch sphere is energetically accessible.  The scaled density depends
only on (eps, gamma/gamma_c, omega/omega0, delta), never on j.

Regimes of the spectrum:

    forbidden     eps below the ground energy
    below_saddle  between the symmetry-broken ground energy and the
                  destabilized south pole at eps = -1 (gamma > gamma_c only)
    middle        -1 <= eps <= 1
    saturated     eps > 1, density identically 1

The delta=0 density is closed-form.  The delta=1 density needs a one
dimensional integral whose integrand has square-root edges at the spin
turning points; those edges are removed exactly by the substitution
y = y_edge -/+ t**2 before adaptive Gauss-Legendre quadrature.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .params import ModelParams, critical_coupling


class ForbiddenEnergy(ValueError):
    """Requested energy lies below the ground energy."""


_FLOOR_TOL = 1e-12


def epsilon_saddle_floor(params: ModelParams) -> float:
    """Algebraic lower edge -(x + 1/x)/2 with x = (gamma_c/gamma)^2.

    Coincides with ground_energy for gamma > gamma_c; below the critical
    coupling the physical floor is -1 instead and this quantity is only
    the analytic continuation used inside the branch formulas.
    """
    x = (critical_coupling(params) / params.gamma) ** 2
    return -0.5 * (x + 1.0 / x)


def classify_regime(epsilon: float, params: ModelParams) -> str:
    gc = critical_coupling(params)
    superradiant = params.gamma > gc
    floor = epsilon_saddle_floor(params) if superradiant else -1.0
    if epsilon < floor - _FLOOR_TOL:
        return "forbidden"
    if superradiant and epsilon < -1.0:
        return "below_saddle"
    if epsilon <= 1.0:
        return "middle"
    return "saturated"


def spin_turning_points(epsilon: float, params: ModelParams) -> tuple:
    """Roots y_-/+ of (gamma^2/2 gamma_c^2)(1 - y^2) = y - eps.

    These bound the jz/j range reachable at scaled energy eps (raw
    algebraic roots; the upper one exceeds +1 in the saturated regime).
    """
    eps0 = epsilon_saddle_floor(params)
    if epsilon < eps0 - _FLOOR_TOL:
        raise ForbiddenEnergy(f"eps={epsilon} below the shell floor {eps0}")
    x = (critical_coupling(params) / params.gamma) ** 2
    root = math.sqrt(max(0.0, 2.0 * (epsilon - eps0)))
    sx = math.sqrt(x)
    return (-x - sx * root, -x + sx * root)


def dos_tc(epsilon: float, params: ModelParams) -> float:
    """Scaled density of states, delta=0 (closed form)."""
    if params.delta != 0:
        raise ValueError("dos_tc is the delta=0 branch")
    regime = classify_regime(epsilon, params)
    if regime == "forbidden":
        raise ForbiddenEnergy(f"eps={epsilon} in the forbidden regime")
    if regime == "saturated":
        return 1.0
    x = (critical_coupling(params) / params.gamma) ** 2
    root = math.sqrt(max(0.0, 2.0 * (epsilon - epsilon_saddle_floor(params))))
    if regime == "below_saddle":
        return math.sqrt(x) * root
    return 0.5 * (1.0 - x + math.sqrt(x) * root)


def phi_admissible_fraction(y: float, epsilon: float, params: ModelParams) -> float:
    """Fraction of the azimuth accessible at (y = jz/j, eps), delta=1.

    The accessibility condition is cos^2(phi) >= 2 gamma_c^2 (y - eps) /
    (gamma^2 (1 - y^2)); the admissible set is two symmetric phi intervals
    around 0 and pi, so the fraction is (2/pi) arccos(sqrt(arg)).
    """
    if abs(y) > 1:
        raise ValueError(f"|y| must not exceed 1, got {y}")
    if y <= epsilon:
        return 1.0
    one_minus_y2 = (1.0 - y) * (1.0 + y)
    if one_minus_y2 <= 0.0:
        return 0.0
    x = (critical_coupling(params) / params.gamma) ** 2
    arg = 2.0 * x * (y - epsilon) / one_minus_y2
    if arg > 1.0:
        return 0.0
    return (2.0 / math.pi) * math.acos(math.sqrt(arg))


# --------------------------------------------------------------------------
# adaptive Gauss-Legendre quadrature (vectorized integrand)
# --------------------------------------------------------------------------

_G_NODES, _G_WEIGHTS = np.polynomial.legendre.leggauss(15)


def _panel(f, a: float, b: float) -> float:
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    return half * float(np.dot(_G_WEIGHTS, f(mid + half * _G_NODES)))


def _adaptive_gauss(f, a: float, b: float, tol: float) -> float:
    """Panel-splitting Gauss rule; error estimated whole-vs-halves."""
    if b <= a:
        return 0.0
    total = 0.0
    stack = [(a, b, _panel(f, a, b), tol, 0)]
    while stack:
        lo, hi, whole, budget, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        left = _panel(f, lo, mid)
        right = _panel(f, mid, hi)
        if abs(left + right - whole) <= budget or depth >= 48:
            total += left + right
            continue
        stack.append((lo, mid, left, 0.5 * budget, depth + 1))
        stack.append((mid, hi, right, 0.5 * budget, depth + 1))
    return total


def dos_dicke(epsilon: float, params: ModelParams, tol: float = 1e-10) -> float:
    """Scaled density of states, delta=1 (adaptive quadrature).

    Absolute quadrature error is held below ``tol`` (default well under
    the 1e-9 budget).  The integral over y = jz/j is split at its
    midpoint and each half substituted y = edge -/+ t^2, which removes
    the square-root edges at the spin turning points and at y = eps.
    The quantities y - eps and 1 -/+ y are propagated in substituted
    form; recomputing them from y would cancel catastrophically where
    the integration range touches the poles.
    """
    if params.delta != 1:
        raise ValueError("dos_dicke is the delta=1 branch")
    regime = classify_regime(epsilon, params)
    if regime == "forbidden":
        raise ForbiddenEnergy(f"eps={epsilon} in the forbidden regime")
    if regime == "saturated":
        return 1.0

    x = (critical_coupling(params) / params.gamma) ** 2
    a = math.sqrt(x) * math.sqrt(
        max(0.0, 2.0 * (epsilon - epsilon_saddle_floor(params))))

    # Edge differences y_hi - eps and 1 -/+ y_edge, each written so the
    # subtraction that cancels (it depends on which quantities coalesce)
    # is replaced by its rationalized form.
    b = x + epsilon
    if b > 0.0:
        hi_minus_eps = (1.0 - epsilon) * (1.0 + epsilon) / (a + b)
    else:
        hi_minus_eps = a - b
    one_minus_hi = 2.0 * x * (1.0 - epsilon) / (1.0 + x + a)
    if x > 1.0:
        one_plus_hi = 2.0 * x * max(1.0 + epsilon, 0.0) / (x - 1.0 + a)
    else:
        one_plus_hi = (1.0 - x) + a

    def core(y_minus_eps, one_minus_y, one_plus_y):
        # arccos(sqrt(arg)); excursions beyond the 1e-12 clamp abort
        arg = 2.0 * x * y_minus_eps / (one_minus_y * one_plus_y)
        amin = float(np.min(arg))
        amax = float(np.max(arg))
        if amax > 1.0 + 1e-12 or amin < -1e-12:
            raise ArithmeticError(
                f"arccos argument excursion [{amin}, {amax}] at eps={epsilon}")
        return np.arccos(np.sqrt(np.clip(arg, 0.0, 1.0)))

    def rising(base_minus_eps, one_minus_base, one_plus_base):
        # y = base + t^2 walking up from the lower edge
        def f(t):
            tt = t * t
            return core(base_minus_eps + tt,
                        one_minus_base - tt,
                        one_plus_base + tt) * 2.0 * t
        return f

    def falling(base_minus_eps, one_minus_base, one_plus_base):
        # y = base - t^2 walking down from the upper edge
        def f(t):
            tt = t * t
            return core(np.maximum(base_minus_eps - tt, 0.0),
                        one_minus_base + tt,
                        one_plus_base - tt) * 2.0 * t
        return f

    if regime == "middle":
        width = hi_minus_eps
        lo_f = rising(0.0, 1.0 - epsilon, max(1.0 + epsilon, 0.0))
    else:
        width = 2.0 * a
        lo_minus_eps = (epsilon - 1.0) * (epsilon + 1.0) / (a - b)
        one_plus_lo = 2.0 * x * max(-(1.0 + epsilon), 0.0) / ((1.0 - x) + a)
        lo_f = rising(max(lo_minus_eps, 0.0), (1.0 + x) + a, one_plus_lo)
    hi_f = falling(max(hi_minus_eps, 0.0), max(one_minus_hi, 0.0),
                   max(one_plus_hi, 0.0))

    half_range = math.sqrt(max(0.0, 0.5 * width))
    left = _adaptive_gauss(lo_f, 0.0, half_range, 0.5 * tol)
    right = _adaptive_gauss(hi_f, 0.0, half_range, 0.5 * tol)
    integral = (left + right) / math.pi
    if regime == "middle":
        return 0.5 * (epsilon + 1.0) + integral
    return integral


def dos(epsilon: float, params: ModelParams, tol: float = 1e-10) -> float:
    """Scaled density of states for either model."""
    if params.delta == 1:
        return dos_dicke(epsilon, params, tol=tol)
    return dos_tc(epsilon, params)


def dos_derivative(epsilon: float, params: ModelParams, h: float = 1e-4) -> tuple:
    """d(dos)/d(eps) and a flag marking proximity to the eps = -/+1 kinks.

    delta=0 uses the branchwise analytic derivative (exact pointwise even
    when flagged; NaN exactly at the kinks).  delta=1 uses a central
    difference of the quadrature with step h, shrunk so it never crosses
    a regime boundary; one-sided at the shell floor.
    """
    flagged = abs(epsilon - 1.0) < h or abs(epsilon + 1.0) < h
    regime = classify_regime(epsilon, params)
    if regime == "forbidden":
        return (0.0, flagged)

    if params.delta == 0:
        if epsilon in (-1.0, 1.0):
            return (math.nan, True)
        if regime == "saturated":
            return (0.0, flagged)
        x = (critical_coupling(params) / params.gamma) ** 2
        arg = 2.0 * (epsilon - epsilon_saddle_floor(params))
        if arg <= 0.0:
            return (math.inf, True)
        slope = math.sqrt(x) / math.sqrt(arg)
        return (slope if regime == "below_saddle" else 0.5 * slope, flagged)

    # delta=1: finite differences of the quadrature
    gc = critical_coupling(params)
    floor = epsilon_saddle_floor(params) if params.gamma > gc else -1.0
    h_eff = h
    for kink in (-1.0, 1.0):
        d = abs(epsilon - kink)
        if 0.0 < d < h_eff:
            h_eff = d / 2.0
    h_eff = max(h_eff, 1e-7)
    if epsilon in (-1.0, 1.0):
        return (math.nan, True)
    if epsilon - h_eff < floor:
        lo = dos_dicke(epsilon, params)
        hi = dos_dicke(epsilon + h_eff, params)
        return ((hi - lo) / h_eff, flagged)
    lo = dos_dicke(epsilon - h_eff, params)
    hi = dos_dicke(epsilon + h_eff, params)
    return ((hi - lo) / (2.0 * h_eff), flagged)


# --------------------------------------------------------------------------
# assembled curve with singularity markers
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SingularityMarker:
    epsilon: float
    kind: str   # 'derivative_jump' | 'derivative_log_divergence' | 'saturation_kink'


@dataclass
class DosCurve:
    params: ModelParams
    epsilon: np.ndarray
    nu_scaled: np.ndarray
    nu_prime_scaled: np.ndarray
    regime: list
    prime_flagged: np.ndarray
    singularities: list = field(default_factory=list)


def singularity_markers(params: ModelParams) -> list:
    """Non-analytic points of the scaled density for these parameters."""
    markers = [SingularityMarker(1.0, "saturation_kink")]
    if params.delta == 1 and params.gamma > critical_coupling(params):
        markers.append(SingularityMarker(-1.0, "derivative_log_divergence"))
    else:
        markers.append(SingularityMarker(-1.0, "derivative_jump"))
    return sorted(markers, key=lambda m: m.epsilon)


def dos_curve(params: ModelParams, epsilons, h: float = 1e-4) -> DosCurve:
    """Tabulate dos and its derivative; forbidden samples map to zero."""
    eps_arr = np.asarray(epsilons, dtype=float)
    if eps_arr.ndim != 1 or len(eps_arr) == 0:
        raise ValueError("epsilons must be a non-empty 1-d array")
    values = np.empty_like(eps_arr)
    primes = np.empty_like(eps_arr)
    flags = np.zeros(len(eps_arr), dtype=bool)
    regimes = []
    for i, eps in enumerate(eps_arr):
        regime = classify_regime(eps, params)
        regimes.append(regime)
        if regime == "forbidden":
            values[i] = 0.0
            primes[i] = 0.0
            continue
        values[i] = dos(eps, params)
        primes[i], flags[i] = dos_derivative(eps, params, h=h)
    return DosCurve(params, eps_arr, values, primes, regimes, flags,
                    singularity_markers(params))


def dos_bin_average(params: ModelParams, lo: float, hi: float) -> float:
    """Mean of the scaled density over [lo, hi].

    This is the quantity a histogram Monte-Carlo bin estimates, so the
    integral is split at interior regime boundaries and uses the same
    square-root edge substitution at the shell floor.
    """
    if hi <= lo:
        raise ValueError("need lo < hi")
    gc = critical_coupling(params)
    floor = epsilon_saddle_floor(params) if params.gamma > gc else -1.0
    cuts = [c for c in (floor, -1.0, 1.0) if lo < c < hi]
    edges = [lo] + sorted(set(cuts)) + [hi]
    nodes, weights = np.polynomial.legendre.leggauss(16)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        if b <= floor:
            continue
        a_eff = max(a, floor)
        if abs(a_eff - floor) < 1e-14:
            # sqrt edge at the shell floor: eps = floor + t^2
            t_hi = math.sqrt(b - floor)
            t = 0.5 * t_hi * (nodes + 1.0)
            w = 0.5 * t_hi * weights
            vals = [dos(floor + ti * ti, params) * 2.0 * ti for ti in t]
            total += float(np.dot(w, vals))
        else:
            mid = 0.5 * (a_eff + b)
            half = 0.5 * (b - a_eff)
            vals = [dos(mid + half * ni, params) for ni in nodes]
            total += half * float(np.dot(weights, vals))
    return total / (hi - lo)


# --------------------------------------------------------------------------
# Monte-Carlo estimator of the phase-space density
# --------------------------------------------------------------------------

@dataclass
class MonteCarloDos:
    edges: np.ndarray
    nu: np.ndarray          # scaled density estimate per bin (bin average)
    std_err: np.ndarray
    counts: np.ndarray
    n_samples: int
    seed: int
    disc_radius: float


def mc_disc_radius(params: ModelParams, eps_max: float) -> float:
    """Smallest scaled quadrature-disc radius covering every energy shell
    up to eps_max, from completing the square in (Q, P) = (q, p)/sqrt(j):
    center offset <= (gamma/omega)(1+delta), shell radius^2 <=
    (2 omega0/omega)(eps_max + 1) + offset^2."""
    c = params.gamma / params.omega * (1 + params.delta)
    r2 = 2.0 * params.omega0 / params.omega * (eps_max + 1.0)
    return c + math.sqrt(max(0.0, r2) + c * c)


def dos_monte_carlo(params: ModelParams, epsilon_edges, n_samples: int = 1_000_000,
                    seed: int = 0, threads: int = 1,
                    disc_radius: float | None = None) -> MonteCarloDos:
    """Histogram estimate of the scaled density from uniform phase-space
    sampling; the counter-based generator makes the result a pure function
    of (seed, n_samples) regardless of thread scheduling.
    """
    edges = np.asarray(epsilon_edges, dtype=float)
    if edges.ndim != 1 or len(edges) < 2 or np.any(np.diff(edges) <= 0):
        raise ValueError("epsilon_edges must be strictly increasing, length >= 2")
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    eps_max = float(edges[-1])
    r_min = mc_disc_radius(params, eps_max)
    if disc_radius is None:
        disc_radius = 1.05 * r_min
    elif disc_radius < r_min:
        raise ValueError(
            f"disc_radius {disc_radius} below the required bound {r_min}")

    batch = 1 << 17
    n_batches = (n_samples + batch - 1) // batch
    w_ratio = params.omega / params.omega0
    g_ratio = params.gamma / params.omega0
    d = params.delta

    def run_batch(b: int) -> np.ndarray:
        m = min(batch, n_samples - b * batch)
        rng = np.random.Generator(np.random.Philox(key=seed).jumped(b))
        u = rng.random((4, m))
        r = disc_radius * np.sqrt(u[0])
        ang = 2.0 * math.pi * u[1]
        bq = r * np.cos(ang)
        bp = r * np.sin(ang)
        y = 2.0 * u[2] - 1.0
        phi = 2.0 * math.pi * u[3]
        s = np.sqrt(1.0 - y * y)
        eps = (y + 0.5 * w_ratio * (bq * bq + bp * bp)
               + g_ratio * s * ((1 + d) * bq * np.cos(phi)
                                - (1 - d) * bp * np.sin(phi)))
        hist, _ = np.histogram(eps, bins=edges)
        return hist.astype(np.int64)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run_batch, range(n_batches)))
    else:
        parts = [run_batch(b) for b in range(n_batches)]
    counts = np.sum(parts, axis=0)

    box_measure = math.pi * disc_radius ** 2 * 2.0 * 2.0 * math.pi
    norm = (params.omega / (2.0 * params.omega0 * (2.0 * math.pi) ** 2)
            * box_measure / n_samples)
    widths = np.diff(edges)
    nu = norm * counts / widths
    frac = counts / n_samples
    std_err = norm * np.sqrt(np.maximum(counts, 1) * (1.0 - frac)) / widths
    return MonteCarloDos(edges, nu, std_err, counts.astype(np.int64),
                         n_samples, seed, disc_radius)


__all__ = [
    "ForbiddenEnergy", "epsilon_saddle_floor", "classify_regime",
    "spin_turning_points", "dos_tc", "phi_admissible_fraction", "dos_dicke",
    "dos", "dos_derivative", "dos_curve", "DosCurve", "SingularityMarker",
    "singularity_markers", "dos_bin_average", "dos_monte_carlo",
    "MonteCarloDos", "mc_disc_radius",
]
