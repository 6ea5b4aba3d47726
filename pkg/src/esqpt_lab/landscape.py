"""Classical (mean-field) energy landscape on the Bloch-sphere x oscillator
phase space.

Coordinates: (q, p) for the field quadratures, (phi, jz) for the collective
pseudospin, with jz in [-j, j] and phi the azimuth.  The polar angle theta is
measured from the south pole, jz = -j cos(theta).

The reduced energy surface eliminates (q, p) at their stationary values,
leaving a function of (jz, phi) whose critical points carry the phase
structure: the always-present poles, and above the critical coupling either
two symmetry-broken minima (delta=1) or a degenerate ring of minima (delta=0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .params import ModelParams, critical_coupling, scaled_energy


class PoleSingularity(ValueError):
    """The azimuthal flow is undefined at |jz| = j."""


@dataclass(frozen=True)
class PhaseSpacePoint:
    q: float
    p: float
    phi: float
    jz: float

    def phi_defined(self, params: "ModelParams") -> bool:
        """phi is a gauge choice (undefined) exactly at the poles."""
        return abs(self.jz) < params.j

    def theta(self, params: "ModelParams") -> float:
        """Polar angle from the south pole, jz = -j cos(theta)."""
        return math.acos(max(-1.0, min(1.0, -self.jz / params.j)))


@dataclass(frozen=True)
class FixedPoint:
    point: PhaseSpacePoint
    epsilon: float
    stability: str                      # 'stable' | 'unstable' | 'saddle'
    continuous_ring: bool = False
    hessian_eigs: tuple = field(default=(), compare=False)


def classical_hamiltonian(point: PhaseSpacePoint, params: ModelParams) -> float:
    """Mean-field energy (absolute units) at a phase-space point."""
    j = params.j
    y = point.jz / j
    if abs(y) > 1 + 1e-12:
        raise ValueError(f"|jz| must not exceed j, got jz={point.jz}, j={j}")
    y = max(-1.0, min(1.0, y))
    s = math.sqrt(max(0.0, 1.0 - y * y))
    d = params.delta
    coupling = params.gamma * math.sqrt(j) * s * (
        (1 + d) * point.q * math.cos(point.phi)
        - (1 - d) * point.p * math.sin(point.phi)
    )
    return (
        params.omega0 * point.jz
        + 0.5 * params.omega * (point.q ** 2 + point.p ** 2)
        + coupling
    )


def flow_rhs(point: PhaseSpacePoint, params: ModelParams) -> tuple:
    """Hamiltonian flow (dq/dt, dp/dt, dphi/dt, djz/dt).

    Used as a fixed-point verifier.  Raises PoleSingularity at |jz| = j,
    where the azimuthal rate divides by sqrt(1 - (jz/j)^2).
    """
    j = params.j
    y = point.jz / j
    if abs(y) > 1:
        raise ValueError(f"|jz| must not exceed j, got jz={point.jz}, j={j}")
    if abs(y) == 1:
        raise PoleSingularity("flow azimuth undefined at |jz| = j")
    s = math.sqrt(1.0 - y * y)
    d = params.delta
    g = params.gamma
    sqj = math.sqrt(j)
    cphi = math.cos(point.phi)
    sphi = math.sin(point.phi)
    drive = (1 + d) * point.q * cphi - (1 - d) * point.p * sphi
    dq = params.omega * point.p - (1 - d) * g * sqj * s * sphi
    dp = -params.omega * point.q - (1 + d) * g * sqj * s * cphi
    dphi = params.omega0 - (g * point.jz / (j ** 1.5 * s)) * drive
    djz = g * sqj * s * ((1 + d) * point.q * sphi + (1 - d) * point.p * cphi)
    return (dq, dp, dphi, djz)


def energy_surface(jz, phi, params: ModelParams):
    """Reduced energy surface eps(jz, phi), scaled units.

    (q, p) are eliminated at their stationary values; the result is
    eps = jz/j - (gamma^2 / 2 gamma_c^2) (1 - jz^2/j^2)
          * (1 - (4 delta/(1+delta)^2) sin^2 phi).

    Vectorized over numpy inputs.
    """
    j = params.j
    y = np.asarray(jz) / j
    gc = critical_coupling(params)
    ratio2 = (params.gamma / gc) ** 2
    k = 4 * params.delta / (1 + params.delta) ** 2
    return y - 0.5 * ratio2 * (1.0 - y * y) * (1.0 - k * np.sin(phi) ** 2)


def ground_energy(params: ModelParams) -> float:
    """Scaled minimum of the energy surface.

    -1 in the normal phase; for gamma > gamma_c the symmetry-broken
    minimum -(gc^2/gamma^2 + gamma^2/gc^2)/2.
    """
    gc = critical_coupling(params)
    if params.gamma <= gc:
        return -1.0
    x = (gc / params.gamma) ** 2
    return -0.5 * (x + 1.0 / x)


# --------------------------------------------------------------------------
# fixed points and computed stability
# --------------------------------------------------------------------------

# A local chart around a candidate point: (u, v) = theta*(cos phi, sin phi)
# with theta the polar angle from the chart's pole.  The surface is smooth
# in (u, v) through the pole itself, which the raw (jz, phi) variables
# are not.

def _surface_chart(u, v, params: ModelParams, north: bool):
    theta = np.hypot(u, v)
    cos_t = np.cos(theta)
    y = cos_t if north else -cos_t
    one_minus_y2 = np.sin(theta) ** 2
    safe = np.where(theta > 0, theta, 1)
    sin2phi = np.where(theta > 0, (v / safe) ** 2, 0.0)
    gc = critical_coupling(params)
    ratio2 = (params.gamma / gc) ** 2
    k = 4 * params.delta / (1 + params.delta) ** 2
    return y - 0.5 * ratio2 * one_minus_y2 * (1.0 - k * sin2phi)


def _hessian_eigs(params: ModelParams, theta0: float, phi0: float,
                  north: bool, h: float = 1e-3) -> tuple:
    """Eigenvalues of the chart Hessian, Richardson-extrapolated.

    Extended precision plus one Richardson step keeps the error far below
    the 1e-8 degeneracy threshold, so the exactly flat direction of the
    delta=0 ring registers as zero instead of finite-difference noise.
    """
    ld = np.longdouble
    u0 = ld(theta0) * np.cos(ld(phi0))
    v0 = ld(theta0) * np.sin(ld(phi0))

    def f(du, dv):
        return _surface_chart(u0 + du, v0 + dv, params, north)

    def hess(step):
        step = ld(step)
        f00 = f(ld(0), ld(0))
        hxx = (f(step, ld(0)) - 2 * f00 + f(-step, ld(0))) / step ** 2
        hyy = (f(ld(0), step) - 2 * f00 + f(ld(0), -step)) / step ** 2
        hxy = (f(step, step) + f(-step, -step)
               - f(step, -step) - f(-step, step)) / (4 * step ** 2)
        return hxx, hxy, hyy

    h1 = hess(h)
    h2 = hess(h / 2)
    hxx, hxy, hyy = ((4 * b - a) / 3 for a, b in zip(h1, h2))
    mean = 0.5 * (hxx + hyy)
    disc = np.sqrt((0.5 * (hxx - hyy)) ** 2 + hxy ** 2)
    return (float(mean - disc), float(mean + disc))


_DEGENERATE_EIG = 1e-8


def _classify(eigs: tuple) -> tuple:
    """Map Hessian eigenvalue signs to a stability label.

    Returns (label, degenerate_flat).  A minimum is stable, a maximum
    unstable, mixed signs a saddle; eigenvalues below the degeneracy
    threshold count as flat (the delta=0 ring direction).
    """
    lo, hi = eigs
    lo_z = abs(lo) < _DEGENERATE_EIG
    hi_z = abs(hi) < _DEGENERATE_EIG
    if lo_z and hi_z:
        raise ArithmeticError(f"fully degenerate Hessian {eigs}")
    if lo_z or hi_z:
        nonzero = hi if lo_z else lo
        return ("stable" if nonzero > 0 else "unstable", True)
    if lo > 0:
        return ("stable", False)
    if hi < 0:
        return ("unstable", False)
    return ("saddle", False)


def pole_residual(params: ModelParams, sign: int) -> float:
    """Stationarity residual at jz = sign*j, in Cartesian spin coordinates.

    The (phi, jz) chart is singular at the poles, so the check is done on
    H(q, p, jx, jy, jz): the (q, p) gradient and the tangential part of
    the spin gradient must vanish at q = p = jx = jy = 0, jz = sign*j.
    """
    if sign not in (-1, 1):
        raise ValueError("sign must be -1 or +1")
    q = p = jx = jy = 0.0
    jz = sign * params.j
    c = params.gamma / math.sqrt(params.j)
    dh_dq = params.omega * q + c * (1 + params.delta) * jx
    dh_dp = params.omega * p - c * (1 - params.delta) * jy
    grad_spin = np.array([c * (1 + params.delta) * q,
                          -c * (1 - params.delta) * p,
                          params.omega0])
    normal = np.array([jx, jy, jz]) / params.j
    tangential = grad_spin - np.dot(grad_spin, normal) * normal
    return max(abs(dh_dq), abs(dh_dp), float(np.linalg.norm(tangential)))


def fixed_points(params: ModelParams) -> list:
    """Stationary points of the flow, with computed stability labels.

    Always contains the two poles; above the critical coupling also the
    symmetry-broken minima (two isolated points for delta=1, a degenerate
    ring represented by one point with continuous_ring=True for delta=0).
    """
    gc = critical_coupling(params)
    j = params.j
    out = []

    for sign, north in ((-1, False), (+1, True)):
        if pole_residual(params, sign) > 1e-12:
            raise ArithmeticError("pole stationarity violated")
        pt = PhaseSpacePoint(q=0.0, p=0.0, phi=0.0, jz=sign * j)
        eps = scaled_energy(classical_hamiltonian(pt, params), params)
        eigs = _hessian_eigs(params, theta0=0.0, phi0=0.0, north=north)
        label, _ = _classify(eigs)
        out.append(FixedPoint(pt, eps, label, continuous_ring=False,
                              hessian_eigs=eigs))

    if params.gamma > gc:
        ratio = gc / params.gamma
        y_m = -(ratio ** 2)
        s_m = math.sqrt(1.0 - ratio ** 4)
        theta_m = math.acos(-y_m)
        if params.delta == 1:
            amp = 2 * params.gamma * math.sqrt(j) / params.omega * s_m
            for q_m, phi_m in ((-amp, 0.0), (amp, math.pi)):
                pt = PhaseSpacePoint(q=q_m, p=0.0, phi=phi_m, jz=y_m * j)
                eps = scaled_energy(classical_hamiltonian(pt, params), params)
                eigs = _hessian_eigs(params, theta_m, phi_m, north=False)
                label, _ = _classify(eigs)
                out.append(FixedPoint(pt, eps, label, hessian_eigs=eigs))
        else:
            amp = params.gamma * math.sqrt(j) / params.omega * s_m
            phi_m = 0.0
            pt = PhaseSpacePoint(q=-amp, p=0.0, phi=phi_m, jz=y_m * j)
            eps = scaled_energy(classical_hamiltonian(pt, params), params)
            eigs = _hessian_eigs(params, theta_m, phi_m, north=False)
            label, flat = _classify(eigs)
            out.append(FixedPoint(pt, eps, label, continuous_ring=flat,
                                  hessian_eigs=eigs))
    return out


def surface_grid(params: ModelParams, n_theta: int = 121, n_phi: int = 144):
    """Sample the reduced surface on a (theta, phi) grid.

    Returns flat arrays (theta_cos_phi, theta_sin_phi, epsilon) suitable
    for direct CSV emission; theta spans [0, pi] inclusive, phi spans
    [0, 2*pi) without the duplicate endpoint.  Even n_phi keeps phi = pi
    on the grid so sin(phi) = 0 cuts exist exactly.
    """
    if n_theta < 2 or n_phi < 4:
        raise ValueError("grid too small")
    theta = np.linspace(0.0, math.pi, n_theta)
    phi = 2 * math.pi * np.arange(n_phi) / n_phi
    tg, pg = np.meshgrid(theta, phi, indexing="ij")
    jz = -params.j * np.cos(tg)
    eps = energy_surface(jz, pg, params)
    return (tg * np.cos(pg)).ravel(), (tg * np.sin(pg)).ravel(), eps.ravel()
