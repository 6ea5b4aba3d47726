"""Model parameters and the shared energy scaling.

The Hamiltonian family treated everywhere in this package is

    H = omega a'a + omega0 Jz + (gamma/sqrt(N)) [(a J+ + a' J-) + delta (a' J+ + a J-)]

with N = 2j atoms.  delta=0 is the Tavis-Cummings model (rotating-wave
coupling only), delta=1 the Dicke model (counter-rotating term included).

All other modules consume energies through :func:`scaled_energy` /
:func:`unscale`; this is the single conversion path between absolute
energies E and the intensive variable eps = E / (omega0 * j).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class ModelParams:
    """Immutable parameter set.

    Attributes
    ----------
    omega:  cavity field frequency (> 0)
    omega0: atomic level splitting (> 0)
    gamma:  collective coupling strength (>= 0)
    j2:     twice the pseudospin length, an exact integer (j = j2/2,
            so half-integer j is representable without rounding)
    delta:  0 for Tavis-Cummings, 1 for Dicke
    """

    omega: float = 1.0
    omega0: float = 1.0
    gamma: float = 0.0
    j2: int = 2
    delta: int = 0

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        if not self.omega0 > 0:
            raise ValueError(f"omega0 must be positive, got {self.omega0}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be non-negative, got {self.gamma}")
        if int(self.j2) != self.j2 or self.j2 < 1:
            raise ValueError(f"j2 must be a positive integer, got {self.j2}")
        if self.delta not in (0, 1):
            raise ValueError(f"delta must be 0 or 1, got {self.delta}")
        # normalize types so frozen instances hash/compare predictably
        object.__setattr__(self, "omega", float(self.omega))
        object.__setattr__(self, "omega0", float(self.omega0))
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "j2", int(self.j2))
        object.__setattr__(self, "delta", int(self.delta))

    @property
    def j(self) -> float:
        """Pseudospin length j = j2/2 (exact in binary floating point)."""
        return self.j2 / 2

    @property
    def n_atoms(self) -> int:
        """Number of two-level atoms, N = 2j."""
        return self.j2

    def with_gamma(self, gamma: float) -> "ModelParams":
        return dataclasses.replace(self, gamma=gamma)

    @property
    def model_name(self) -> str:
        return "dicke" if self.delta == 1 else "tc"


def critical_coupling(params: ModelParams) -> float:
    """Coupling at which the normal phase destabilizes.

    gamma_c = sqrt(omega0 * omega) / (1 + delta): the Tavis-Cummings
    value is twice the Dicke one.
    """
    return (params.omega0 * params.omega) ** 0.5 / (1 + params.delta)


def coupling_ratio(params: ModelParams) -> float:
    """gamma / gamma_c for the given model."""
    return params.gamma / critical_coupling(params)


def scaled_energy(energy: float, params: ModelParams):
    """eps = E / (omega0 * j).  Accepts scalars or numpy arrays."""
    return energy / (params.omega0 * params.j)


def unscale(epsilon: float, params: ModelParams):
    """Absolute energy E = eps * omega0 * j."""
    return epsilon * params.omega0 * params.j


# --------------------------------------------------------------------------
# plain-text configuration files (key = value, '#' comments)
# --------------------------------------------------------------------------

_CONFIG_KEYS = {"omega", "omega0", "gamma", "gamma_over_gc", "j2", "delta"}


class ConfigError(ValueError):
    """Malformed configuration input."""


def parse_config_text(text: str) -> dict:
    """Parse key=value lines into a raw string mapping."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value.strip()
    return out


def load_config(path: str | Path) -> dict:
    return parse_config_text(Path(path).read_text())


def resolve_params(mapping: dict) -> ModelParams:
    """Build ModelParams from a raw mapping.

    ``gamma_over_gc`` may be given instead of ``gamma``; it is resolved
    against the critical coupling of the configured model.  Unset keys
    fall back to the resonant defaults omega = omega0 = 1.
    """
    known = dict(mapping)
    if "gamma" in known and "gamma_over_gc" in known:
        raise ConfigError("give either gamma or gamma_over_gc, not both")
    try:
        omega = float(known.pop("omega", 1.0))
        omega0 = float(known.pop("omega0", 1.0))
        j2 = int(known.pop("j2", 2))
        delta = int(known.pop("delta", 0))
        ratio = known.pop("gamma_over_gc", None)
        gamma = known.pop("gamma", None)
        if known:
            raise ConfigError(f"unknown keys: {sorted(known)}")
        base = ModelParams(omega=omega, omega0=omega0, gamma=0.0, j2=j2, delta=delta)
        if ratio is not None:
            gamma = float(ratio) * critical_coupling(base)
        elif gamma is None:
            gamma = 0.0
        return dataclasses.replace(base, gamma=float(gamma))
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
