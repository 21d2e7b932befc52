"""Physical parameterization and Hamiltonian builders for the mapped engine.

Units: eps_c = hbar = k_B = 1 throughout.  Energies are dimensionless
multiples of the cold-phase sigma_z splitting.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict

import numpy as np

from . import qops
from .qops import SpaceLayout

RC_POLICIES = ("resonant", "fixed_gamma")
MODES = ("coherent", "incoherent")
RESET_POLICIES = ("dissipative", "projective")
PROPAGATORS = ("auto", "rk", "expm")


@dataclass(frozen=True)
class TlsParams:
    """Working-system splittings for the cold (c) and hot (h) phases."""

    eps_c: float = 1.0
    delta_c: float = 1.0
    eps_h: float = 1.5
    delta_h: float = 1.5

    def __post_init__(self):
        # the two stroke-endpoint Hamiltonians must commute (common eigenbasis)
        if abs(self.eps_h * self.delta_c - self.eps_c * self.delta_h) > 1e-12:
            raise ValueError(
                "commuting-stroke condition violated: eps_h*delta_c != eps_c*delta_h"
            )
        if self.mu_c >= self.mu_h:
            raise ValueError("need mu_c < mu_h for an engine cycle")

    @property
    def mu_c(self) -> float:
        return math.hypot(self.eps_c, self.delta_c)

    @property
    def mu_h(self) -> float:
        return math.hypot(self.eps_h, self.delta_h)

    def mu(self, phase: str) -> float:
        return {"c": self.mu_c, "h": self.mu_h}[phase]

    def eps_delta(self, phase: str) -> tuple:
        if phase == "c":
            return self.eps_c, self.delta_c
        if phase == "h":
            return self.eps_h, self.delta_h
        raise ValueError(f"unknown phase {phase!r}")


@dataclass(frozen=True)
class SpectralDensity:
    """Debye-type spectral density alpha*w*wc/(w^2 + wc^2)."""

    alpha: float
    omega_c: float

    def __post_init__(self):
        if self.alpha <= 0 or self.omega_c <= 0:
            raise ValueError("alpha and omega_c must be positive")

    def value(self, omega: float) -> float:
        if omega < 0:
            raise ValueError("spectral density defined for omega >= 0")
        return self.alpha * omega * self.omega_c / (omega**2 + self.omega_c**2)


def spectral_density_value(J: SpectralDensity, omega: float) -> float:
    return J.value(omega)


@dataclass(frozen=True)
class RcParams:
    """Reaction-coordinate frequency, TLS coupling and residual coupling strength."""

    Omega: float
    lam: float
    gamma: float


def rc_mapping(
    J: SpectralDensity,
    tls: TlsParams,
    phase: str,
    policy: str = "resonant",
    gamma: float | None = None,
) -> RcParams:
    """RC frequency/coupling for one reservoir.

    resonant policy: the residual spectral density pins gamma = mu/(2 pi omega_c),
    hence Omega = mu of that reservoir's isochore phase.  fixed_gamma policy:
    gamma is user supplied and Omega = 2 pi gamma omega_c for both phases.
    """
    if policy == "resonant":
        Omega = tls.mu(phase)
        g = Omega / (2.0 * math.pi * J.omega_c)
    elif policy == "fixed_gamma":
        if gamma is None or gamma <= 0:
            raise ValueError("fixed_gamma policy requires a positive gamma")
        g = gamma
        Omega = 2.0 * math.pi * g * J.omega_c
    else:
        raise ValueError(f"unknown RC policy {policy!r}")
    lam = math.sqrt(math.pi * J.alpha * Omega / 2.0)
    return RcParams(Omega=Omega, lam=lam, gamma=g)


@dataclass(frozen=True)
class ReservoirTemps:
    beta_h: float = 0.95
    beta_c: float = 2.5

    def __post_init__(self):
        if not (0.0 < self.beta_h < self.beta_c):
            raise ValueError("need 0 < beta_h < beta_c (hot hotter than cold)")

    def beta(self, reservoir: str) -> float:
        return {"h": self.beta_h, "c": self.beta_c}[reservoir]


def bose_occupation(beta: float, Omega: float) -> float:
    return 1.0 / math.expm1(beta * Omega)


@dataclass(frozen=True)
class Numerics:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    limit_cycle_tol: float = 1e-9
    max_cycles: int = 500
    positivity_floor: float = 1e-6
    stationary_tol: float = 1e-10
    # largest total_dim for which segment propagators are materialized as
    # dense superoperator exponentials (d^2 x d^2)
    expm_dim_cap: int = 50
    hermitize_every: int = 100

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0 or self.limit_cycle_tol <= 0:
            raise ValueError("tolerances must be positive")


@dataclass(frozen=True)
class EngineConfig:
    """Every physical and numerical parameter of one engine run."""

    tls: TlsParams = field(default_factory=TlsParams)
    spectral_density: SpectralDensity = field(
        default_factory=lambda: SpectralDensity(alpha=0.01 / math.pi, omega_c=0.265)
    )
    temps: ReservoirTemps = field(default_factory=ReservoirTemps)
    tau_i: float = 3000.0
    rc_levels: int = 9
    rc_policy: str = "resonant"
    rc_gamma: float | None = None
    gamma_d: float | None = None  # None -> max(0.05, 20/tau_i)
    gamma_dep: float = 10.0
    mode: str = "coherent"
    reset_policy: str = "dissipative"
    propagator: str = "auto"
    numerics: Numerics = field(default_factory=Numerics)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.reset_policy not in RESET_POLICIES:
            raise ValueError(f"reset_policy must be one of {RESET_POLICIES}")
        if self.rc_policy not in RC_POLICIES:
            raise ValueError(f"rc_policy must be one of {RC_POLICIES}")
        if self.propagator not in PROPAGATORS:
            raise ValueError(f"propagator must be one of {PROPAGATORS}")
        if not (self.tau_i > 0):
            raise ValueError("tau_i must be positive (math.inf = saturated isochores)")
        if self.rc_levels < 2:
            raise ValueError("rc_levels must be >= 2")
        if self.gamma_dep <= 0:
            raise ValueError("gamma_dep must be positive")
        if self.gamma_d is not None and self.gamma_d <= 0:
            raise ValueError("gamma_d must be positive when given")

    @property
    def layout(self) -> SpaceLayout:
        return SpaceLayout(rc_levels=self.rc_levels)

    @property
    def saturated(self) -> bool:
        """tau_i = inf: isochores run to the stationary state of their generator."""
        return math.isinf(self.tau_i)

    def resolved_gamma_d(self) -> float:
        if self.gamma_d is not None:
            return self.gamma_d
        if self.saturated:
            return 0.05
        return max(0.05, 20.0 / self.tau_i)

    def rc_params(self, reservoir: str) -> RcParams:
        return rc_mapping(
            self.spectral_density, self.tls, reservoir, self.rc_policy, self.rc_gamma
        )

    # --- JSON interchange -------------------------------------------------

    def to_dict(self) -> dict:
        d = asdict(self)
        d["tau_i"] = "inf" if self.saturated else self.tau_i
        return d

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: dict) -> "EngineConfig":
        data = dict(data)
        kwargs = {}
        # nested sections merge over the defaults so partial dicts are valid
        defaults = cls()
        for name, sub_cls in (
            ("tls", TlsParams),
            ("spectral_density", SpectralDensity),
            ("temps", ReservoirTemps),
            ("numerics", Numerics),
        ):
            if name in data:
                payload = data.pop(name)
                if not isinstance(payload, dict):
                    raise ValueError(f"config field {name!r} must be an object")
                kwargs[name] = sub_cls(**{**asdict(getattr(defaults, name)), **payload})
        if "tau_i" in data:
            tau = data.pop("tau_i")
            kwargs["tau_i"] = math.inf if tau in ("inf", "Infinity") else float(tau)
        known = {
            "rc_levels", "rc_policy", "rc_gamma", "gamma_d", "gamma_dep",
            "mode", "reset_policy", "propagator",
        }
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        kwargs.update(data)
        return cls(**kwargs)

    @classmethod
    def from_json(cls, text: str) -> "EngineConfig":
        return cls.from_dict(json.loads(text))


# --- Hamiltonian builders -------------------------------------------------


def build_H_S(tls: TlsParams, phase: str, layout: SpaceLayout | None = None) -> np.ndarray:
    """(eps/2) sigma_z + (delta/2) sigma_x, on the TLS factor or the full space."""
    eps, delta = tls.eps_delta(phase)
    h = 0.5 * eps * qops.pauli("z") + 0.5 * delta * qops.pauli("x")
    if layout is None:
        return h
    return qops.embed(h, layout.dims, qops.SLOT_TLS)


def build_H_I(rc: RcParams, reservoir: str, layout: SpaceLayout) -> np.ndarray:
    """-lambda_j sigma_z (a_j + a_j^dag) on the full space."""
    sz = qops.build_pauli(layout, "z")
    a, ad = qops.build_ladder(layout, reservoir)
    return -rc.lam * sz @ (a + ad)


def build_H_Sprime(
    tls: TlsParams,
    rc_h: RcParams,
    rc_c: RcParams,
    phase: str,
    coupling,
    layout: SpaceLayout,
) -> np.ndarray:
    """TLS + both RC self-energies + the interaction terms listed in `coupling`."""
    H = build_H_S(tls, phase, layout)
    for reservoir, rc in (("h", rc_h), ("c", rc_c)):
        a, ad = qops.build_ladder(layout, reservoir)
        H = H + rc.Omega * (ad @ a)
        if reservoir in coupling:
            H = H + build_H_I(rc, reservoir, layout)
    return H


def thermal_state(H: np.ndarray, beta: float) -> np.ndarray:
    """exp(-beta H)/Z evaluated through eigenvalues shifted by the ground energy."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    es = qops.eigh(H)
    w = np.exp(-beta * (es.values - es.values[0]))
    w /= w.sum()
    return (es.vectors * w) @ es.vectors.conj().T


def thermal_rc_state(rc: RcParams, beta: float, rc_levels: int) -> np.ndarray:
    """Thermal state of the bare RC oscillator Omega a^dag a on one Fock factor."""
    a = qops.lowering(rc_levels)
    return thermal_state(rc.Omega * (a.conj().T @ a), beta)
