"""Master-equation generators for the engine's isochore segments.

A `Generator` applies d rho / dt to a dense density matrix.  Internally the
action is evaluated in the eigenbasis of the segment Hamiltonian, where the
unitary part and the pure-dephasing part are elementwise, the RC dissipative
part reduces to four matrix products and the rethermalization dissipator to
six.  Generators are immutable after construction and safe to share.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels, model, qops
from .qops import EigenSystem, SpaceLayout


def _thermal_weight(xi: np.ndarray, beta: float, eps_deg: float) -> np.ndarray:
    """xi * coth(beta*xi/2) with the analytic 2/beta limit inside degenerate gaps."""
    out = np.full_like(xi, 2.0 / beta)
    big = np.abs(xi) >= eps_deg
    x = xi[big]
    out[big] = x / np.tanh(0.5 * beta * x)
    return out


def chi_xi_eigen(
    es: EigenSystem, A_e: np.ndarray, beta: float, gamma: float, eps_deg: float | None = None
) -> tuple:
    """(chi, Xi) in the eigenbasis of the segment Hamiltonian.

    chi_mn = (pi gamma / 2) xi_mn coth(beta xi_mn / 2) A_mn  (even weight, Hermitian),
    Xi_mn  = (pi gamma / 2) xi_mn A_mn                       (odd weight, anti-Hermitian).
    Imaginary principal-value (Lamb-shift) parts are dropped.
    """
    if eps_deg is None:
        eps_deg = qops.default_deg_tol(es.values)
    xi = es.gap_matrix()
    pref = 0.5 * math.pi * gamma
    chi = pref * _thermal_weight(xi, beta, eps_deg) * A_e
    Xi = pref * xi * A_e
    return chi, Xi


def build_chi_xi(
    H: np.ndarray, A: np.ndarray, beta: float, gamma: float, eps_deg: float | None = None
) -> tuple:
    """(chi, Xi) in the lab basis, for a Hermitian segment Hamiltonian and coupling A."""
    qops.require_hermitian(H, 1e-10, "segment Hamiltonian")
    qops.require_hermitian(A, 1e-10, "coupling operator")
    es = qops.eigh(H)
    chi_e, Xi_e = chi_xi_eigen(es, es.to_eigen(A), beta, gamma, eps_deg)
    return es.from_eigen(chi_e), es.from_eigen(Xi_e)


@dataclass(frozen=True)
class Generator:
    """Additively composed generator, applied in a fixed eigenframe.

    W is the elementwise (unitary + dephasing) multiplier; the RC part is
    [A, B1 rho + rho B2] with B1 = Xi - chi, B2 = Xi + chi; Ls/cs/K hold the
    rethermalization jump operators.  All operator blocks live in the frame
    basis (columns of `frame.vectors`, identity when frame is None).
    """

    dim: int
    frame: EigenSystem | None
    W: np.ndarray
    have_rc: bool = False
    A: np.ndarray | None = None
    B1: np.ndarray | None = None
    B2: np.ndarray | None = None
    Ls: np.ndarray | None = None
    cs: np.ndarray | None = None
    K: np.ndarray | None = None
    parts: tuple = ()
    hamiltonian: np.ndarray | None = None  # lab-basis unitary-part Hamiltonian

    def _kernel_args(self):
        d = self.dim
        zero = np.zeros((d, d), dtype=complex)
        A = self.A if self.have_rc else zero
        B1 = self.B1 if self.have_rc else zero
        B2 = self.B2 if self.have_rc else zero
        if self.Ls is not None and len(self.Ls):
            Ls, cs, K = self.Ls, self.cs, self.K
        else:
            Ls = np.zeros((0, d, d), dtype=complex)
            cs = np.zeros(0)
            K = zero
        return A, B1, B2, Ls, cs, K

    def apply_eigen(self, rho_e: np.ndarray) -> np.ndarray:
        """d rho / dt for a state already expressed in the frame basis."""
        A, B1, B2, Ls, cs, K = self._kernel_args()
        return kernels.apply_rhs(
            np.ascontiguousarray(rho_e), self.W, self.have_rc, A, B1, B2, len(cs), Ls, cs, K
        )

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """d rho / dt in the lab basis."""
        if self.frame is None:
            return self.apply_eigen(rho)
        rho_e = self.frame.to_eigen(rho)
        return self.frame.from_eigen(self.apply_eigen(rho_e))

    def to_frame(self, rho: np.ndarray) -> np.ndarray:
        return rho if self.frame is None else self.frame.to_eigen(rho)

    def from_frame(self, rho_e: np.ndarray) -> np.ndarray:
        return rho_e if self.frame is None else self.frame.from_eigen(rho_e)

    @property
    def spectral_scale(self) -> float:
        """Largest unitary gap; sets the integrator's step-size ceiling."""
        if self.frame is None:
            return float(np.max(np.abs(self.W.imag))) if self.W.size else 0.0
        return float(self.frame.values[-1] - self.frame.values[0])


def _unitary_W(es: EigenSystem) -> np.ndarray:
    return -1j * es.gap_matrix().astype(complex)


def _dephasing_W(es: EigenSystem, gamma_dep: float) -> np.ndarray:
    # off-diagonal blocks between distinct eigenspaces decay at 2*gamma_dep
    return (-2.0 * gamma_dep * (1.0 - es.group_mask())).astype(complex)


def rc_dissipative_generator(
    H: np.ndarray,
    A: np.ndarray,
    beta: float,
    gamma: float,
    eps_deg: float | None = None,
    include_unitary: bool = True,
) -> Generator:
    """-i[H, rho] - [A, [chi, rho]] + [A, {Xi, rho}] for one coupled reservoir."""
    qops.require_hermitian(H, 1e-10, "segment Hamiltonian")
    qops.require_hermitian(A, 1e-10, "coupling operator")
    es = qops.eigh(H, eps_deg)
    A_e = es.to_eigen(A)
    chi, Xi = chi_xi_eigen(es, A_e, beta, gamma, eps_deg)
    W = _unitary_W(es) if include_unitary else np.zeros_like(es.gap_matrix(), dtype=complex)
    return Generator(
        dim=H.shape[0],
        frame=es,
        W=W,
        have_rc=True,
        A=np.ascontiguousarray(A_e),
        B1=np.ascontiguousarray(Xi - chi),
        B2=np.ascontiguousarray(Xi + chi),
        parts=("rc_dissipative",),
        hamiltonian=H if include_unitary else None,
    )


def rethermalization_generator(a_op: np.ndarray, gamma_d: float, N: float) -> Generator:
    """Thermalizing dissipator gamma_d(N+1) L[a] + gamma_d N L[a^dag], lab frame."""
    if gamma_d <= 0:
        raise ValueError("gamma_d must be positive")
    d = a_op.shape[0]
    Ls = np.stack([a_op, a_op.conj().T])
    cs = np.array([gamma_d * (N + 1.0), gamma_d * N])
    K = cs[0] * (a_op.conj().T @ a_op) + cs[1] * (a_op @ a_op.conj().T)
    return Generator(
        dim=d,
        frame=None,
        W=np.zeros((d, d), dtype=complex),
        Ls=np.ascontiguousarray(Ls),
        cs=cs,
        K=np.ascontiguousarray(K),
        parts=("rethermalization",),
    )


def dephasing_generator(
    H: np.ndarray, gamma_dep: float, eps_deg: float | None = None
) -> Generator:
    """Pure dephasing between distinct eigenspaces of H; energy neutral."""
    qops.require_hermitian(H, 1e-10, "dephasing Hamiltonian")
    es = qops.eigh(H, eps_deg)
    return Generator(
        dim=H.shape[0],
        frame=es,
        W=_dephasing_W(es, gamma_dep),
        parts=("dephasing",),
    )


@dataclass(frozen=True)
class SegmentSpec:
    """One isochore: which reservoir is coupled and which extras are active."""

    reservoir: str  # coupled reservoir, "h" or "c"
    rethermalize: bool = True
    dephase: bool = False
    duration: float = math.inf

    def __post_init__(self):
        if self.reservoir not in ("h", "c"):
            raise ValueError("reservoir must be 'h' or 'c'")

    @property
    def uncoupled(self) -> str:
        return "c" if self.reservoir == "h" else "h"


def isochore_generator(
    H: np.ndarray,
    A_coupled: np.ndarray,
    beta: float,
    gamma: float,
    retherm: tuple | None = None,
    gamma_dep: float | None = None,
    eps_deg: float | None = None,
) -> Generator:
    """Compose the full generator of one isochore in the eigenframe of H.

    retherm, when given, is (a_uncoupled, gamma_d, N_uncoupled).
    """
    qops.require_hermitian(H, 1e-10, "segment Hamiltonian")
    es = qops.eigh(H, eps_deg)
    A_e = es.to_eigen(A_coupled)
    chi, Xi = chi_xi_eigen(es, A_e, beta, gamma, eps_deg)
    W = _unitary_W(es)
    parts = ["rc_dissipative"]
    Ls = cs = K = None
    if retherm is not None:
        a_op, gamma_d, N = retherm
        a_e = es.to_eigen(a_op)
        Ls = np.stack([a_e, a_e.conj().T])
        cs = np.array([gamma_d * (N + 1.0), gamma_d * N])
        K = cs[0] * (a_e.conj().T @ a_e) + cs[1] * (a_e @ a_e.conj().T)
        Ls = np.ascontiguousarray(Ls)
        K = np.ascontiguousarray(K)
        parts.append("rethermalization")
    if gamma_dep is not None:
        W = W + _dephasing_W(es, gamma_dep)
        parts.append("dephasing")
    return Generator(
        dim=H.shape[0],
        frame=es,
        W=W,
        have_rc=True,
        A=np.ascontiguousarray(A_e),
        B1=np.ascontiguousarray(Xi - chi),
        B2=np.ascontiguousarray(Xi + chi),
        Ls=Ls,
        cs=cs,
        K=K,
        parts=tuple(parts),
        hamiltonian=H,
    )


def segment_generator(spec: SegmentSpec, config: model.EngineConfig) -> Generator:
    """Full-space generator for one isochore of the configured engine."""
    layout = config.layout
    j = spec.reservoir
    rc = {r: config.rc_params(r) for r in ("h", "c")}
    H = model.build_H_Sprime(config.tls, rc["h"], rc["c"], j, {j}, layout)
    a_j, ad_j = qops.build_ladder(layout, j)
    retherm = None
    if spec.rethermalize:
        o = spec.uncoupled
        a_o, _ = qops.build_ladder(layout, o)
        N_o = model.bose_occupation(config.temps.beta(o), rc[o].Omega)
        retherm = (a_o, config.resolved_gamma_d(), N_o)
    gamma_dep = config.gamma_dep if spec.dephase else None
    return isochore_generator(
        H,
        a_j + ad_j,
        beta=config.temps.beta(j),
        gamma=rc[j].gamma,
        retherm=retherm,
        gamma_dep=gamma_dep,
    )
