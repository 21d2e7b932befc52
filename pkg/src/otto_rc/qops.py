"""Dense operator algebra for the enlarged space TLS (x) RC_h (x) RC_c.

All operators are plain complex numpy arrays.  The tensor-factor order is
fixed globally as (TLS, RC_h, RC_c); every embedding and partial trace in
this package goes through the helpers here so that the index layout is
defined in exactly one place.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

HERM_TOL = 1e-12
TRACE_TOL = 1e-10

# slot indices in the fixed factor order
SLOT_TLS = 0
SLOT_RC_H = 1
SLOT_RC_C = 2

_RESERVOIR_SLOT = {"h": SLOT_RC_H, "c": SLOT_RC_C}


@dataclass(frozen=True)
class SpaceLayout:
    """Dimensions of the enlarged Hilbert space, factor order (TLS, RC_h, RC_c)."""

    rc_levels: int
    tls_dim: int = 2

    def __post_init__(self):
        if self.rc_levels < 2:
            raise ValueError(f"rc_levels must be >= 2, got {self.rc_levels}")
        if self.tls_dim != 2:
            raise ValueError("the working system is a two-level system")

    @property
    def dims(self) -> tuple:
        return (self.tls_dim, self.rc_levels, self.rc_levels)

    @property
    def total_dim(self) -> int:
        return self.tls_dim * self.rc_levels**2

    def reservoir_slot(self, reservoir: str) -> int:
        return _RESERVOIR_SLOT[reservoir]


def dag(op: np.ndarray) -> np.ndarray:
    return op.conj().T


def is_hermitian(op: np.ndarray, tol: float = HERM_TOL) -> bool:
    return np.max(np.abs(op - op.conj().T)) <= tol


def require_hermitian(op: np.ndarray, tol: float = HERM_TOL, name: str = "operator"):
    defect = np.max(np.abs(op - op.conj().T))
    if defect > tol:
        raise ValueError(f"{name} is not Hermitian (defect {defect:.3e} > {tol:.1e})")


def pauli(which: str) -> np.ndarray:
    """Bare 2x2 Pauli matrix, which in {z, x}."""
    if which == "z":
        return np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
    if which == "x":
        return np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    raise ValueError(f"unknown Pauli label {which!r}")


def lowering(n: int) -> np.ndarray:
    """Truncated bosonic annihilation operator on an n-level Fock factor."""
    a = np.zeros((n, n), dtype=complex)
    ks = np.arange(1, n)
    a[ks - 1, ks] = np.sqrt(ks)
    return a


def embed(op: np.ndarray, dims: tuple, slot: int) -> np.ndarray:
    """Kronecker-embed a factor-local operator, identities on the other slots."""
    if op.shape != (dims[slot], dims[slot]):
        raise ValueError(
            f"operator of shape {op.shape} does not fit factor {slot} of dims {dims}"
        )
    out = np.array([[1.0 + 0.0j]])
    for i, d in enumerate(dims):
        out = np.kron(out, op if i == slot else np.eye(d, dtype=complex))
    return out


def build_pauli(layout: SpaceLayout, which: str) -> np.ndarray:
    return embed(pauli(which), layout.dims, SLOT_TLS)


def build_ladder(layout: SpaceLayout, reservoir: str) -> tuple:
    """(a_j, a_j^dag) for reservoir j in {h, c}, embedded on the full space."""
    a = embed(lowering(layout.rc_levels), layout.dims, layout.reservoir_slot(reservoir))
    return a, a.conj().T


def tensor_embed(op: np.ndarray, layout: SpaceLayout, slot: int) -> np.ndarray:
    return embed(op, layout.dims, slot)


def partial_trace(rho: np.ndarray, dims: tuple, keep) -> np.ndarray:
    """Reduced matrix on the kept factors (indices into dims, order preserved)."""
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise ValueError("keep-set must not be empty")
    if any(k < 0 or k >= len(dims) for k in keep):
        raise ValueError(f"keep-set {keep} out of range for {len(dims)} factors")
    n = len(dims)
    total = int(np.prod(dims))
    if rho.shape != (total, total):
        raise ValueError(f"state shape {rho.shape} does not match dims {dims}")
    t = rho.reshape(*dims, *dims)
    for k in reversed([i for i in range(n) if i not in keep]):
        t = np.trace(t, axis1=k, axis2=k + t.ndim // 2)
    d_keep = int(np.prod([dims[k] for k in keep]))
    return t.reshape(d_keep, d_keep)


@dataclass
class EigenSystem:
    """Ascending eigendecomposition of a Hermitian operator with degeneracy groups."""

    values: np.ndarray
    vectors: np.ndarray
    groups: list = field(default_factory=list)

    @property
    def dim(self) -> int:
        return self.values.size

    def gap_matrix(self) -> np.ndarray:
        """xi[m, n] = E_m - E_n."""
        return self.values[:, None] - self.values[None, :]

    def group_mask(self) -> np.ndarray:
        """mask[m, n] = 1 if m and n belong to the same degeneracy group."""
        gid = np.empty(self.dim, dtype=int)
        for g, idx in enumerate(self.groups):
            gid[idx] = g
        return (gid[:, None] == gid[None, :]).astype(float)

    def to_eigen(self, op: np.ndarray) -> np.ndarray:
        return self.vectors.conj().T @ op @ self.vectors

    def from_eigen(self, op: np.ndarray) -> np.ndarray:
        return self.vectors @ op @ self.vectors.conj().T


def default_deg_tol(values: np.ndarray) -> float:
    span = float(values[-1] - values[0]) if values.size > 1 else 0.0
    return 1e-9 * max(span, 1.0)


def eigh(H: np.ndarray, eps_deg: float | None = None, herm_tol: float = 1e-10) -> EigenSystem:
    """Hermitian eigendecomposition with gap-threshold degeneracy grouping."""
    require_hermitian(H, herm_tol, "eigh input")
    values, vectors = np.linalg.eigh(0.5 * (H + H.conj().T))
    if eps_deg is None:
        eps_deg = default_deg_tol(values)
    groups, current = [], [0]
    for i in range(1, values.size):
        if values[i] - values[i - 1] < eps_deg:
            current.append(i)
        else:
            groups.append(current)
            current = [i]
    groups.append(current)
    return EigenSystem(values=values, vectors=vectors, groups=groups)


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    """0.5 * trace norm of (rho - sigma) for Hermitian inputs."""
    delta = rho - sigma
    delta = 0.5 * (delta + delta.conj().T)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(delta))))


def l1_coherence(rho: np.ndarray, basis: np.ndarray | None = None) -> float:
    """Sum of |off-diagonal| elements, optionally in the given eigenbasis columns."""
    r = rho if basis is None else basis.conj().T @ rho @ basis
    return float(np.sum(np.abs(r)) - np.sum(np.abs(np.diag(r))))


def check_density_matrix(rho: np.ndarray, floor: float = 1e-8, name: str = "state"):
    """Assert unit trace, Hermiticity and positivity within the stated floors."""
    tr = np.trace(rho)
    if abs(tr - 1.0) > TRACE_TOL * 100:
        raise ValueError(f"{name}: trace deviates from 1 by {abs(tr - 1.0):.3e}")
    require_hermitian(rho, 1e-8, name)
    w = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    if w[0] < -floor:
        raise ValueError(f"{name}: minimum eigenvalue {w[0]:.3e} below -{floor:.1e}")
