"""Time evolution under a constant segment generator.

Three routes with different cost/size envelopes:

* `evolve` — adaptive Dormand-Prince 5(4) (or fixed RK4) acting on d x d
  matrices through the generator's kernel; the main path for large spaces.
* `ExpmPropagator` — materializes the d^2 x d^2 superoperator from the
  generator's operator blocks and exponentiates it once; exact for any
  duration, used when d is small enough (long isochores, sweeps).
* `evolve_oracle` — independent verification oracle: materializes the
  superoperator by applying the generator to every matrix unit (dimension
  guard <= 32) and applies the dense matrix exponential.

`stationary_state` solves G[rho] = 0 directly (dense LU on the vectorized
generator for small d, preconditioned GMRES on the matrix-free action
otherwise), falling back to long evolution only if the solve fails.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from .generators import Generator

ORACLE_DIM_CAP = 32


class PropagationError(RuntimeError):
    """Step-size underflow or state-validity violation during evolution."""


@dataclass(frozen=True)
class IntegratorSettings:
    method: str = "dp45"  # adaptive embedded RK (default) or "rk4"
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    max_step: float | None = None  # None -> 0.05 / spectral scale of the generator
    min_step: float | None = None
    hermitize_every: int = 100
    positivity_floor: float = 1e-6

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.method not in ("dp45", "rk4"):
            raise ValueError("method must be 'dp45' or 'rk4'")
        if self.max_step is not None and self.min_step is not None:
            if not (self.min_step < self.max_step):
                raise ValueError("min_step must be below max_step")


# Dormand-Prince 5(4) tableau
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)


def _default_max_step(G: Generator, t: float) -> float:
    scale = G.spectral_scale
    return min(t, 0.05 / scale) if scale > 0 else t


def _finalize(G: Generator, rho_e: np.ndarray, settings: IntegratorSettings) -> np.ndarray:
    rho = G.from_frame(0.5 * (rho_e + rho_e.conj().T))
    tr = np.trace(rho).real
    if abs(tr - 1.0) > 1e-6:
        raise PropagationError(f"trace drifted to {tr!r} during evolution")
    wmin = float(np.linalg.eigvalsh(rho)[0])
    if wmin < -settings.positivity_floor:
        raise PropagationError(
            f"positivity violated: min eigenvalue {wmin:.3e} "
            f"below floor -{settings.positivity_floor:.1e}"
        )
    return rho


def evolve(
    rho0: np.ndarray,
    G: Generator,
    t: float,
    settings: IntegratorSettings | None = None,
) -> np.ndarray:
    """Propagate rho0 for duration t under the constant generator G."""
    if settings is None:
        settings = IntegratorSettings()
    if t < 0:
        raise ValueError("duration must be nonnegative")
    if t == 0:
        return rho0.copy()
    rho = G.to_frame(rho0.astype(complex))
    max_step = settings.max_step or _default_max_step(G, t)
    min_step = settings.min_step or max(1e-14, t * 1e-13)

    if settings.method == "rk4":
        n = max(1, int(math.ceil(t / max_step)))
        h = t / n
        for i in range(n):
            k1 = G.apply_eigen(rho)
            k2 = G.apply_eigen(rho + 0.5 * h * k1)
            k3 = G.apply_eigen(rho + 0.5 * h * k2)
            k4 = G.apply_eigen(rho + h * k3)
            rho = rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if (i + 1) % settings.hermitize_every == 0:
                rho = 0.5 * (rho + rho.conj().T)
        return _finalize(G, rho, settings)

    # adaptive Dormand-Prince with FSAL
    time = 0.0
    h = max_step
    k0 = G.apply_eigen(rho)
    steps = 0
    while time < t:
        h = min(h, t - time, max_step)
        if h < min_step:
            raise PropagationError(
                f"step size underflow (h={h:.3e}) at t={time:.6g}; generator too stiff"
            )
        ks = [k0]
        for s in range(1, 7):
            y = rho
            for a, k in zip(_DP_A[s], ks):
                y = y + (h * a) * k
            ks.append(G.apply_eigen(y))
        y5 = rho
        for b, k in zip(_DP_B5, ks):
            if b:
                y5 = y5 + (h * b) * k
        err = np.zeros_like(rho)
        for b5, b4, k in zip(_DP_B5, _DP_B4, ks):
            err = err + (h * (b5 - b4)) * k
        scale = settings.abs_tol + settings.rel_tol * max(
            np.max(np.abs(rho)), np.max(np.abs(y5))
        )
        enorm = np.max(np.abs(err)) / scale
        if enorm <= 1.0:
            time += h
            rho = y5
            k0 = ks[6]  # FSAL: last stage equals the first stage of the next step
            steps += 1
            if steps % settings.hermitize_every == 0:
                rho = 0.5 * (rho + rho.conj().T)
                k0 = G.apply_eigen(rho)
        factor = 0.9 * enorm ** -0.2 if enorm > 0 else 5.0
        h *= min(5.0, max(0.2, factor))
    return _finalize(G, rho, settings)


# --- materialized superoperators -----------------------------------------


def _vec(rho: np.ndarray) -> np.ndarray:
    return rho.reshape(-1)  # row-major: vec(X rho Y) = kron(X, Y.T) vec(rho)


def _unvec(v: np.ndarray, d: int) -> np.ndarray:
    return v.reshape(d, d)


def materialize_superoperator(G: Generator) -> np.ndarray:
    """d^2 x d^2 matrix of G in its frame basis, built from the operator blocks."""
    d = G.dim
    eye = np.eye(d, dtype=complex)
    S = np.diag(_vec(G.W)).astype(complex)
    if G.have_rc:
        A, B1, B2 = G.A, G.B1, G.B2
        S += (
            np.kron(A @ B1, eye)
            + np.kron(A, B2.T)
            - np.kron(B1, A.T)
            - np.kron(eye, (B2 @ A).T)
        )
    if G.Ls is not None and len(G.Ls):
        for c, L in zip(G.cs, G.Ls):
            S += c * np.kron(L, L.conj())
        S -= 0.5 * (np.kron(G.K, eye) + np.kron(eye, G.K.T))
    return S


def materialize_superoperator_bruteforce(G: Generator) -> np.ndarray:
    """Lab-basis superoperator built by applying G to every matrix unit."""
    d = G.dim
    S = np.empty((d * d, d * d), dtype=complex)
    unit = np.zeros((d, d), dtype=complex)
    for i in range(d):
        for j in range(d):
            unit[i, j] = 1.0
            S[:, i * d + j] = _vec(G.apply(unit))
            unit[i, j] = 0.0
    return S


class ExpmPropagator:
    """Exact finite-time propagator exp(G t) for one segment, cached per duration."""

    def __init__(self, G: Generator):
        self.G = G
        self.S = materialize_superoperator(G)
        self._cache: dict = {}

    def matrix(self, t: float) -> np.ndarray:
        U = self._cache.get(t)
        if U is None:
            U = scipy.linalg.expm(self.S * t)
            self._cache[t] = U
        return U

    def propagate(self, rho: np.ndarray, t: float) -> np.ndarray:
        rho_e = self.G.to_frame(rho.astype(complex))
        out = _unvec(self.matrix(t) @ _vec(rho_e), self.G.dim)
        out = 0.5 * (out + out.conj().T)
        return self.G.from_frame(out)


def evolve_oracle(rho0: np.ndarray, G: Generator, t: float) -> np.ndarray:
    """Exact-exponential oracle via matrix-unit materialization (small spaces only)."""
    d = G.dim
    if d > ORACLE_DIM_CAP:
        raise ValueError(f"oracle dimension guard exceeded: {d} > {ORACLE_DIM_CAP}")
    S = materialize_superoperator_bruteforce(G)
    out = _unvec(scipy.linalg.expm(S * t) @ _vec(rho0.astype(complex)), d)
    return 0.5 * (out + out.conj().T)


# --- stationary states ----------------------------------------------------


def _superop_diagonal(G: Generator) -> np.ndarray:
    """Exact diagonal of the frame-basis superoperator, as a (d, d) matrix."""
    d = G.dim
    diag = G.W.copy()
    if G.have_rc:
        A, B1, B2 = G.A, G.B1, G.B2
        ab1 = np.diag(A @ B1)
        b2a = np.diag(B2 @ A)
        a_d = np.diag(A)
        diag += (
            ab1[:, None]
            + np.outer(a_d, np.diag(B2))
            - np.outer(np.diag(B1), a_d)
            - b2a[None, :]
        )
    if G.Ls is not None and len(G.Ls):
        for c, L in zip(G.cs, G.Ls):
            ld = np.diag(L)
            diag += c * np.outer(ld, ld.conj())
        kd = np.diag(G.K)
        diag -= 0.5 * (kd[:, None] + kd[None, :])
    return diag


def _stationary_direct(G: Generator) -> np.ndarray:
    d = G.dim
    S = materialize_superoperator(G)
    tau = _vec(np.eye(d, dtype=complex) / d)
    tr_row = _vec(np.eye(d, dtype=complex)).conj()
    B = S + np.outer(tau, tr_row)
    x = scipy.linalg.solve(B, tau)
    return _unvec(x, d)


def _stationary_gmres(G: Generator, seed_e: np.ndarray, tol: float) -> np.ndarray:
    d = G.dim
    tau = _vec(np.eye(d, dtype=complex) / d)

    def matvec(x):
        rho = _unvec(x, d)
        out = G.apply_eigen(np.ascontiguousarray(rho)) + np.trace(rho) * _unvec(tau, d)
        return _vec(out)

    diag = _vec(_superop_diagonal(G)) + tau  # crude trace-shift on the diagonal
    diag = np.where(np.abs(diag) < 1e-12, 1.0, diag)
    op = scipy.sparse.linalg.LinearOperator((d * d, d * d), matvec=matvec, dtype=complex)
    M = scipy.sparse.linalg.LinearOperator(
        (d * d, d * d), matvec=lambda x: x / diag, dtype=complex
    )
    # GCROT recycles its Krylov subspace across restarts, which avoids the
    # stagnation plain restarted GMRES hits on the slow dissipative modes.
    x, info = scipy.sparse.linalg.gcrotmk(
        op, tau, x0=_vec(seed_e.astype(complex)), M=M, rtol=tol, atol=0.0,
        maxiter=2000, m=50,
    )
    if info != 0:
        warnings.warn(
            f"stationary-state Krylov solve stopped after {info} iterations; "
            "returning best iterate (check the reported residual)"
        )
    return _unvec(x, d)


def stationary_state(
    G: Generator,
    seed: np.ndarray | None = None,
    tol: float = 1e-10,
    direct_dim_cap: int = 64,
) -> tuple:
    """Fixed point of G with unit trace; returns (rho, residual_max)."""
    d = G.dim
    if d <= direct_dim_cap:
        rho_e = _stationary_direct(G)
    else:
        if seed is None:
            raise ValueError("large-dimension stationary solve needs a seed state")
        rho_e = _stationary_gmres(G, G.to_frame(seed), max(tol, 1e-12))
    rho_e = 0.5 * (rho_e + rho_e.conj().T)
    rho_e = rho_e / np.trace(rho_e).real
    residual = float(np.max(np.abs(G.apply_eigen(np.ascontiguousarray(rho_e)))))
    if residual > max(tol * 100, 1e-8):
        warnings.warn(f"stationary state residual {residual:.3e} above target {tol:.1e}")
    return G.from_frame(rho_e), residual
