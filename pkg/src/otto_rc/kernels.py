"""Hot numeric kernels for applying a master-equation generator.

Two interchangeable implementations of the right-hand side

    out = W o rho                                   (elementwise: unitary + dephasing)
        + [A, B1 rho + rho B2]                      (RC dissipative part)
        + sum_i c_i L_i rho L_i^dag - 1/2 {K, rho}  (rethermalization)

where `o` is the elementwise product.  The numba version is selected by
default when numba imports; set OTTO_RC_KERNELS=numpy (or =numba) to force
a backend.  Both produce bitwise-comparable results to ~1 ulp; the
benchmark in benchmarks/bench_kernels.py compares their throughput.
"""

from __future__ import annotations

import os

import numpy as np

_requested = os.environ.get("OTTO_RC_KERNELS", "auto").lower()
if _requested not in ("auto", "numba", "numpy"):
    raise ValueError(f"OTTO_RC_KERNELS must be auto|numba|numpy, got {_requested!r}")


def _rhs_numpy(rho, W, have_rc, A, B1, B2, n_lind, Ls, cs, K):
    out = W * rho
    if have_rc:
        S = B1 @ rho + rho @ B2
        out += A @ S - S @ A
    if n_lind:
        for i in range(n_lind):
            L = Ls[i]
            out += cs[i] * (L @ rho @ L.conj().T)
        out -= 0.5 * (K @ rho + rho @ K)
    return out


_HAVE_NUMBA = False
if _requested in ("auto", "numba"):
    try:
        import numba

        @numba.njit(cache=True, fastmath=False)
        def _rhs_numba(rho, W, have_rc, A, B1, B2, n_lind, Ls, cs, K):  # pragma: no cover
            out = W * rho
            if have_rc:
                S = np.dot(B1, rho) + np.dot(rho, B2)
                out += np.dot(A, S) - np.dot(S, A)
            if n_lind:
                for i in range(n_lind):
                    L = np.ascontiguousarray(Ls[i])
                    out += cs[i] * np.dot(np.dot(L, rho), L.conj().T)
                out -= 0.5 * (np.dot(K, rho) + np.dot(rho, K))
            return out

        _HAVE_NUMBA = True
    except ImportError:
        if _requested == "numba":
            raise

if _HAVE_NUMBA:
    _rhs = _rhs_numba
    BACKEND = "numba"
else:
    _rhs = _rhs_numpy
    BACKEND = "numpy"


def backend_name() -> str:
    return BACKEND


def apply_rhs(rho, W, have_rc, A, B1, B2, n_lind, Ls, cs, K):
    """Apply the generator right-hand side to a d x d complex matrix."""
    return _rhs(rho, W, have_rc, A, B1, B2, n_lind, Ls, cs, K)
