"""The two right-hand-side kernel backends must agree to rounding error."""

import numpy as np
import pytest

from otto_rc import kernels


def _random_args(rng, d, n_lind):
    c = lambda: rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = c()
    rho = rho + rho.conj().T
    W = c()
    A = c()
    A = 0.5 * (A + A.conj().T)
    B1, B2 = c(), c()
    Ls = np.stack([c() for _ in range(max(n_lind, 1))])
    cs = np.abs(rng.standard_normal(max(n_lind, 1)))
    K = sum(cs[i] * Ls[i].conj().T @ Ls[i] for i in range(n_lind)) if n_lind else np.zeros((d, d), complex)
    return rho, W, A, B1, B2, Ls, cs, np.asarray(K, complex)


@pytest.mark.parametrize("d,have_rc,n_lind", [
    (4, True, 0), (4, False, 2), (9, True, 2), (18, True, 4),
])
def test_numpy_backend_matches_reference_formula(rng, d, have_rc, n_lind):
    rho, W, A, B1, B2, Ls, cs, K = _random_args(rng, d, n_lind)
    got = kernels._rhs_numpy(rho, W, have_rc, A, B1, B2, n_lind, Ls, cs, K)
    want = W * rho
    if have_rc:
        S = B1 @ rho + rho @ B2
        want = want + (A @ S - S @ A)
    for i in range(n_lind):
        want = want + cs[i] * Ls[i] @ rho @ Ls[i].conj().T
    if n_lind:
        want = want - 0.5 * (K @ rho + rho @ K)
    assert np.allclose(got, want, atol=1e-12)


@pytest.mark.skipif(not kernels._HAVE_NUMBA, reason="numba backend unavailable")
@pytest.mark.parametrize("d,have_rc,n_lind", [
    (4, True, 0), (4, False, 2), (9, True, 2), (18, True, 4), (32, True, 2),
])
def test_numba_matches_numpy(rng, d, have_rc, n_lind):
    rho, W, A, B1, B2, Ls, cs, K = _random_args(rng, d, n_lind)
    a = kernels._rhs_numpy(rho, W, have_rc, A, B1, B2, n_lind, Ls, cs, K)
    b = kernels._rhs_numba(rho, W, have_rc, A, B1, B2, n_lind, Ls, cs, K)
    scale = max(np.max(np.abs(a)), 1.0)
    assert np.max(np.abs(a - b)) / scale < 1e-13


def test_backend_name_is_valid():
    assert kernels.backend_name() in ("numba", "numpy")
    # dispatch goes through the selected backend without error
    rho = np.eye(3, dtype=complex)
    W = np.zeros((3, 3), dtype=complex)
    out = kernels.apply_rhs(rho, W, False, W, W, W, 0, np.zeros((1, 3, 3), complex),
                            np.zeros(1), W)
    assert np.allclose(out, 0.0)
