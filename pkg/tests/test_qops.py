"""Operator algebra and Hilbert-space bookkeeping."""

import numpy as np
import pytest

from otto_rc import qops
from conftest import random_density, random_hermitian


def test_layout_dimensions():
    layout = qops.SpaceLayout(rc_levels=9)
    assert layout.dims == (2, 9, 9)
    assert layout.total_dim == 2 * 81
    assert layout.total_dim == np.prod(layout.dims)


def test_layout_rejects_tiny_truncation():
    with pytest.raises(ValueError):
        qops.SpaceLayout(rc_levels=1)


def test_pauli_algebra():
    sx, sz = qops.pauli("x"), qops.pauli("z")
    assert np.allclose(sx @ sx, np.eye(2))
    assert np.allclose(sz @ sz, np.eye(2))
    assert np.allclose(sx @ sz + sz @ sx, 0.0)
    assert np.isclose(np.trace(sx @ sz), 0.0)


def test_ladder_action():
    a = qops.lowering(3)
    # a|2> = sqrt(2)|1>, a|0> = 0
    assert np.isclose(a[1, 2], np.sqrt(2.0))
    assert np.allclose(a[:, 0], 0.0)
    n = a.conj().T @ a
    assert np.allclose(np.diag(n), [0.0, 1.0, 2.0])


def test_ladder_truncated_commutator():
    # [a, a^dag] = I - rc_levels |top><top| exactly on the truncated space
    for m in (2, 5, 9):
        layout = qops.SpaceLayout(rc_levels=m)
        a, ad = qops.build_ladder(layout, "h")
        comm = a @ ad - ad @ a
        want = qops.tensor_embed(
            np.eye(m) - m * np.diag(np.eye(m)[-1]), layout, qops.SLOT_RC_H
        )
        assert np.allclose(comm, want, atol=1e-12)


def test_embed_identity_and_trace(rng):
    layout = qops.SpaceLayout(rc_levels=3)
    assert np.allclose(
        qops.tensor_embed(np.eye(3), layout, qops.SLOT_RC_C), np.eye(18)
    )
    op = random_hermitian(rng, 3)
    emb = qops.tensor_embed(op, layout, qops.SLOT_RC_H)
    # trace multiplicativity: tr(embedded) = tr(op) * (product of other dims)
    assert np.isclose(np.trace(emb), np.trace(op) * 2 * 3)


def test_embed_slot_mismatch():
    layout = qops.SpaceLayout(rc_levels=3)
    with pytest.raises(ValueError):
        qops.tensor_embed(np.eye(4), layout, qops.SLOT_RC_H)


def test_partial_trace_product_state(rng):
    dims = (2, 3, 3)
    parts = [random_density(rng, d) for d in dims]
    rho = np.kron(np.kron(parts[0], parts[1]), parts[2])
    for keep in range(3):
        got = qops.partial_trace(rho, dims, [keep])
        assert np.allclose(got, parts[keep], atol=1e-12)


def test_partial_trace_maximally_mixed():
    dims = (2, 4, 4)
    rho = np.eye(32) / 32.0
    got = qops.partial_trace(rho, dims, [qops.SLOT_RC_H])
    assert np.allclose(got, np.eye(4) / 4.0)


def test_partial_trace_keep_all(rng):
    dims = (2, 3, 3)
    rho = random_density(rng, 18)
    assert np.allclose(qops.partial_trace(rho, dims, [0, 1, 2]), rho)


def test_partial_trace_empty_keep(rng):
    with pytest.raises(ValueError):
        qops.partial_trace(random_density(rng, 18), (2, 3, 3), [])


def test_partial_trace_preserves_trace_and_positivity(rng):
    dims = (2, 3, 4)
    for _ in range(10):
        rho = random_density(rng, 24)
        red = qops.partial_trace(rho, dims, [1])
        assert np.isclose(np.trace(red).real, 1.0)
        assert np.linalg.eigvalsh(red).min() >= -1e-12


def test_embed_round_trip(rng):
    layout = qops.SpaceLayout(rc_levels=3)
    sz = qops.build_pauli(layout, "z")
    rho_tls = random_density(rng, 2)
    rho = np.kron(rho_tls, np.eye(9) / 9.0)
    back = qops.partial_trace(rho, layout.dims, [qops.SLOT_TLS])
    assert np.isclose(np.trace(sz @ rho).real, np.trace(qops.pauli("z") @ back).real)


def test_eigh_round_trip(rng):
    for d in (2, 7, 18):
        H = random_hermitian(rng, d)
        es = qops.eigh(H)
        rebuilt = es.vectors @ np.diag(es.values) @ es.vectors.conj().T
        assert np.max(np.abs(rebuilt - H)) <= 1e-10


def test_eigh_degeneracy_groups():
    H = np.diag([0.0, 0.0, 1.0, 1.0 + 1e-12, 2.0])
    es = qops.eigh(H, eps_deg=1e-9)
    # three distinct levels -> three groups, sizes 2, 2, 1
    sizes = sorted(len(g) for g in es.groups)
    assert len(es.groups) == 3
    assert sizes == [1, 2, 2]
    mask = es.group_mask()
    assert mask[0, 1] and mask[2, 3] and not mask[0, 2]


def test_eigen_frame_round_trip(rng):
    H = random_hermitian(rng, 6)
    es = qops.eigh(H)
    op = random_hermitian(rng, 6)
    assert np.allclose(es.from_eigen(es.to_eigen(op)), op, atol=1e-12)


def test_trace_distance_properties(rng):
    rho = random_density(rng, 6)
    sigma = random_density(rng, 6)
    assert qops.trace_distance(rho, rho) <= 1e-14
    d = qops.trace_distance(rho, sigma)
    assert 0.0 <= d <= 1.0 + 1e-12
    assert np.isclose(d, qops.trace_distance(sigma, rho))


def test_l1_coherence_diagonal_state():
    rho = np.diag([0.5, 0.3, 0.2]).astype(complex)
    assert qops.l1_coherence(rho) <= 1e-15
    # a basis rotation exposes coherence
    theta = 0.3
    U = np.array([
        [np.cos(theta), -np.sin(theta), 0],
        [np.sin(theta), np.cos(theta), 0],
        [0, 0, 1],
    ])
    assert qops.l1_coherence(rho, U) > 1e-3


def test_check_density_matrix(rng):
    rho = random_density(rng, 4)
    qops.check_density_matrix(rho)
    with pytest.raises(ValueError):
        qops.check_density_matrix(rho * 2.0)
    bad = rho.copy()
    bad[0, 1] += 0.5
    with pytest.raises(ValueError):
        qops.check_density_matrix(bad)
