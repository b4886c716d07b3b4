import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from krauskge.channels import (
    ChoiMatrix,
    DensityMatrix,
    Geometry,
    KrausChannel,
    act,
    apply_channel,
    choi_matrix,
    completeness_residual,
    compose,
    compose_path,
    density_from_factor,
    effective_rank,
    hs_overlap,
    identity_channel,
    kraus_from_choi,
    spectral_norms,
    w_trace,
)
from krauskge.errors import (
    DimensionMismatch,
    GeometryMismatch,
    IncompleteChannel,
    KappaOverflow,
    NotPSD,
    UnsupportedGeometry,
    ZeroFactor,
)
from krauskge.properties import random_channel, random_density


def brute_apply(ops, rho):
    kappa, d, _ = ops.shape
    out = np.zeros((d, d))
    for i in range(kappa):
        for p in range(d):
            for s in range(d):
                for q in range(d):
                    for r in range(d):
                        out[p, s] += ops[i, p, q] * rho[q, r] * ops[i, s, r]
    return out


# densities

def test_density_from_basis_column():
    rho = density_from_factor(np.eye(3)[:, :1])
    assert np.array_equal(rho.mat, np.diag([1.0, 0, 0]))
    assert rho.trace() == 1.0


def test_density_from_identity_is_maximally_mixed():
    rho = density_from_factor(np.eye(2))
    assert np.allclose(np.linalg.eigvalsh(rho.mat), [0.5, 0.5])


def test_density_random_factor_against_eigensolver(rng):
    L = rng.standard_normal((4, 2))
    rho = density_from_factor(L)
    ev = np.linalg.eigvalsh(L @ L.T) / np.sum(L * L)
    assert np.allclose(np.linalg.eigvalsh(rho.mat), ev, atol=1e-14)
    assert np.linalg.matrix_rank(rho.mat) == 2
    assert abs(rho.trace() - 1.0) < 1e-14


def test_zero_factor_rejected():
    with pytest.raises(ZeroFactor):
        density_from_factor(np.zeros((3, 2)))


def test_density_validation():
    with pytest.raises(ValueError):
        DensityMatrix(np.array([[1.0, 0.1], [0.0, 0.0]]))
    with pytest.raises(NotPSD):
        DensityMatrix(np.diag([1.0, -0.5]))
    with pytest.raises(ValueError):
        DensityMatrix(np.diag([1.0, 0.5]))


# channel action

def test_identity_channel_leaves_density_unchanged(rng):
    rho = random_density(rng, 4)
    assert np.allclose(apply_channel(identity_channel(4), rho).mat, rho, atol=1e-15)


def test_split_identity_channel():
    ops = np.stack([np.eye(3), np.eye(3)]) / np.sqrt(2)
    rho = np.diag([0.2, 0.3, 0.5])
    assert np.allclose(apply_channel(KrausChannel(ops), rho).mat, rho)


def test_apply_matches_brute_force_loop(rng):
    ch = random_channel(rng, 2, Geometry.euclidean(4))
    rho = np.eye(4) / 4
    out = apply_channel(ch, rho).mat
    assert abs(np.trace(out) - 1.0) <= 1e-10
    assert np.allclose(out, brute_apply(ch.ops, rho), atol=1e-13)


def test_apply_rejects_incomplete_and_mismatched():
    with pytest.raises(IncompleteChannel):
        apply_channel(KrausChannel(2 * np.eye(2)[None]), np.eye(2) / 2)
    with pytest.raises(DimensionMismatch):
        apply_channel(identity_channel(3), np.eye(2) / 2)


# completeness

def test_completeness_residual_examples():
    assert completeness_residual(identity_channel(3)) == 0.0
    assert completeness_residual(KrausChannel(2 * np.eye(2)[None])) == pytest.approx(3 * np.sqrt(2))


def test_cayley_channel_is_complete(rng):
    assert completeness_residual(random_channel(rng, 3, Geometry.euclidean(5))) <= 1e-10


# composition

def test_compose_identities():
    ch = compose(identity_channel(3), identity_channel(3))
    assert ch.kappa == 1 and np.array_equal(ch.ops[0], np.eye(3))


def test_compose_order_is_row_major(rng):
    a = random_channel(rng, 2, Geometry.euclidean(3))
    b = random_channel(rng, 3, Geometry.euclidean(3))
    ab = compose(a, b)
    assert ab.kappa == 6
    for i in range(2):
        for j in range(3):
            assert np.allclose(ab.ops[3 * i + j], b.ops[j] @ a.ops[i])


def test_compose_matches_sequential(rng):
    a = random_channel(rng, 2, Geometry.euclidean(4))
    b = random_channel(rng, 2, Geometry.euclidean(4))
    ab = compose(a, b)
    for _ in range(5):
        rho = random_density(rng, 4)
        seq = apply_channel(b, apply_channel(a, rho)).mat
        assert np.max(np.abs(apply_channel(ab, rho).mat - seq)) <= 1e-10


def test_compose_path_examples(rng):
    ch = compose_path([identity_channel(2)] * 3)
    assert ch.kappa == 1 and np.array_equal(ch.ops[0], np.eye(2))
    chain = [random_channel(rng, 2, Geometry.euclidean(3)) for _ in range(3)]
    comp = compose_path(chain)
    assert comp.kappa == 8
    rho = random_density(rng, 3)
    seq = rho
    for c in chain:
        seq = act(c.ops, seq)
    assert np.max(np.abs(act(comp.ops, rho) - seq)) <= 1e-9


def test_compose_path_cap_and_mismatch(rng):
    chain = [random_channel(rng, 4, Geometry.euclidean(2)) for _ in range(3)]
    with pytest.raises(KappaOverflow):
        compose_path(chain, max_kappa=32)
    with pytest.raises(DimensionMismatch):
        compose(identity_channel(2), identity_channel(3))
    with pytest.raises(GeometryMismatch):
        compose(identity_channel(2), identity_channel(2, Geometry.hyperbolic(2)))


# Choi

def test_choi_of_identity():
    C = choi_matrix(identity_channel(2))
    v = np.eye(2).ravel()
    assert np.array_equal(C.mat, np.outer(v, v))
    assert np.trace(C.mat) == 2.0
    assert np.linalg.matrix_rank(C.mat) == 1


def test_choi_blocks_are_channel_images(rng):
    ch = random_channel(rng, 2, Geometry.euclidean(3))
    C = choi_matrix(ch).mat
    for a in range(3):
        for b in range(3):
            E = np.zeros((3, 3))
            E[a, b] = 1.0
            assert np.allclose(C[3 * a:3 * a + 3, 3 * b:3 * b + 3], act(ch.ops, E))


def test_choi_rank_single_and_three_operators(rng):
    C = choi_matrix(KrausChannel(np.diag([1.0, -1.0])[None]))
    assert np.linalg.matrix_rank(C.mat) == 1
    ch = random_channel(rng, 3, Geometry.euclidean(4))
    s = np.linalg.svd(choi_matrix(ch).mat, compute_uv=False)
    assert int(np.sum(s > 1e-8 * s[0])) == 3


def test_choi_requires_euclidean():
    with pytest.raises(UnsupportedGeometry):
        choi_matrix(identity_channel(2, Geometry.hyperbolic(2)))


def test_kraus_from_choi_identity_sign():
    ch = kraus_from_choi(choi_matrix(identity_channel(3)))
    assert ch.kappa == 1
    assert np.allclose(ch.ops[0], np.eye(3))


def test_kraus_from_choi_round_trip(rng):
    ch = random_channel(rng, 2, Geometry.euclidean(3))
    C = choi_matrix(ch)
    back = kraus_from_choi(C)
    assert back.kappa == 2
    assert np.linalg.norm(choi_matrix(back).mat - C.mat) <= 1e-9
    rho = random_density(rng, 3)
    assert np.allclose(act(back.ops, rho), act(ch.ops, rho), atol=1e-12)


def test_kraus_from_rank_deficient_choi():
    ops = np.zeros((2, 4, 4))
    ops[0, :2, :2] = np.eye(2)
    ops[1, 2:, 2:] = np.eye(2)
    assert kraus_from_choi(choi_matrix(KrausChannel(ops))).kappa == 2


def test_kraus_from_choi_rejects_indefinite():
    with pytest.raises(NotPSD):
        kraus_from_choi(ChoiMatrix(-np.eye(4), 2))


# spectra

@pytest.mark.parametrize("sigma, energy, expected", [
    ((1.0, 0.0, 0.0, 0.0), 0.99, 1),
    ((1.0, 1.0, 1.0, 1.0), 0.99, 4),
    ((10.0, 1.0, 0.1), 0.99, 1),
    ((3.0, 2.0, 1.0), 0.9, 2),
])
def test_effective_rank_examples(sigma, energy, expected):
    assert effective_rank(np.diag(sigma), energy) == expected


def test_spectral_norms_examples(rng):
    assert spectral_norms(identity_channel(3)) == [1.0]
    ops = np.stack([np.eye(2), np.eye(2)]) / np.sqrt(2)
    assert np.allclose(spectral_norms(KrausChannel(ops)), [2 ** -0.5] * 2)
    norms = spectral_norms(random_channel(rng, 4, Geometry.euclidean(8)))
    assert all(0 < x <= 1 + 1e-8 for x in norms)


def test_w_trace_examples():
    assert w_trace(np.diag([0.3, 0.7]), Geometry.euclidean(2)) == pytest.approx(1.0)
    assert w_trace(np.eye(2) / 2, Geometry.hyperbolic(2)) == 0.0
    assert w_trace(np.diag([0.4, 0.6]), Geometry.elliptic([2.0, 3.0])) == pytest.approx(2.6)


def test_hs_overlap_examples():
    e1, e2 = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
    assert hs_overlap(e1, e1) == 1.0
    assert hs_overlap(e1, e2) == 0.0
    assert hs_overlap(np.eye(2) / 2, e1) == 0.5


# properties

dims = st.integers(2, 6)
kappas = st.integers(1, 4)
seeds = st.integers(0, 2 ** 31 - 1)


@given(dims, kappas, seeds)
def test_trace_and_positivity_preserved(d, kappa, seed):
    rng = np.random.default_rng(seed)
    ch = random_channel(rng, kappa, Geometry.euclidean(d))
    rho = random_density(rng, d, trace=rng.uniform(0.05, 1.0))
    out = apply_channel(ch, rho).mat
    assert abs(np.trace(out) - np.trace(rho)) <= 1e-8
    assert np.linalg.eigvalsh(out).min() >= -1e-8


@given(dims, kappas, kappas, seeds)
def test_composition_closed(d, k1, k2, seed):
    rng = np.random.default_rng(seed)
    a = random_channel(rng, k1, Geometry.euclidean(d))
    b = random_channel(rng, k2, Geometry.euclidean(d))
    assert completeness_residual(compose(a, b)) <= 1e-8


@given(dims, kappas, seeds)
def test_choi_is_psd_with_trace_d(d, kappa, seed):
    rng = np.random.default_rng(seed)
    C = choi_matrix(random_channel(rng, kappa, Geometry.euclidean(d))).mat
    assert np.linalg.eigvalsh(C).min() >= -1e-10
    # trace of the Choi matrix is sum ||K_i||_F^2 = Tr[sum K_i^T K_i] = d
    assert np.trace(C) == pytest.approx(d)


@given(dims, kappas, seeds)
def test_effective_rank_bounded_by_kappa(d, kappa, seed):
    rng = np.random.default_rng(seed)
    C = choi_matrix(random_channel(rng, kappa, Geometry.euclidean(d)))
    assert 1 <= effective_rank(C) <= min(kappa, d * d)
