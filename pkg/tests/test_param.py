import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from krauskge.channels import Geometry, KrausChannel, completeness_residual, identity_channel
from krauskge.errors import KappaMismatch, NearSingular, NonPositiveWeight, ShapeMismatch
from krauskge.param import (
    EntityParam,
    SkewParam,
    adaptive_rank,
    cayley_residual,
    cayley_stiefel,
    elliptic_channel,
    init_entity,
    init_relation,
    lorentz_cayley,
    lower_mask,
    product_channel,
    relation_channel,
    skew_adjoint,
    skew_materialize,
    unstack,
    w_skew,
)
from krauskge.properties import random_channel


def test_skew_examples(rng):
    assert np.array_equal(skew_materialize(SkewParam.zeros(4)), np.zeros((4, 4)))
    p = SkewParam([2.0, 0.0, 0.0], 3)
    A = skew_materialize(p)
    assert A[1, 0] == 1.0 and A[0, 1] == -1.0
    A = skew_materialize(SkewParam(rng.standard_normal(15), 6))
    assert np.max(np.abs(A + A.T)) == 0.0


def test_skew_adjoint_is_pullback(rng):
    n = 5
    free = rng.standard_normal(n * (n - 1) // 2)
    G = rng.standard_normal((n, n))
    # <G, A(free)> is linear in free with gradient skew_adjoint(G)
    f = lambda x: np.sum(G * skew_materialize(SkewParam(x, n)))
    num = np.array([(f(free + 1e-6 * e) - f(free - 1e-6 * e)) / 2e-6 for e in np.eye(free.size)])
    assert np.allclose(skew_adjoint(G), num, atol=1e-8)


def test_skew_param_size_checked():
    with pytest.raises(ShapeMismatch):
        SkewParam(np.zeros(4), 3)


def test_cayley_zero_is_identity_block():
    U = cayley_stiefel(np.zeros((8, 8)), 4)
    assert np.array_equal(U, np.vstack([np.eye(4), np.zeros((4, 4))]))


def test_cayley_square_is_rotation(rng):
    A = skew_materialize(SkewParam(rng.standard_normal(10), 5))
    U = cayley_stiefel(A, 5)
    assert cayley_residual(U) <= 1e-12
    assert np.linalg.det(U) == pytest.approx(1.0)


def test_cayley_tall_orthonormal(rng):
    A = skew_materialize(SkewParam(rng.standard_normal(120), 16))
    assert cayley_residual(cayley_stiefel(A, 4)) <= 1e-11


def test_unstack_examples(rng):
    U = np.vstack([np.eye(3), np.zeros((3, 3))])
    ch = unstack(U, 2, 3)
    assert np.array_equal(ch.ops[0], np.eye(3)) and not ch.ops[1].any()
    A = skew_materialize(SkewParam(rng.standard_normal(66), 12))
    assert completeness_residual(unstack(cayley_stiefel(A, 4), 3, 4)) <= 1e-10
    with pytest.raises(ShapeMismatch):
        unstack(U, 3, 3)


def test_elliptic_examples(rng):
    base = random_channel(rng, 2, Geometry.euclidean(3))
    same = elliptic_channel(base, Geometry.elliptic(np.ones(3)))
    assert np.array_equal(same.ops, base.ops)
    ident = elliptic_channel(identity_channel(2), Geometry.elliptic([4.0, 1.0]))
    assert np.array_equal(ident.ops[0], np.eye(2))
    w = np.array([2.0, 0.5, 3.0, 1.0])
    ch = elliptic_channel(random_channel(rng, 3, Geometry.euclidean(4)), Geometry.elliptic(w))
    assert completeness_residual(ch) <= 1e-9
    with pytest.raises(NonPositiveWeight):
        elliptic_channel(base, np.array([1.0, -1.0, 1.0]))


def test_lorentz_examples(rng):
    g = Geometry.hyperbolic(2)
    ch = lorentz_cayley(np.zeros((2, 2)), g, 1, 2)
    assert np.array_equal(ch.ops[0], np.eye(2))
    S = np.array([[0.0, -0.1], [0.1, 0.0]])
    ch = lorentz_cayley(w_skew(S, g, 1), g, 1, 2)
    U = ch.ops[0]
    assert np.linalg.norm(U.T @ g.W @ U - g.W) <= 1e-10
    for seed in range(100):
        r = np.random.default_rng(seed)
        g = Geometry.hyperbolic(4)
        ch = relation_channel([init_relation(2, 4, 0.01, r)], g, 2)
        assert completeness_residual(ch) <= 1e-9


def test_lorentz_rejects_non_w_skew_and_singular():
    g = Geometry.hyperbolic(2)
    with pytest.raises(ValueError):
        lorentz_cayley(np.array([[0.0, -1.0], [1.0, 0.0]]), g, 1, 2)
    # A = W^{-1} S with S_21 = 1 has eigenvalues +-1, so I + A is singular
    S = np.array([[0.0, -1.0], [1.0, 0.0]])
    with pytest.raises(NearSingular):
        lorentz_cayley(w_skew(S, g, 1), g, 1, 2)


def test_product_examples(rng):
    ch = product_channel([(identity_channel(2), Geometry.euclidean(2)),
                          (identity_channel(3), Geometry.euclidean(3))])
    assert np.array_equal(ch.ops[0], np.eye(5)) and ch.geometry == Geometry.euclidean(5)
    ge = Geometry.elliptic([2.0, 0.5])
    mix = product_channel([(random_channel(rng, 2, Geometry.euclidean(3)), Geometry.euclidean(3)),
                           (random_channel(rng, 2, ge), ge)])
    assert np.array_equal(mix.geometry.w, [1, 1, 1, 2.0, 0.5])
    assert completeness_residual(mix) <= 1e-9
    one = random_channel(rng, 2, Geometry.euclidean(3))
    assert np.array_equal(product_channel([(one, Geometry.euclidean(3))]).ops, one.ops)
    with pytest.raises(KappaMismatch):
        product_channel([(identity_channel(2), Geometry.euclidean(2)),
                         (random_channel(rng, 2, Geometry.euclidean(2)), Geometry.euclidean(2))])


@pytest.mark.parametrize("deg, mean, k0, d, expected", [
    (10, 10.0, 8, 128, 8), (20, 10.0, 8, 128, 16), (1000, 10.0, 8, 64, 64),
    (0, 10.0, 8, 64, 1), (3, 10.0, 4, 64, 2),
])
def test_adaptive_rank(deg, mean, k0, d, expected):
    assert adaptive_rank(deg, mean, k0, d) == expected


def test_init_entity_contract():
    a = init_entity(6, 3, 42).factor
    assert np.array_equal(a, init_entity(6, 3, 42).factor)
    assert not a[~lower_mask(6, 3)].any()
    draws = np.concatenate([init_entity(8, 8, s).factor[lower_mask(8, 8)] for s in range(300)])
    assert abs(draws.var() - 1 / 8) <= 0.1 / 8
    with pytest.raises(ValueError):
        EntityParam(np.ones((3, 2)))


def test_init_relation_near_identity():
    p = init_relation(4, 32, 0.01, 7)
    assert np.array_equal(p.free, init_relation(4, 32, 0.01, 7).free)
    ch = relation_channel([p], Geometry.euclidean(32), 4)
    assert completeness_residual(ch) <= 1e-10
    U = ch.ops.reshape(128, 32)
    assert np.linalg.norm(U - np.vstack([np.eye(32), np.zeros((96, 32))])) < 1.0
    tiny = relation_channel([init_relation(2, 3, 1e-12, 0)], Geometry.euclidean(3), 2)
    assert np.allclose(tiny.ops[0], np.eye(3)) and np.allclose(tiny.ops[1], 0)


@given(st.integers(1, 4), st.integers(1, 6), st.floats(0.01, 20.0), st.integers(0, 2 ** 31 - 1))
def test_cayley_complete_at_any_scale(kappa, d, scale, seed):
    rng = np.random.default_rng(seed)
    ch = random_channel(rng, kappa, Geometry.euclidean(d), scale)
    assert completeness_residual(ch) <= 1e-10 * max(1.0, scale)


@given(st.integers(2, 6), st.integers(1, 3), st.integers(0, 2 ** 31 - 1))
def test_elliptic_w_complete(d, kappa, seed):
    rng = np.random.default_rng(seed)
    g = Geometry.elliptic(rng.uniform(0.1, 10.0, d))
    assert completeness_residual(random_channel(rng, kappa, g)) <= 1e-8
