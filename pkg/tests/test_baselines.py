import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from krauskge.baselines import (
    boost,
    channel_from_distmult,
    channel_from_golde,
    channel_from_rescal,
    channel_from_rotate,
    complex_block,
    complex_score,
    embed_complex,
    random_orthogonal,
    rescal_score,
    score_equivalence,
    verify_single_operator_bottleneck,
)
from krauskge.channels import Geometry, completeness_residual
from krauskge.errors import InvalidSign, NotOrthogonal, NotWOrthogonal, UnknownModel
from krauskge.training import score


def test_rescal_examples(rng):
    h = np.array([0.6, 0.8, 0.0])
    assert score(h, channel_from_rescal(np.eye(3)), h) == pytest.approx(1.0)
    for _ in range(20):
        M = random_orthogonal(rng, 5)
        h, t = rng.standard_normal(5), rng.standard_normal(5)
        h, t = h / np.linalg.norm(h), t / np.linalg.norm(t)
        assert abs(score(h, channel_from_rescal(M), t) - rescal_score(h, M, t)) <= 1e-12
    with pytest.raises(NotOrthogonal):
        channel_from_rescal(np.diag([1.0, 2.0]))


def test_distmult_examples():
    assert np.array_equal(channel_from_distmult([1, 1, 1]).ops[0], np.eye(3))
    h = t = np.array([1.0, 1.0]) / np.sqrt(2)
    assert score(h, channel_from_distmult([1, -1]), t) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(InvalidSign):
        channel_from_distmult([1.0, 0.5])


def test_rotate_examples():
    assert np.array_equal(channel_from_rotate(np.zeros(3)).ops[0], np.eye(6))
    K = channel_from_rotate([np.pi / 2]).ops[0]
    assert np.allclose(K, [[0, -1], [1, 0]])
    # multiplying 1 + 0i by i gives 0 + 1i
    assert np.allclose(K @ embed_complex([1.0]), embed_complex([1j]))
    assert completeness_residual(channel_from_rotate(np.linspace(0, 6, 5))) <= 1e-12


def test_rotate_matches_complex_arithmetic(rng):
    for _ in range(50):
        theta = rng.uniform(-np.pi, np.pi, 4)
        h = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        t = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        h, t = h / np.linalg.norm(h), t / np.linalg.norm(t)
        ch = channel_from_rotate(theta)
        ref = complex_score(h, np.exp(1j * theta), t)
        assert abs(score(embed_complex(h), ch, embed_complex(t)) - ref) <= 1e-12


def test_complex_block_is_multiplication(rng):
    r = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    z = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    assert np.allclose(complex_block(r) @ embed_complex(z), embed_complex(r * z))


def test_golde_examples(rng):
    channel_from_golde(random_orthogonal(rng, 4), Geometry.euclidean(4))
    ch = channel_from_golde(boost(0.7), Geometry.hyperbolic(2))
    assert completeness_residual(ch) <= 1e-12
    with pytest.raises(NotWOrthogonal):
        channel_from_golde(np.diag([2.0, 1.0]), Geometry.hyperbolic(2))


def test_transe_refused():
    with pytest.raises(UnknownModel, match="affine"):
        score_equivalence("transe")
    with pytest.raises(UnknownModel):
        score_equivalence("complex-ish")


@pytest.mark.parametrize("model", ["rescal", "distmult", "rotate", "golde"])
def test_equivalence_small(model):
    rep = score_equivalence(model, trials=60, seed=1)
    assert rep.max_deviation <= 1e-10 and rep.max_residual <= 1e-8


def test_bottleneck_examples(rng):
    for seed in range(100):
        r = np.random.default_rng(seed)
        X = r.standard_normal((5, 2))
        X /= np.linalg.norm(X, axis=1, keepdims=True)
        K = random_orthogonal(r, 2)
        assert verify_single_operator_bottleneck(K, X, X).bilinear_rank <= 2
    assert verify_single_operator_bottleneck(np.zeros((3, 3)), np.eye(3), np.eye(3)).rank == 0
    rep = verify_single_operator_bottleneck(np.eye(4), np.eye(4), np.eye(4))
    assert rep.rank == 4 and rep.bilinear_rank == 4


@given(st.integers(2, 6), st.integers(0, 2 ** 31 - 1))
def test_squared_rank_within_symmetric_bound(d, seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((3 * d, d))
    Y = rng.standard_normal((3 * d, d))
    rep = verify_single_operator_bottleneck(random_orthogonal(rng, d), X, Y)
    assert rep.bilinear_rank <= d
    assert rep.rank <= d * (d + 1) // 2
