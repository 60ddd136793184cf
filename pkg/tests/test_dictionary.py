import numpy as np
import pytest

from gada.attacks import make_image_space
from gada.dictionary import FULL, RANDOM_FETCH, SINGLE_SLOT, Dictionary, scale_until_adversarial
from gada.errors import InvalidArgument
from fakes import FuncOracle, always
from oracles import brute_nearest


def _unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


def _basis(i, d=8):
    e = np.zeros(d)
    e[i] = 1.0
    return e


def test_store_counts():
    d = Dictionary(FULL)
    d.store(_basis(0), np.ones(3))
    assert len(d) == 1
    s = Dictionary(SINGLE_SLOT)
    s.store(_basis(0), np.ones(3))
    s.store(_basis(1), np.full(3, 2.0))
    assert len(s) == 1 and s.entries[0].perturbation[0] == 2.0


def test_duplicate_key_replaces():
    d = Dictionary(FULL)
    d.store(_basis(0), np.ones(3))
    d.store(_basis(1), np.ones(3))
    d.store(_basis(0), np.zeros(3))
    assert len(d) == 2
    assert d.entries[0].perturbation.sum() == 0


def test_fetch_nearest_example():
    d = Dictionary(FULL)
    for i in range(3):
        d.store(_basis(i), np.full(2, float(i)))
    q = _unit([0.9, 0.1, 0, 0, 0, 0, 0, 0])
    assert d.fetch(q).key[0] == 1.0


def test_fetch_empty():
    for policy in (FULL, SINGLE_SLOT, RANDOM_FETCH):
        assert Dictionary(policy).fetch(_basis(0)) is None


def test_fetch_matches_brute_force():
    rng = np.random.default_rng(0)
    for _ in range(100):
        n = int(rng.integers(1, 30))
        keys = [_unit(rng.standard_normal(16)) for _ in range(n)]
        d = Dictionary(FULL)
        for j, k in enumerate(keys):
            d.store(k, np.array([float(j)]))
        q = _unit(rng.standard_normal(16))
        assert int(d.fetch(q).perturbation[0]) == brute_nearest(keys, q)


def test_fetch_ties_keep_first():
    d = Dictionary(FULL)
    d.store(_basis(0), np.array([0.0]))
    d.store(_basis(1), np.array([1.0]))
    assert d.fetch(_unit([1, 1, 0, 0, 0, 0, 0, 0])).perturbation[0] == 0.0


def test_random_fetch_exact_match_ignores_rng():
    d = Dictionary(RANDOM_FETCH)
    for i in range(5):
        d.store(_basis(i), np.array([float(i)]))
    for seed in range(20):
        assert d.fetch(_basis(3), np.random.default_rng(seed)).perturbation[0] == 3.0
    got = {d.fetch(_unit(np.ones(8)), np.random.default_rng(s)).perturbation[0] for s in range(50)}
    assert len(got) > 1


def test_unknown_policy():
    with pytest.raises(InvalidArgument):
        Dictionary("lru")


@pytest.mark.parametrize("policy", [FULL, SINGLE_SLOT, RANDOM_FETCH])
def test_save_load_round_trip(tmp_path, policy):
    rng = np.random.default_rng(0)
    d = Dictionary(policy)
    for _ in range(3):
        d.store(_unit(rng.standard_normal(8)), rng.standard_normal((4, 4, 3)))
    d.save(tmp_path / "d.tensors")
    e = Dictionary.load(tmp_path / "d.tensors")
    assert e.policy == policy and len(e) == len(d)
    for a, b in zip(d.entries, e.entries):
        # stored as 32-bit floats on disk
        np.testing.assert_allclose(a.key, b.key, rtol=1e-6)
        np.testing.assert_allclose(a.perturbation, b.perturbation, rtol=1e-6)


def test_save_load_empty(tmp_path):
    Dictionary(FULL).save(tmp_path / "e.tensors")
    assert len(Dictionary.load(tmp_path / "e.tensors")) == 0


def _threshold_case():
    x = np.zeros((4, 4, 3))
    space = make_image_space(x)
    u = np.zeros((4, 4, 3))
    u[1, 2, 0] = 0.4
    o = FuncOracle(x, lambda img: 0 if np.abs(img - x).max() >= 0.5 else 1)
    return o, space, u


def test_scale_loop_threshold_crossing():
    o, space, u = _threshold_case()
    point, k = scale_until_adversarial(o, space, u)
    assert k == 5 and o.queries == 6
    assert np.abs(point).max() == pytest.approx(0.4 * 1.05 ** 5)
    # the returned point is adversarial, the one before it is not
    assert o.audit(space.to_image(point)) == 0
    assert o.audit(space.to_image(u * 1.05 ** 4)) == 1


def test_scale_loop_already_adversarial():
    x = np.zeros((4, 4, 3))
    o = FuncOracle(x, always(0))
    point, k = scale_until_adversarial(o, make_image_space(x), np.full((4, 4, 3), 0.1))
    assert k == 0 and o.queries == 1


def test_scale_loop_gives_up():
    x = np.zeros((4, 4, 3))
    o = FuncOracle(x, always(1))
    assert scale_until_adversarial(o, make_image_space(x), np.full((4, 4, 3), 0.1), k_max=30) is None
    assert o.queries == 31


def test_scale_loop_rejects_zero():
    x = np.zeros((4, 4, 3))
    with pytest.raises(InvalidArgument):
        scale_until_adversarial(FuncOracle(x, always(0)), make_image_space(x), x)
