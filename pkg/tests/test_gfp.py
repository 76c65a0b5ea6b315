import itertools

import numpy as np
import pytest

from fatpoints.gfp import (
    DEFAULT_PRIME,
    FieldPrime,
    active_backend,
    is_prime,
    next_ladder_prime,
    rank,
    rank_blocked,
)

from _oracles import rank_mod_p_reference, rank_rational_reference

P = DEFAULT_PRIME


def test_is_prime():
    assert is_prime(2) and is_prime(3) and is_prime(32003) and is_prime(65537)
    assert not is_prime(1) and not is_prime(32001) and not is_prime(65536)


def test_field_prime_validation():
    FieldPrime(32003)
    with pytest.raises(ValueError):
        FieldPrime(32001)  # composite
    with pytest.raises(ValueError):
        FieldPrime(37)  # too small: derivative coefficients could vanish
    with pytest.raises(ValueError):
        FieldPrime(2**31 + 11)


def test_field_ops():
    f = FieldPrime(32003)
    assert f.add(32000, 5) == 2
    assert f.sub(3, 5) == 32001
    assert f.mul(1000, 1000) == 1000 * 1000 % 32003
    assert f.inv(1) == 1
    g = FieldPrime(104729)
    for a in (1, 2, 3, 57, 104728):
        assert g.mul(a, g.inv(a)) == 1
    with pytest.raises(ZeroDivisionError):
        f.inv(0)
    with pytest.raises(ValueError):
        f.add(-1, 3)
    with pytest.raises(ValueError):
        f.mul(32003, 1)


def test_inverse_small_prime_brute_force():
    # inv(3) mod 7 is 5 because 3*5 = 15 = 2*7 + 1
    assert 3 * 5 % 7 == 1
    assert pow(3, -1, 7) == 5


def test_ladder():
    assert next_ladder_prime(32003) == 65537
    assert next_ladder_prime(65537) == 104729
    assert next_ladder_prime(104729) == 104729


def test_rank_basics():
    assert rank(np.eye(3, dtype=np.int64), P) == 3
    assert rank(np.zeros((7, 2), dtype=np.int64), P) == 0
    assert rank(np.zeros((0, 5), dtype=np.int64), P) == 0
    assert rank(np.array([[1, 2], [2, 4], [0, 1]]), P) == 2
    with pytest.raises(ValueError):
        rank(np.ones(4), P)  # not 2-D
    with pytest.raises(ValueError):
        rank(np.eye(2), 32001)  # composite modulus


def test_rank_reduces_entries_mod_p():
    a = np.array([[P, 2 * P], [3 * P, 7 * P]])
    assert rank(a, P) == 0
    assert rank(np.array([[P + 1, 0], [0, P]]), P) == 1


def test_rank_against_reference_random():
    rng = np.random.default_rng(123)
    for _ in range(60):
        m = int(rng.integers(1, 40))
        n = int(rng.integers(1, 40))
        k = int(rng.integers(0, min(m, n) + 1))
        a = (rng.integers(0, P, (m, k)) @ rng.integers(0, P, (k, n))) % P
        expected = rank_mod_p_reference(a, P)
        assert rank(a, P, block=8) == expected
        assert rank(a, P) == expected


def test_rank_invariances():
    rng = np.random.default_rng(7)
    for _ in range(25):
        m, n = int(rng.integers(2, 25)), int(rng.integers(2, 25))
        a = rng.integers(0, P, (m, n))
        base = rank(a, P)
        # row swap
        b = a.copy()
        b[[0, -1]] = b[[-1, 0]]
        assert rank(b, P) == base
        # scale a row by a nonzero element
        c = a.copy()
        c[0] = c[0] * int(rng.integers(1, P)) % P
        assert rank(c, P) == base
        # transpose
        assert rank(a.T, P) == base


def test_rank_mod_p_matches_rational_rank_on_random():
    # spurious modular rank drops are measure-zero; 100 clean 20x20 draws
    rng = np.random.default_rng(999)
    for _ in range(100):
        a = rng.integers(0, P, (20, 20))
        assert rank(a, P) == rank_rational_reference(a)


def test_rank_never_exceeds_rational_rank():
    rng = np.random.default_rng(55)
    for _ in range(30):
        m, n = int(rng.integers(1, 12)), int(rng.integers(1, 12))
        a = rng.integers(-50, 50, (m, n))
        assert rank(a % P, P) <= rank_rational_reference(a)


def test_rank_blocked_exhaustive_tiny():
    for p in (2, 3):
        for shape in ((2, 2), (3, 3)):
            cells = shape[0] * shape[1]
            for values in itertools.product(range(p), repeat=cells):
                a = np.array(values, dtype=np.int64).reshape(shape)
                expected = rank_mod_p_reference(a, p)
                assert rank(a, p) == expected
                assert rank_blocked(a, p, threads=2) == expected


def test_rank_blocked_equals_rank_random():
    rng = np.random.default_rng(2024)
    for trial in range(200):
        m = int(rng.integers(1, 301))
        n = int(rng.integers(1, 301))
        a = rng.integers(0, P, (m, n))
        if trial % 3 == 0:
            k = int(rng.integers(0, min(m, n) + 1))
            a = (rng.integers(0, P, (m, k)) @ rng.integers(0, P, (k, n))) % P
        r = rank(a, P)
        assert rank_blocked(a, P, threads=4) == r
        assert rank_blocked(a, P, threads=1) == r
    with pytest.raises(ValueError):
        rank_blocked(np.eye(2), P, threads=0)


def test_backends_agree(monkeypatch):
    rng = np.random.default_rng(31)
    mats = [rng.integers(0, P, (int(rng.integers(1, 120)), int(rng.integers(1, 120)))) for _ in range(12)]
    monkeypatch.setenv("FATPOINTS_BACKEND", "numpy")
    assert active_backend() == "numpy"
    numpy_ranks = [rank(a, P) for a in mats]
    numpy_blocked = [rank_blocked(a, P, threads=2) for a in mats]
    monkeypatch.setenv("FATPOINTS_BACKEND", "numba")
    assert active_backend() == "numba"
    numba_ranks = [rank(a, P) for a in mats]
    assert numpy_ranks == numba_ranks == numpy_blocked
    monkeypatch.setenv("FATPOINTS_BACKEND", "bogus")
    with pytest.raises(ValueError):
        active_backend()


def test_large_modulus_falls_back_exactly():
    # 2^31 - 1 is prime and far beyond the float64 delayed-reduction bound
    p = 2**31 - 1
    rng = np.random.default_rng(77)
    for _ in range(5):
        a = rng.integers(0, p, (15, 18))
        assert rank(a, p) == rank_mod_p_reference(a, p)
    with pytest.raises(ValueError):
        rank(np.eye(2), 2**31 + 11)


def test_float_input_validation():
    assert rank(np.eye(3) * 1.0, P) == 3
    with pytest.raises(ValueError):
        rank(np.array([[0.5, 1.0], [0.0, 1.0]]), P)
    with pytest.raises(ValueError):
        rank(np.array([[np.inf, 1.0], [0.0, 1.0]]), P)
