import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spinc_immersion.clifford import (
    DimensionMismatch,
    Multivector,
    NotARealVector,
    cl_inner,
    embed_vector,
    extract_real_vector,
    geometric_product,
    grade_project,
    promote,
    shift_generators,
    tau,
)
from spinc_immersion.spin import rotor

from conftest import multivectors, random_mv

E = Multivector.generator
one = Multivector.scalar


def blade_product_oracle(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, tuple[int, ...]]:
    """Multiply two words of generators by bubble-sorting the concatenation.

    Every adjacent swap of distinct generators costs a sign, and every
    adjacent repeated pair e_i e_i is replaced by -1.
    """
    word = list(a + b)
    sign = 1
    changed = True
    while changed:
        changed = False
        for i in range(len(word) - 1):
            if word[i] > word[i + 1]:
                word[i], word[i + 1] = word[i + 1], word[i]
                sign = -sign
                changed = True
                break
            if word[i] == word[i + 1]:
                del word[i : i + 2]
                sign = -sign
                changed = True
                break
    return sign, tuple(word)


def blade_tuple(mask: int) -> tuple[int, ...]:
    return tuple(i for i in range(8) if mask >> i & 1)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_product_matches_bubble_sort_oracle(m):
    for a, b in itertools.product(range(1 << m), repeat=2):
        sign, word = blade_product_oracle(blade_tuple(a), blade_tuple(b))
        got = geometric_product(Multivector.blade([i + 1 for i in blade_tuple(a)], m), Multivector.blade([i + 1 for i in blade_tuple(b)], m))
        expected = np.zeros(1 << m, dtype=complex)
        expected[sum(1 << i for i in word)] = sign
        np.testing.assert_array_equal(got.coeffs, expected)


def test_product_examples():
    assert (E(1, 2) * E(1, 2)).allclose(one(-1, 2))
    e12 = Multivector.blade([1, 2], 2)
    assert (one(1, 2) * e12).allclose(e12)
    assert (e12 * e12).allclose(one(-1, 2))
    assert (E(2, 3) * E(1, 3)).allclose(-(E(1, 3) * E(2, 3)))


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        geometric_product(E(1, 2), E(1, 3))
    with pytest.raises(DimensionMismatch):
        cl_inner(one(1, 2), one(1, 3))


def test_multivector_invariants():
    with pytest.raises(ValueError):
        Multivector(np.zeros(3))
    with pytest.raises(ValueError):
        Multivector(np.array([np.nan, 0]))
    with pytest.raises(ValueError):
        Multivector.zero(17)
    mv = one(2.0, 2)
    with pytest.raises(ValueError):
        mv.coeffs[0] = 3.0


def test_tau_examples():
    assert tau(one(1, 3)).allclose(one(1, 3))
    assert tau(one(1j, 3)).allclose(one(-1j, 3))
    e12 = Multivector.blade([1, 2], 3)
    assert tau(e12).allclose(-e12)
    assert tau(E(2, 3)).allclose(-E(2, 3))
    e123 = Multivector.blade([1, 2, 3], 3)
    # (-1)^3 e3 e2 e1 = -(-e1 e2 e3)
    assert tau(e123).allclose(e123)


def test_cl_inner_examples():
    assert cl_inner(one(1, 2), one(1, 2)).allclose(one(1, 2))
    assert cl_inner(E(1, 2), E(1, 2)).allclose(one(1, 2))
    assert cl_inner(E(1, 2), one(1, 2)).allclose(E(1, 2))


def test_grade_project_examples():
    a = one(1, 2) + E(1, 2) + Multivector.blade([1, 2], 2)
    assert grade_project(a, 1).allclose(E(1, 2))
    assert grade_project(Multivector.blade([1, 2], 2), 0).allclose(Multivector.zero(2))
    with pytest.raises(ValueError):
        grade_project(a, 3)
    with pytest.raises(ValueError):
        grade_project(a, -1)


def test_embed_and_extract():
    assert embed_vector([1, 0, 0]).allclose(E(1, 3))
    assert embed_vector([0, 0, 0]).allclose(Multivector.zero(3))
    assert embed_vector([2.0, -3.0]).allclose(2.0 * E(1, 2) - 3.0 * E(2, 2))
    with pytest.raises(DimensionMismatch):
        embed_vector([1, 2], m=3)
    np.testing.assert_array_equal(extract_real_vector(E(3, 4)), [0, 0, 1, 0])
    with pytest.raises(NotARealVector) as exc:
        extract_real_vector(one(1, 3))
    assert exc.value.residue == pytest.approx(1.0)
    with pytest.raises(ValueError):
        extract_real_vector(E(1, 3), tol=0)


def test_extract_after_rotor_sandwich(rng):
    m = 4
    g = (rotor(1, 3, 0.7, m) * rotor(2, 4, -1.1, m) * rotor(3, 4, 2.9, m)).value
    out = extract_real_vector(tau(g) * E(m, m) * g)
    assert np.linalg.norm(out) == pytest.approx(1.0, abs=1e-12)


def test_promote_and_shift():
    assert promote(E(1, 2), 4).allclose(E(1, 4))
    assert promote(one(1, 1), 3).allclose(one(1, 3))
    a, b = Multivector.blade([1, 2], 3), E(3, 3) + one(2, 3)
    assert promote(a * b, 5).allclose(promote(a, 5) * promote(b, 5))
    assert shift_generators(E(1, 2), 2, 4).allclose(E(3, 4))
    with pytest.raises(ValueError):
        promote(E(1, 3), 2)
    with pytest.raises(ValueError):
        shift_generators(E(1, 2), 3, 4)


@given(st.data())
def test_associativity(data):
    m = data.draw(st.integers(1, 6))
    a, b, c = (data.draw(multivectors(m)) for _ in range(3))
    assert ((a * b) * c).allclose(a * (b * c), atol=1e-11)


@given(st.data())
def test_grade_partition(data):
    a = data.draw(multivectors())
    total = Multivector.zero(a.dim)
    for k in range(a.dim + 1):
        total = total + grade_project(a, k)
    assert total.allclose(a, atol=0)


@given(
    st.lists(st.floats(-3, 3, allow_nan=False), min_size=4, max_size=4),
    st.lists(st.floats(-3, 3, allow_nan=False), min_size=4, max_size=4),
)
def test_anticommutation(u, v):
    U, V = embed_vector(u), embed_vector(v)
    assert (U * V + V * U).allclose(one(-2 * float(np.dot(u, v)), 4), atol=1e-12)


@given(st.data())
def test_tau_anti_automorphism(data):
    m = data.draw(st.integers(1, 6))
    a, b = data.draw(multivectors(m)), data.draw(multivectors(m))
    assert tau(a * b).allclose(tau(b) * tau(a), atol=1e-11)
    assert tau(tau(a)).allclose(a, atol=0)
    # antilinear
    assert tau(a * 1j).allclose(tau(a) * -1j, atol=1e-14)


@given(st.data())
def test_inner_product_identities(data):
    m = data.draw(st.integers(2, 5))
    psi, phi = data.draw(multivectors(m)), data.draw(multivectors(m))
    x = data.draw(st.lists(st.floats(-2, 2, allow_nan=False), min_size=m, max_size=m))
    X = embed_vector(x)
    assert cl_inner(X * psi, phi).allclose(-cl_inner(psi, X * phi), atol=1e-10)
    assert tau(cl_inner(psi, phi)).allclose(cl_inner(phi, psi), atol=1e-10)


def test_inner_product_spinc_invariance(rng):
    for m in range(2, 7):
        for _ in range(10):
            g = rotor(1, 2, rng.uniform(-np.pi, np.pi), m).value
            for i, j in itertools.combinations(range(1, m + 1), 2):
                g = g * rotor(i, j, rng.uniform(-np.pi, np.pi), m).value
            g = g * np.exp(1j * rng.uniform(0, 2 * np.pi))
            a, b = random_mv(rng, m), random_mv(rng, m)
            assert cl_inner(g * a, g * b).allclose(cl_inner(a, b), atol=1e-11)
